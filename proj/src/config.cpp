#include "dynbo/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "dynbo/errors.hpp"

namespace dynbo {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "kernel.spatial.family", "kernel.spatial.variance", "kernel.spatial.lengthscale",
      "kernel.temporal.family", "kernel.temporal.variance", "kernel.temporal.lengthscale",
      "gp.noise", "gp.prior_mean", "gp.fit_hyperparams", "gp.refit_every",
      "gp.hyper.spatial", "gp.hyper.temporal",
      "acq.kind", "acq.alpha", "acq.q", "acq.fixed_xi", "acq.xi_max",
      "tracker.budget", "tracker.grid_d", "tracker.scale_p", "tracker.search_factor",
      "tracker.window_frames", "tracker.scale_damping",
      "seed"};
  return keys;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw InvalidArgument("config key '" + key + "': '" + item + "' is not a number");
    }
  }
  return out;
}

}  // namespace

Config Config::parse(std::string_view text, const std::string& source) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(source + ": expected 'key = value'", number);
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw ParseError(source + ": empty key", number);
    cfg.values_[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

std::optional<std::string> Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double x = std::stod(*v, &used);
    if (used != v->size() || !std::isfinite(x)) throw std::invalid_argument(*v);
    return x;
  } catch (const std::exception&) {
    throw InvalidArgument("config key '" + key + "': '" + *v + "' is not a number");
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const int x = std::stoi(*v, &used);
    if (used != v->size()) throw std::invalid_argument(*v);
    return x;
  } catch (const std::exception&) {
    throw InvalidArgument("config key '" + key + "': '" + *v + "' is not an integer");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw InvalidArgument("config key '" + key + "': '" + *v + "' is not a boolean");
}

void Config::merge(const Config& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

std::optional<std::string> default_config_path() {
  if (const char* p = std::getenv("DYNBO_CONFIG"); p && *p) return std::string(p);
  return std::nullopt;
}

SdbtaConfig sdbta_config_from(const Config& cfg, SdbtaConfig base) {
  for (const auto& [key, value] : cfg.entries())
    if (!known_keys().count(key)) throw InvalidArgument("unknown config key '" + key + "'");

  auto& k = base.gp.kernel;
  if (auto f = cfg.get("kernel.spatial.family")) k.spatial.family = parse_matern_family(*f);
  k.spatial.variance = cfg.get_double("kernel.spatial.variance", k.spatial.variance);
  k.spatial.lengthscale = cfg.get_double("kernel.spatial.lengthscale", k.spatial.lengthscale);
  if (auto f = cfg.get("kernel.temporal.family")) k.temporal.family = parse_matern_family(*f);
  k.temporal.variance = cfg.get_double("kernel.temporal.variance", k.temporal.variance);
  k.temporal.lengthscale = cfg.get_double("kernel.temporal.lengthscale", k.temporal.lengthscale);

  auto& gp = base.gp;
  gp.noise = cfg.get_double("gp.noise", gp.noise);
  if (cfg.has("gp.prior_mean")) gp.prior_mean = cfg.get_double("gp.prior_mean", 0.0);
  gp.fit_hyperparams = cfg.get_bool("gp.fit_hyperparams", gp.fit_hyperparams);
  gp.refit_every = cfg.get_int("gp.refit_every", gp.refit_every);
  if (auto v = cfg.get("gp.hyper.spatial")) gp.hyper_grid.spatial = parse_list("gp.hyper.spatial", *v);
  if (auto v = cfg.get("gp.hyper.temporal")) gp.hyper_grid.temporal = parse_list("gp.hyper.temporal", *v);

  auto& acq = base.acq;
  if (auto v = cfg.get("acq.kind")) acq.kind = parse_acquisition_kind(*v);
  acq.alpha = cfg.get_double("acq.alpha", acq.alpha);
  acq.q = cfg.get_double("acq.q", acq.q);
  acq.fixed_xi = cfg.get_double("acq.fixed_xi", acq.fixed_xi);
  acq.xi_max = cfg.get_double("acq.xi_max", acq.xi_max);

  auto& t = base.tracker;
  t.budget_per_frame = cfg.get_int("tracker.budget", t.budget_per_frame);
  t.grid_d = cfg.get_int("tracker.grid_d", t.grid_d);
  t.scale_p = cfg.get_double("tracker.scale_p", t.scale_p);
  t.search_factor = cfg.get_double("tracker.search_factor", t.search_factor);
  t.window_frames = cfg.get_int("tracker.window_frames", t.window_frames);
  t.scale_damping = cfg.get_double("tracker.scale_damping", t.scale_damping);

  if (auto v = cfg.get("seed")) {
    try {
      base.seed = std::stoull(*v);
    } catch (const std::exception&) {
      throw InvalidArgument("config key 'seed': '" + *v + "' is not an unsigned integer");
    }
  }
  base.validate();
  return base;
}

}  // namespace dynbo
