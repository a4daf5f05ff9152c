#include "dynbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dynbo/errors.hpp"

namespace dynbo {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;
constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;
constexpr double kMeanFloor = 1e-6;
// Below this z the direct forms lose too many digits to cancellation.
constexpr double kTailZ = -25.0;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_finite(double mean, double sd, double incumbent, double xi) {
  if (!std::isfinite(mean) || !std::isfinite(sd) || !std::isfinite(incumbent) || !std::isfinite(xi))
    throw InvalidArgument("acquisition inputs must be finite");
  if (sd < 0.0) throw InvalidArgument("posterior standard deviation must be nonnegative");
}

double log_normal_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

// log(z*Phi(z) + phi(z))
double log_ei_core(double z) {
  if (z > kTailZ) return std::log(z * normal_cdf(z) + normal_pdf(z));
  const double w = 1.0 / (z * z);
  return log_normal_pdf(z) + std::log(w) + std::log1p(w * (-3.0 + w * (15.0 - 105.0 * w)));
}

double log_normal_cdf(double z) {
  if (z > kTailZ) return std::log(normal_cdf(z));
  const double w = 1.0 / (z * z);
  return log_normal_pdf(z) - std::log(-z) + std::log1p(w * (-1.0 + w * (3.0 - 15.0 * w)));
}

}  // namespace

std::string_view to_string(AcquisitionKind kind) {
  switch (kind) {
    case AcquisitionKind::EI:
      return "ei";
    case AcquisitionKind::PI:
      return "pi";
    case AcquisitionKind::MSEI:
      return "msei";
  }
  return "unknown";
}

AcquisitionKind parse_acquisition_kind(std::string_view name) {
  if (name == "ei" || name == "EI") return AcquisitionKind::EI;
  if (name == "pi" || name == "PI") return AcquisitionKind::PI;
  if (name == "msei" || name == "MSEI" || name == "ms-ei") return AcquisitionKind::MSEI;
  throw InvalidArgument("unknown acquisition kind '" + std::string(name) + "'");
}

void AcqConfig::validate() const {
  if (!(alpha > 0.0)) throw InvalidArgument("acq.alpha must be positive");
  if (!(q > 0.0)) throw InvalidArgument("acq.q must be positive");
  if (!(fixed_xi >= 0.0)) throw InvalidArgument("acq.fixed_xi must be nonnegative");
  if (!(xi_max > 0.0)) throw InvalidArgument("acq.xi_max must be positive");
}

void SearchHistory::record(const Location& location, double value) {
  if (!std::isfinite(value)) throw InvalidArgument("observed value must be finite");
  if (values_.empty() || value > values_[best_]) best_ = values_.size();
  values_.push_back(value);
  locations_.push_back(location);
  visited_.insert(location);
}

void SearchHistory::clear() {
  values_.clear();
  locations_.clear();
  visited_.clear();
  best_ = 0;
}

double SearchHistory::mean() const {
  if (values_.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values_) sum += v;
  return sum / static_cast<double>(values_.size());
}

std::optional<Incumbent> SearchHistory::incumbent() const {
  if (values_.empty()) return std::nullopt;
  return Incumbent{values_[best_], locations_[best_]};
}

bool SearchHistory::contains(const Location& location) const {
  return visited_.count(location) != 0;
}

double normal_pdf(double z) noexcept { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z * kInvSqrt2); }

double ms_ei_xi(const SearchHistory& history, const AcqConfig& cfg) {
  cfg.validate();
  if (history.n() == 0) throw InvalidArgument("ms_ei_xi needs at least one observation");
  const double mean = history.mean() - cfg.score_floor;
  if (mean <= kMeanFloor) return cfg.xi_max;
  return 1.0 / (cfg.alpha * mean * std::pow(static_cast<double>(history.n()), cfg.q));
}

double expected_improvement(double mean, double sd, double incumbent, double xi) {
  check_finite(mean, sd, incumbent, xi);
  const double improvement = mean - incumbent - xi;
  if (sd == 0.0) return std::max(improvement, 0.0);
  const double z = improvement / sd;
  return std::max(0.0, improvement * normal_cdf(z) + sd * normal_pdf(z));
}

double probability_of_improvement(double mean, double sd, double incumbent, double xi) {
  check_finite(mean, sd, incumbent, xi);
  const double improvement = mean - incumbent - xi;
  if (sd == 0.0) return improvement > 0.0 ? 1.0 : 0.0;
  return normal_cdf(improvement / sd);
}

double log_expected_improvement(double mean, double sd, double incumbent, double xi) {
  check_finite(mean, sd, incumbent, xi);
  const double improvement = mean - incumbent - xi;
  if (sd == 0.0) return improvement > 0.0 ? std::log(improvement) : kNegInf;
  return std::log(sd) + log_ei_core(improvement / sd);
}

double log_probability_of_improvement(double mean, double sd, double incumbent, double xi) {
  check_finite(mean, sd, incumbent, xi);
  const double improvement = mean - incumbent - xi;
  if (sd == 0.0) return improvement > 0.0 ? 0.0 : kNegInf;
  return log_normal_cdf(improvement / sd);
}

double exploration_margin(const SearchHistory& history, const AcqConfig& cfg) {
  cfg.validate();
  if (cfg.kind != AcquisitionKind::MSEI) return cfg.fixed_xi;
  return history.n() == 0 ? cfg.xi_max : ms_ei_xi(history, cfg);
}

double acquisition_score(AcquisitionKind kind, double mean, double sd, double incumbent, double xi) {
  return kind == AcquisitionKind::PI ? log_probability_of_improvement(mean, sd, incumbent, xi)
                                     : log_expected_improvement(mean, sd, incumbent, xi);
}

double incumbent_value(const SearchHistory& history, std::span<const Prediction> predictions) {
  if (auto inc = history.incumbent()) return inc->value;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : predictions) best = std::max(best, p.mean);
  return best;
}

Selection select_from_predictions(std::span<const Query> candidates, std::span<const Prediction> predictions,
                                  const SearchHistory& history, const AcqConfig& cfg) {
  if (candidates.empty()) throw InvalidArgument("select_next needs at least one candidate");
  if (predictions.size() != candidates.size())
    throw InvalidArgument("one prediction per candidate is required");
  for (const auto& c : candidates)
    if (c.time != candidates.front().time)
      throw InvalidArgument("all candidates must lie on the current time slice");

  const double xi = exploration_margin(history, cfg);
  const double best = incumbent_value(history, predictions);

  Selection sel;
  bool found = false;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (history.contains(candidates[i].location)) continue;
    const double sd = std::sqrt(predictions[i].variance);
    const double score = acquisition_score(cfg.kind, predictions[i].mean, sd, best, xi);
    if (!found || score > sel.score) {
      sel.index = i;
      sel.score = score;
      found = true;
    }
  }
  if (!found) {
    sel.fallback = true;
    sel.score = predictions[0].variance;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
      if (predictions[i].variance > sel.score) {
        sel.index = i;
        sel.score = predictions[i].variance;
      }
    }
  }
  sel.query = candidates[sel.index];
  return sel;
}

Selection select_next(const GpModel& model, std::span<const Query> candidates, const SearchHistory& history,
                      const AcqConfig& cfg) {
  if (candidates.empty()) throw InvalidArgument("select_next needs at least one candidate");
  const auto predictions = model.predict(candidates);
  return select_from_predictions(candidates, predictions, history, cfg);
}

}  // namespace dynbo
