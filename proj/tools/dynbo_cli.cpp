#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "dynbo/config.hpp"
#include "dynbo/errors.hpp"
#include "dynbo/harness.hpp"
#include "dynbo/selftest.hpp"
#include "dynbo/wire.hpp"

namespace fs = std::filesystem;
using namespace dynbo;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out << text;
}

Config load_layered_config(const std::string& explicit_path) {
  Config cfg;
  if (auto env = default_config_path()) cfg.merge(Config::load(*env));
  if (!explicit_path.empty()) cfg.merge(Config::load(explicit_path));
  return cfg;
}

int cmd_track(const std::string& seq_dir, const std::string& oracle_kind, const std::string& endpoint,
              const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
              const std::string& format) {
  Config cfg = load_layered_config(config_path);
  if (seed) cfg.set("seed", std::to_string(*seed));

  std::unique_ptr<SimilarityOracle> oracle;
  if (oracle_kind == "ncc") {
    oracle = std::make_unique<NccOracle>();
  } else {
    if (endpoint.empty()) throw InvalidArgument("--oracle external needs --endpoint");
    oracle = std::make_unique<ExternalOracle>(std::make_unique<WireClient>(open_endpoint(endpoint)));
  }
  SdbtaConfig sc = sdbta_config_from(cfg);
  // Cap the exploration margin relative to the oracle's score range unless set.
  if (!cfg.has("acq.xi_max")) sc.acq.xi_max = 10.0 * oracle->range().span();

  const Sequence seq = load_sequence(seq_dir);
  SdbtaEvalTracker tracker(std::move(oracle), sc);
  EvalReport report = run_eval(tracker, seq);
  fs::create_directories(out_dir);
  write_report_files(emit_report({report}, format == "json" ? ReportFormat::Json : ReportFormat::Csv), out_dir);
  std::printf("%s: mean IOU %.6f, std %.6f over %zu frames, %zu oracle calls%s\n", seq.name.c_str(),
              report.mean_iou, report.std_iou, report.trace.size(), report.oracle_calls,
              report.complete ? "" : " (incomplete)");
  if (!report.complete) {
    std::fprintf(stderr, "error: %s\n", report.error.c_str());
    return 3;
  }
  return 0;
}

int cmd_bench_dop(int frames, int budget, const std::string& acq, std::uint64_t seed, double noise_sd,
                  const std::vector<double>& velocity, const std::string& config_path, const std::string& out_dir) {
  DopBenchConfig bench;
  bench.frames = frames;
  bench.seed = seed;
  bench.noise_sd = noise_sd;
  if (velocity.size() != 2) throw InvalidArgument("--velocity takes two numbers");
  bench.velocity = {velocity[0], velocity[1]};
  bench.sdbta = sdbta_config_from(load_layered_config(config_path));
  bench.sdbta.seed = seed;
  bench.sdbta.tracker.budget_per_frame = budget;
  if (acq == "random") {
    bench.sdbta.random_sampling = true;
  } else {
    bench.sdbta.acq.kind = parse_acquisition_kind(acq);
  }
  const DopBenchResult result = run_dop_benchmark(bench);
  const std::string csv = dop_bench_csv(result);
  if (out_dir.empty() || out_dir == "-") {
    std::cout << csv;
  } else {
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "dop.csv", csv);
  }
  std::fprintf(stderr, "mean error %.6f (%.3f cells), %zu oracle calls\n", result.mean_error,
               result.mean_error / result.cell_size, result.oracle_calls);
  return 0;
}

int cmd_baseline_tm(const std::string& seq_dir, int stride, const std::string& out_dir, const std::string& format) {
  const Sequence seq = load_sequence(seq_dir);
  EvalReport report = run_baseline_tm(seq, stride);
  fs::create_directories(out_dir);
  write_report_files(emit_report({report}, format == "json" ? ReportFormat::Json : ReportFormat::Csv), out_dir);
  std::printf("%s: mean IOU %.6f, std %.6f over %zu frames, %zu oracle calls\n", seq.name.c_str(), report.mean_iou,
              report.std_iou, report.trace.size(), report.oracle_calls);
  return report.complete ? 0 : 3;
}

int cmd_selftest() {
  const auto s = selftest::run_gp_selftest(50, 1, 1e-8, &std::cerr);
  std::printf("gp oracle equivalence: %d/%d instances, max |mean| err %.3g, max |var| err %.3g, max |lml| err %.3g, "
              "%.3f s\n",
              s.instances - s.failures, s.instances, s.max_mean_error, s.max_variance_error, s.max_lml_error,
              s.seconds);
  return s.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic Bayesian optimization tracker"};
  app.require_subcommand(1);

  std::string seq, oracle = "ncc", endpoint, config, out, format = "csv";
  std::optional<std::uint64_t> seed;
  auto* track = app.add_subcommand("track", "Track a VOT-format sequence with SDBTA");
  track->add_option("--seq", seq, "Sequence directory")->required();
  track->add_option("--oracle", oracle)->check(CLI::IsMember({"ncc", "external"}));
  track->add_option("--endpoint", endpoint, "host:port or a stdio command");
  track->add_option("--config", config, "key = value config file");
  track->add_option("--out", out, "Output directory")->required();
  track->add_option("--seed", seed);
  track->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

  int frames = 50, budget = 80, stride = 1;
  std::string acq = "msei";
  std::uint64_t bench_seed = 0;
  double noise_sd = 0.0;
  std::vector<double> velocity{0.02, 0.015};
  std::string bench_out, bench_config;
  auto* bench = app.add_subcommand("bench-dop", "Moving-peak benchmark; writes per-frame CSV");
  bench->add_option("--frames", frames)->check(CLI::PositiveNumber);
  bench->add_option("--budget", budget)->check(CLI::PositiveNumber);
  bench->add_option("--acq", acq)->check(CLI::IsMember({"ei", "pi", "msei", "random"}));
  bench->add_option("--seed", bench_seed);
  bench->add_option("--noise-sd", noise_sd)->check(CLI::NonNegativeNumber);
  bench->add_option("--velocity", velocity)->expected(2);
  bench->add_option("--config", bench_config);
  bench->add_option("--out", bench_out, "Output directory (stdout when omitted)");

  std::string tm_seq, tm_out, tm_format = "csv";
  auto* tm = app.add_subcommand("baseline-tm", "Exhaustive NCC template-matching baseline");
  tm->add_option("--seq", tm_seq)->required();
  tm->add_option("--stride", stride)->check(CLI::PositiveNumber);
  tm->add_option("--out", tm_out)->required();
  tm->add_option("--format", tm_format)->check(CLI::IsMember({"csv", "json"}));

  auto* st = app.add_subcommand("gp-selftest", "Check the GP against dense reference solvers");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*track) return cmd_track(seq, oracle, endpoint, config, out, seed, format);
    if (*bench) return cmd_bench_dop(frames, budget, acq, bench_seed, noise_sd, velocity, bench_config, bench_out);
    if (*tm) return cmd_baseline_tm(tm_seq, stride, tm_out, tm_format);
    if (*st) return cmd_selftest();
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
