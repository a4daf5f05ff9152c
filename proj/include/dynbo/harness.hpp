#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dynbo/dop.hpp"
#include "dynbo/geometry.hpp"
#include "dynbo/similarity.hpp"
#include "dynbo/tracker.hpp"

namespace dynbo {

struct Sequence {
  std::string name;
  std::vector<std::string> frame_paths;
  std::vector<BoundingBox> ground_truth;
  // In-memory frames; when empty, frames are loaded from frame_paths on demand.
  std::vector<Image> images;

  std::size_t size() const { return ground_truth.size(); }
  Frame frame(std::size_t i) const;
};

/// Parses one ground-truth line: "x,y,w,h" (top-left) or an 8-number polygon,
/// which is replaced by its axis-aligned hull. Commas, tabs and spaces all
/// separate numbers.
BoundingBox parse_groundtruth_line(const std::string& line, std::size_t line_number);

/// VOT-style directory: image files sorted lexicographically plus groundtruth.txt.
Sequence load_sequence(const std::string& dir);

/// Synthetic clip: a textured object sliding at constant velocity over a flat
/// background, optionally with uniform pixel noise. Frames are held in memory.
struct TranslatingClipConfig {
  int width = 256;
  int height = 256;
  int frames = 10;
  BoundingBox start{96.0, 128.0, 40.0, 40.0};
  Location velocity{2.0, 0.0};  // pixels per frame
  double blob_sigma = 8.0;        // object texture scale, pixels
  double background_noise = 0.0;   // uniform half-range
  std::uint64_t seed = 7;
};

Sequence make_translating_clip(const TranslatingClipConfig& cfg);

/// Writes a sequence as PGM frames plus groundtruth.txt (top-left x,y,w,h).
void save_sequence(const Sequence& seq, const std::string& dir);

/// Anything that can be evaluated frame by frame.
class Tracker {
 public:
  virtual ~Tracker() = default;
  virtual std::string name() const = 0;
  virtual void init(const Frame& first, const BoundingBox& box) = 0;
  virtual BoundingBox step(const Frame& frame) = 0;
  virtual std::size_t oracle_calls() const { return 0; }
  virtual std::map<std::string, std::string> config_snapshot() const { return {}; }
};

/// SDBTA behind the Tracker interface; owns its oracle.
class SdbtaEvalTracker final : public Tracker {
 public:
  SdbtaEvalTracker(std::unique_ptr<SimilarityOracle> oracle, SdbtaConfig cfg);

  std::string name() const override { return "sdbta"; }
  void init(const Frame& first, const BoundingBox& box) override;
  BoundingBox step(const Frame& frame) override;
  std::size_t oracle_calls() const override { return oracle_->calls(); }
  std::map<std::string, std::string> config_snapshot() const override;

  const SdbtaTracker& tracker() const { return tracker_; }

 private:
  std::unique_ptr<SimilarityOracle> oracle_;
  SdbtaTracker tracker_;
};

/// Exhaustive NCC scan over the search region at a fixed stride, fixed
/// exemplar, no scale handling.
class TemplateMatchTracker final : public Tracker {
 public:
  explicit TemplateMatchTracker(int stride = 1, double search_factor = 2.0);

  std::string name() const override { return "tm"; }
  void init(const Frame& first, const BoundingBox& box) override;
  BoundingBox step(const Frame& frame) override;
  std::size_t oracle_calls() const override { return oracle_.calls(); }
  std::map<std::string, std::string> config_snapshot() const override;

 private:
  int stride_;
  double search_factor_;
  NccOracle oracle_;
  BoundingBox box_;
};

struct EvalReport {
  std::string tracker;
  std::string sequence;
  std::vector<int> frames;   // frame index of each trace entry
  std::vector<double> trace; // IOU per scored frame
  double mean_iou = 0.0;
  double std_iou = 0.0;      // population standard deviation
  std::size_t oracle_calls = 0;
  double wall_time_s = 0.0;
  bool complete = true;
  std::string error;
  std::map<std::string, std::string> config;

  void recompute_summary();
};

/// Initializes on frame 0's ground truth and scores frames 1..T-1. An oracle
/// failure stops the run and returns the partial trace flagged incomplete.
EvalReport run_eval(Tracker& tracker, const Sequence& seq);

EvalReport run_baseline_tm(const Sequence& seq, int stride = 1, double search_factor = 2.0);

enum class ReportFormat { Csv, Json };

struct ReportFile {
  std::string name;
  std::string contents;
};

/// CSV: one `<tracker>.csv` trace per report (`frame,iou`) and a
/// `summary.csv`; JSON: a single `report.json`. Floats carry 6 decimals.
std::vector<ReportFile> emit_report(const std::vector<EvalReport>& reports, ReportFormat format);

void write_report_files(const std::vector<ReportFile>& files, const std::string& dir);

/// Moving-peak benchmark settings (the synthetic end-to-end check).
struct DopBenchConfig {
  int frames = 50;
  double noise_sd = 0.0;
  Location velocity{0.02, 0.015};
  double peak_width = 0.08;
  std::uint64_t seed = 0;
  int field_size = kBruteForceGrid;
  SdbtaConfig sdbta;
};

struct DopFrameResult {
  int frame = 0;
  Location estimate{};
  Location truth{};
  double error = 0.0;  // Euclidean, unit-square units
  double best_value = 0.0;
};

struct DopBenchResult {
  std::vector<DopFrameResult> frames;
  double mean_error = 0.0;
  double cell_size = 0.0;  // lattice spacing over F(t)
  std::size_t oracle_calls = 0;
};

/// Peak start drawn from the seed inside [0.2, 0.8]^2.
MovingPeakParams dop_bench_peak(const DopBenchConfig& cfg);
DopBenchResult run_dop_benchmark(const DopBenchConfig& cfg);
std::string dop_bench_csv(const DopBenchResult& result);

}  // namespace dynbo
