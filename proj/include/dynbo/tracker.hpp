#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dynbo/acquisition.hpp"
#include "dynbo/dop.hpp"
#include "dynbo/geometry.hpp"
#include "dynbo/gp.hpp"
#include "dynbo/similarity.hpp"

namespace dynbo {

struct TrackerConfig {
  int budget_per_frame = 80;
  int grid_d = 20;
  double scale_p = 0.05;
  double search_factor = 2.0;  // search half-width as a multiple of max(w, h)
  int window_frames = 3;       // GP memory keeps the most recent W frames
  double scale_damping = 0.5;

  void validate() const;
};

struct GpSettings {
  SpatioTemporalKernel kernel;
  double noise = 1e-4;
  // Scores are shifted by this before fitting; defaults to the oracle range midpoint.
  std::optional<double> prior_mean;
  HyperGrid hyper_grid;
  bool fit_hyperparams = true;
  int refit_every = 0;  // 0: fit once after the first W frames, then freeze
};

struct SdbtaConfig {
  TrackerConfig tracker;
  GpSettings gp;
  AcqConfig acq;
  // Uniformly random lattice sampling instead of the acquisition (benchmark baseline).
  bool random_sampling = false;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Maps between plane coordinates (pixels, or the unit square for synthetic
/// objectives) and normalized [0,1]^2 search coordinates.
Location to_normalized(const Rect& region, const Location& plane);
Location to_plane(const Rect& region, const Location& normalized);

/// d x d posterior means over the cell centers of `region` at one time slice.
struct ScoreGrid {
  int d = 0;
  double time = 0.0;
  Rect region;
  std::vector<double> values;  // row-major, row index along y

  double at(int col, int row) const { return values[static_cast<std::size_t>(row) * d + col]; }
  Location cell_normalized(int col, int row) const { return {(col + 0.5) / d, (row + 0.5) / d}; }
  Location cell_plane(int col, int row) const { return to_plane(region, cell_normalized(col, row)); }
};

/// Dense field over the search region, one value per output pixel.
struct Field {
  int width = 0;
  int height = 0;
  Rect region;
  std::vector<double> values;

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  Location plane(int x, int y) const {
    return {region.x0 + (x + 0.5) * region.width / width, region.y0 + (y + 0.5) * region.height / height};
  }
};

/// Lattice queries (cell centers of a d x d grid, normalized) at time t.
std::vector<Query> lattice_queries(int d, double t);

/// Posterior mean of `model` on the d x d lattice of `region`. The model is
/// expected in coordinates normalized to `region`; `offset` is added back to
/// every value (the prior-mean shift).
ScoreGrid render_score_grid(const GpModel& model, double t, const Rect& region, int d, double offset = 0.0);

/// Catmull-Rom bicubic upsampling. Output pixel centers are mapped onto the
/// lattice of cell centers; positions beyond the outermost centers clamp to
/// the edge, and the outermost spans use linearly extrapolated ghost nodes so
/// linear data is reproduced exactly.
Field upsample_bicubic(const ScoreGrid& grid, int out_w, int out_h);

/// Plane location of the field maximum. Ties go to the pixel nearest
/// `previous`, then to the lowest index.
Location field_argmax(const Field& field, const Location& previous);

/// Most frequent best_scale over the triplets; ties prefer 1, then the smaller scale.
double best_scale_mode(std::span<const TripletScore> triplets);

/// Recenters the box on the field maximum, applies the damped scale vote and
/// clamps the result to the frame.
BoundingBox update_location(const Field& field, const BoundingBox& previous, std::span<const TripletScore> triplets,
                            double scale_damping, double frame_width, double frame_height);

/// Sample kept in tracker memory, in plane coordinates with the raw score.
struct MemorySample {
  Location position{};
  int time = 0;
  double scale = 1.0;
  double value = 0.0;
};

struct FrameOutcome {
  int time = 0;
  Rect region;
  ScoreGrid grid;
  Field field;
  Location estimate{};
  std::vector<Location> queried;  // plane coordinates, in query order
  std::vector<TripletScore> triplets;
  double best_value = 0.0;  // best raw score observed this frame
  double scale_vote = 1.0;
  std::size_t selections = 0;
};

/// The per-frame Bayesian optimization loop: select on the lattice, score,
/// update the posterior; then render, upsample and take the argmax.
class DynamicBayesOpt {
 public:
  using Evaluator = std::function<TripletScore(const Location& plane_point)>;

  /// `score_floor` is the lowest score the oracle can return.
  DynamicBayesOpt(SdbtaConfig cfg, double prior_mean, double score_floor);

  FrameOutcome run_frame(int t, const Rect& region, const Evaluator& evaluate, const Location& previous, int field_w,
                         int field_h);

  const std::deque<MemorySample>& memory() const { return memory_; }
  const SpatioTemporalKernel& kernel() const { return kernel_; }
  bool hyperparams_fitted() const { return fitted_; }
  double prior_mean() const { return prior_mean_; }

  /// Memory normalized to `region` and shifted by the prior mean.
  std::vector<Sample> normalized_samples(const Rect& region) const;

 private:
  void maybe_fit_hyperparams(const Rect& region);

  SdbtaConfig cfg_;
  double prior_mean_;
  SpatioTemporalKernel kernel_;
  std::deque<MemorySample> memory_;
  int frames_done_ = 0;
  bool fitted_ = false;
};

struct TrackerState {
  BoundingBox current_box;
  int frame_index = 0;
  std::deque<MemorySample> memory;
  Lengthscales lengthscales;
  bool lengthscales_fitted = false;
};

/// Video tracker: a DynamicBayesOpt over the pixel plane with a square search
/// region around the previous box.
class SdbtaTracker {
 public:
  SdbtaTracker(SimilarityOracle& oracle, SdbtaConfig cfg);

  void init(const Frame& first_frame, const BoundingBox& gt_box);
  BoundingBox step(const Frame& frame);

  TrackerState state() const;
  const BoundingBox& box() const { return box_; }
  const std::optional<FrameOutcome>& last_outcome() const { return last_; }
  const SdbtaConfig& config() const { return cfg_; }
  SimilarityOracle& oracle() { return oracle_; }

  /// Square search window of half-width search_factor * max(w, h) around the
  /// box, shifted inside the frame and cropped if larger than it.
  static Rect search_region(const BoundingBox& box, double search_factor, int frame_w, int frame_h);

 private:
  SimilarityOracle& oracle_;
  SdbtaConfig cfg_;
  std::optional<DynamicBayesOpt> bo_;
  BoundingBox box_;
  int frame_index_ = 0;
  int frame_w_ = 0;
  int frame_h_ = 0;
  std::optional<FrameOutcome> last_;
};

}  // namespace dynbo
