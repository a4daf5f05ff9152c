#include "dynbo/tracker.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "dynbo/errors.hpp"

namespace dynbo {

void TrackerConfig::validate() const {
  if (budget_per_frame < 1) throw InvalidArgument("tracker.budget must be >= 1");
  if (grid_d < 2) throw InvalidArgument("tracker.grid_d must be >= 2");
  if (!(scale_p > 0.0 && scale_p < 0.5)) throw InvalidArgument("tracker.scale_p must lie in (0, 0.5)");
  if (!(search_factor > 0.0)) throw InvalidArgument("tracker.search_factor must be positive");
  if (window_frames < 1) throw InvalidArgument("tracker.window_frames must be >= 1");
  if (!(scale_damping >= 0.0 && scale_damping <= 1.0)) throw InvalidArgument("tracker.scale_damping must lie in [0, 1]");
}

void SdbtaConfig::validate() const {
  tracker.validate();
  gp.kernel.validate();
  acq.validate();
  if (!(gp.noise >= 0.0)) throw InvalidArgument("gp.noise must be nonnegative");
  if (gp.refit_every < 0) throw InvalidArgument("gp.refit_every must be >= 0");
  if (gp.fit_hyperparams && (gp.hyper_grid.spatial.empty() || gp.hyper_grid.temporal.empty()))
    throw InvalidArgument("hyperparameter grid has an empty range");
  if (tracker.budget_per_frame > tracker.grid_d * tracker.grid_d)
    throw InvalidArgument("tracker.budget exceeds the number of lattice cells");
}

Location to_normalized(const Rect& region, const Location& plane) {
  return {(plane[0] - region.x0) / region.width, (plane[1] - region.y0) / region.height};
}

Location to_plane(const Rect& region, const Location& normalized) {
  return {region.x0 + normalized[0] * region.width, region.y0 + normalized[1] * region.height};
}

std::vector<Query> lattice_queries(int d, double t) {
  std::vector<Query> q;
  q.reserve(static_cast<std::size_t>(d) * d);
  for (int row = 0; row < d; ++row)
    for (int col = 0; col < d; ++col) q.push_back({{(col + 0.5) / d, (row + 0.5) / d}, t});
  return q;
}

ScoreGrid render_score_grid(const GpModel& model, double t, const Rect& region, int d, double offset) {
  if (d < 2) throw InvalidArgument("score grid needs d >= 2");
  ScoreGrid grid{d, t, region, {}};
  const auto queries = lattice_queries(d, t);
  const auto preds = model.predict(queries);
  grid.values.reserve(preds.size());
  for (const auto& p : preds) grid.values.push_back(p.mean + offset);
  return grid;
}

namespace {

std::array<double, 4> catmull_rom_weights(double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return {0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0), 0.5 * (-3.0 * t3 + 4.0 * t2 + t),
          0.5 * (t3 - t2)};
}

// Grid value with linear extrapolation one column past each edge.
double node(const ScoreGrid& g, int col, int row) {
  const int d = g.d;
  if (col < 0) return 2.0 * g.at(0, row) - g.at(1, row);
  if (col >= d) return 2.0 * g.at(d - 1, row) - g.at(d - 2, row);
  return g.at(col, row);
}

// Lattice coordinate of an output pixel center, clamped to the node span.
std::pair<int, double> lattice_coord(int i, int out, int d) {
  const double g = std::clamp((i + 0.5) * d / out - 0.5, 0.0, d - 1.0);
  int k = static_cast<int>(std::floor(g));
  if (k >= d - 1) k = d - 2;
  return {k, g - k};
}

}  // namespace

Field upsample_bicubic(const ScoreGrid& grid, int out_w, int out_h) {
  if (grid.d < 2 || grid.values.size() != static_cast<std::size_t>(grid.d) * grid.d)
    throw InvalidArgument("upsample_bicubic: malformed score grid");
  if (out_w < grid.d || out_h < grid.d) throw InvalidArgument("upsample_bicubic: output smaller than the grid");
  for (double v : grid.values)
    if (!std::isfinite(v)) throw InvalidArgument("upsample_bicubic: non-finite grid value");

  // Separable pass: interpolate every lattice row along x, then along y.
  // Ghost rows extrapolate linearly, which commutes with the x pass.
  const int d = grid.d;
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(d) + 2, std::vector<double>(out_w));
  for (int x = 0; x < out_w; ++x) {
    const auto [kx, tx] = lattice_coord(x, out_w, d);
    const auto wx = catmull_rom_weights(tx);
    for (int r = 0; r < d; ++r) {
      double v = 0.0;
      for (int a = 0; a < 4; ++a) v += wx[a] * node(grid, kx - 1 + a, r);
      rows[static_cast<std::size_t>(r) + 1][x] = v;
    }
    rows[0][x] = 2.0 * rows[1][x] - rows[2][x];
    rows[static_cast<std::size_t>(d) + 1][x] = 2.0 * rows[static_cast<std::size_t>(d)][x] - rows[static_cast<std::size_t>(d) - 1][x];
  }

  Field f{out_w, out_h, grid.region, std::vector<double>(static_cast<std::size_t>(out_w) * out_h)};
  for (int y = 0; y < out_h; ++y) {
    const auto [ky, ty] = lattice_coord(y, out_h, d);
    const auto wy = catmull_rom_weights(ty);
    double* out = f.values.data() + static_cast<std::size_t>(y) * out_w;
    for (int b = 0; b < 4; ++b) {
      const std::vector<double>& src = rows[static_cast<std::size_t>(ky + b)];
      for (int x = 0; x < out_w; ++x) out[x] += wy[b] * src[x];
    }
  }
  return f;
}

Location field_argmax(const Field& field, const Location& previous) {
  if (field.values.empty()) throw InvalidArgument("field_argmax: empty field");
  double best = -std::numeric_limits<double>::infinity();
  double best_dist = std::numeric_limits<double>::infinity();
  Location where{};
  for (int y = 0; y < field.height; ++y) {
    for (int x = 0; x < field.width; ++x) {
      const double v = field.at(x, y);
      if (!std::isfinite(v)) throw InvalidArgument("field_argmax: non-finite field value");
      if (v < best) continue;
      const Location p = field.plane(x, y);
      const double dist = std::hypot(p[0] - previous[0], p[1] - previous[1]);
      if (v > best || dist < best_dist) {
        best = v;
        best_dist = dist;
        where = p;
      }
    }
  }
  return where;
}

double best_scale_mode(std::span<const TripletScore> triplets) {
  if (triplets.empty()) return 1.0;
  const double p = triplets.front().p;
  std::array<int, 3> counts{};  // 1-p, 1, 1+p
  for (const auto& t : triplets) {
    if (t.best_scale < 1.0)
      ++counts[0];
    else if (t.best_scale > 1.0)
      ++counts[2];
    else
      ++counts[1];
  }
  if (counts[1] >= counts[0] && counts[1] >= counts[2]) return 1.0;
  return counts[0] >= counts[2] ? 1.0 - p : 1.0 + p;
}

BoundingBox update_location(const Field& field, const BoundingBox& previous, std::span<const TripletScore> triplets,
                            double scale_damping, double frame_width, double frame_height) {
  const Location c = field_argmax(field, {previous.cx, previous.cy});
  const double vote = best_scale_mode(triplets);
  const double factor = 1.0 + scale_damping * (vote - 1.0);
  BoundingBox box{c[0], c[1], previous.width * factor, previous.height * factor};
  box.cx = std::clamp(box.cx, 0.0, frame_width);
  box.cy = std::clamp(box.cy, 0.0, frame_height);
  box.width = std::clamp(box.width, 1.0, std::max(1.0, frame_width));
  box.height = std::clamp(box.height, 1.0, std::max(1.0, frame_height));
  return box;
}

DynamicBayesOpt::DynamicBayesOpt(SdbtaConfig cfg, double prior_mean, double score_floor)
    : cfg_(std::move(cfg)), prior_mean_(prior_mean), kernel_(cfg_.gp.kernel) {
  cfg_.validate();
  if (!std::isfinite(prior_mean)) throw InvalidArgument("prior mean must be finite");
  if (!std::isfinite(score_floor)) throw InvalidArgument("score floor must be finite");
  // History values are stored relative to the prior mean.
  cfg_.acq.score_floor = score_floor - prior_mean;
}

std::vector<Sample> DynamicBayesOpt::normalized_samples(const Rect& region) const {
  std::vector<Sample> out;
  out.reserve(memory_.size());
  for (const auto& m : memory_) out.push_back({to_normalized(region, m.position), m.time, m.scale, m.value - prior_mean_});
  return out;
}

void DynamicBayesOpt::maybe_fit_hyperparams(const Rect& region) {
  if (!cfg_.gp.fit_hyperparams) return;
  const int every = cfg_.gp.refit_every;
  const bool due = !fitted_ ? frames_done_ >= cfg_.tracker.window_frames
                            : every > 0 && frames_done_ % every == 0;
  if (!due) return;
  const auto samples = normalized_samples(region);
  bool two_times = false;
  for (const auto& s : samples) two_times = two_times || s.time != samples.front().time;
  if (samples.size() < 5 || !two_times) return;
  const Lengthscales ls = fit_hyperparams(samples, cfg_.gp.hyper_grid, kernel_, cfg_.gp.noise);
  kernel_.spatial.lengthscale = ls.spatial;
  kernel_.temporal.lengthscale = ls.temporal;
  fitted_ = true;
}

FrameOutcome DynamicBayesOpt::run_frame(int t, const Rect& region, const Evaluator& evaluate, const Location& previous,
                                        int field_w, int field_h) {
  if (!evaluate) throw InvalidArgument("run_frame needs an evaluator");
  if (!(region.width > 0.0 && region.height > 0.0)) throw InvalidArgument("search region must have positive size");
  const auto& tc = cfg_.tracker;
  const int d = tc.grid_d;

  std::erase_if(memory_, [&](const MemorySample& m) { return m.time <= t - tc.window_frames; });

  const auto candidates = lattice_queries(d, t);
  OnlineGp posterior(kernel_, cfg_.gp.noise, candidates);
  if (!cfg_.random_sampling) posterior.reset(normalized_samples(region));

  FrameOutcome out;
  out.time = t;
  out.region = region;
  SearchHistory history;
  std::mt19937_64 rng(cfg_.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(t));
  std::vector<std::size_t> unsampled(candidates.size());
  for (std::size_t i = 0; i < unsampled.size(); ++i) unsampled[i] = i;

  for (int j = 0; j < tc.budget_per_frame; ++j) {
    std::size_t index;
    if (cfg_.random_sampling) {
      std::uniform_int_distribution<std::size_t> pick(0, unsampled.size() - 1);
      const std::size_t k = pick(rng);
      index = unsampled[k];
      unsampled.erase(unsampled.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
      index = select_from_predictions(candidates, posterior.predictions(), history, cfg_.acq).index;
    }
    const Location& normalized = candidates[index].location;
    const Location plane = to_plane(region, normalized);
    const TripletScore triplet = evaluate(plane);
    const double value = triplet.best();

    history.record(normalized, value - prior_mean_);
    memory_.push_back({plane, t, triplet.best_scale, value});
    // Random selection never reads the posterior, so it is built once below.
    if (!cfg_.random_sampling) posterior.add({normalized, t, triplet.best_scale, value - prior_mean_});

    out.queried.push_back(plane);
    out.triplets.push_back(triplet);
    out.best_value = j == 0 ? value : std::max(out.best_value, value);
    ++out.selections;
  }

  if (cfg_.random_sampling) posterior.reset(normalized_samples(region));
  // The online posterior already sits on the lattice, so it is the score grid.
  out.grid = ScoreGrid{d, static_cast<double>(t), region, {}};
  out.grid.values.reserve(candidates.size());
  for (const double m : posterior.means()) out.grid.values.push_back(m + prior_mean_);
  out.field = upsample_bicubic(out.grid, std::max(field_w, d), std::max(field_h, d));
  out.estimate = field_argmax(out.field, previous);
  out.scale_vote = best_scale_mode(out.triplets);

  ++frames_done_;
  maybe_fit_hyperparams(region);
  return out;
}

SdbtaTracker::SdbtaTracker(SimilarityOracle& oracle, SdbtaConfig cfg) : oracle_(oracle), cfg_(std::move(cfg)) {
  cfg_.validate();
}

Rect SdbtaTracker::search_region(const BoundingBox& box, double search_factor, int frame_w, int frame_h) {
  const double half = search_factor * std::max(box.width, box.height);
  auto axis = [half](double center, double extent) -> std::pair<double, double> {
    double lo = center - half;
    double hi = center + half;
    if (hi - lo >= extent) return {0.0, extent};
    if (lo < 0.0) {
      hi -= lo;
      lo = 0.0;
    }
    if (hi > extent) {
      lo -= hi - extent;
      hi = extent;
    }
    return {lo, hi};
  };
  const auto [x0, x1] = axis(box.cx, frame_w);
  const auto [y0, y1] = axis(box.cy, frame_h);
  return {x0, y0, x1 - x0, y1 - y0};
}

void SdbtaTracker::init(const Frame& first_frame, const BoundingBox& gt_box) {
  const Image& img = first_frame.image;
  if (img.empty()) throw InvalidArgument("tracker init needs a non-empty first frame");
  if (!(gt_box.width > 0.0 && gt_box.height > 0.0)) throw InvalidArgument("ground-truth box must have positive size");
  if (gt_box.cx < 0.0 || gt_box.cy < 0.0 || gt_box.cx > img.width || gt_box.cy > img.height)
    throw InvalidArgument("ground-truth box center lies outside the first frame");
  oracle_.set_exemplar(first_frame, gt_box);
  frame_w_ = img.width;
  frame_h_ = img.height;
  box_ = gt_box;
  frame_index_ = first_frame.index;
  SdbtaConfig cfg = cfg_;
  bo_.emplace(std::move(cfg), cfg_.gp.prior_mean.value_or(oracle_.range().midpoint()), oracle_.range().lo);
  last_.reset();
}

BoundingBox SdbtaTracker::step(const Frame& frame) {
  if (!bo_) throw InvalidArgument("tracker step before init");
  if (frame.image.width != frame_w_ || frame.image.height != frame_h_)
    throw InvalidArgument("frame dimensions differ from the first frame");
  if (frame.index <= frame_index_) throw InvalidArgument("frames must be stepped in increasing index order");

  const auto& tc = cfg_.tracker;
  const Rect region = search_region(box_, tc.search_factor, frame_w_, frame_h_);
  if (region.width < 2.0 || region.height < 2.0) throw InvalidArgument("search region degenerated below 2x2 pixels");

  const BoundingBox current = box_;
  auto evaluate = [&](const Location& p) {
    return triplet_score(oracle_, frame, current.moved_to(p[0], p[1]), tc.scale_p);
  };
  const int field_w = static_cast<int>(std::lround(region.width));
  const int field_h = static_cast<int>(std::lround(region.height));
  FrameOutcome outcome = bo_->run_frame(frame.index, region, evaluate, {box_.cx, box_.cy}, field_w, field_h);

  box_ = update_location(outcome.field, box_, outcome.triplets, tc.scale_damping, frame_w_, frame_h_);
  frame_index_ = frame.index;
  last_ = std::move(outcome);
  return box_;
}

TrackerState SdbtaTracker::state() const {
  TrackerState s;
  s.current_box = box_;
  s.frame_index = frame_index_;
  if (bo_) {
    s.memory = bo_->memory();
    s.lengthscales = {bo_->kernel().spatial.lengthscale, bo_->kernel().temporal.lengthscale};
    s.lengthscales_fitted = bo_->hyperparams_fitted();
  }
  return s;
}

}  // namespace dynbo
