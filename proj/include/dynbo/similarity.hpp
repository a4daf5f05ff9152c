#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string>

#include "dynbo/dop.hpp"
#include "dynbo/geometry.hpp"
#include "dynbo/image.hpp"

namespace dynbo {

/// A video frame as seen by an oracle. `image` may be empty for oracles that
/// do not look at pixels; `path` is what the external service loads.
struct Frame {
  int index = 0;
  std::string path;
  Image image;
};

struct ScoreRange {
  double lo = -1.0;
  double hi = 1.0;
  double midpoint() const { return 0.5 * (lo + hi); }
  double span() const { return hi - lo; }
};

/// f(z, x): similarity between the exemplar z and the crop x at `box` scaled
/// by `scale` about its center. Implementations must be deterministic per
/// (frame, box, scale) and stay inside range().
class SimilarityOracle {
 public:
  virtual ~SimilarityOracle() = default;

  virtual ScoreRange range() const = 0;
  virtual void set_exemplar(const Frame& frame, const BoundingBox& box) = 0;

  double score(const Frame& frame, const BoundingBox& box, double scale) {
    ++calls_;
    return do_score(frame, box, scale);
  }

  std::size_t calls() const { return calls_; }
  void reset_calls() { calls_ = 0; }

 protected:
  virtual double do_score(const Frame& frame, const BoundingBox& box, double scale) = 0;

 private:
  std::size_t calls_ = 0;
};

/// Zero-mean normalized cross-correlation of two equally sized images.
/// Returns 0 when either input has zero variance.
double ncc_score(const Image& templ, const Image& patch);

/// Crops `box` from `frame` and resamples it bilinearly to out_w x out_h.
/// Samples falling outside the frame take the frame's mean intensity.
Image extract_patch(const Image& frame, const BoundingBox& box, int out_w, int out_h);

/// Template matching on grayscale crops resampled to a fixed template size.
class NccOracle final : public SimilarityOracle {
 public:
  static constexpr int kTemplateSize = 64;

  explicit NccOracle(int template_size = kTemplateSize);

  ScoreRange range() const override { return {-1.0, 1.0}; }
  void set_exemplar(const Frame& frame, const BoundingBox& box) override;
  const Image& exemplar() const { return exemplar_; }

 protected:
  double do_score(const Frame& frame, const BoundingBox& box, double scale) override;

 private:
  int size_;
  Image exemplar_;
};

/// Scores a dynamic objective directly: the box center is the location in
/// the unit square and the frame index is the time. Scale is ignored.
class DopOracle final : public SimilarityOracle {
 public:
  DopOracle(std::shared_ptr<const DynamicObjective> objective, ScoreRange range);

  ScoreRange range() const override { return range_; }
  void set_exemplar(const Frame&, const BoundingBox&) override {}

 protected:
  double do_score(const Frame& frame, const BoundingBox& box, double scale) override;

 private:
  std::shared_ptr<const DynamicObjective> objective_;
  ScoreRange range_;
};

struct TripletScore {
  std::array<double, 3> scores{};  // at scales 1-p, 1, 1+p
  double best_scale = 1.0;
  double p = 0.05;

  double best() const;
  std::array<double, 3> scales() const { return {1.0 - p, 1.0, 1.0 + p}; }
};

/// Scores `box` at scales {1-p, 1, 1+p}; exactly three oracle calls. Ties
/// resolve to scale 1, then to the smaller scale.
TripletScore triplet_score(SimilarityOracle& oracle, const Frame& frame, const BoundingBox& box, double p);

}  // namespace dynbo
