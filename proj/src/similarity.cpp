#include "dynbo/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dynbo/errors.hpp"

namespace dynbo {

double ncc_score(const Image& templ, const Image& patch) {
  if (templ.width != patch.width || templ.height != patch.height)
    throw InvalidArgument("ncc_score: template and patch dimensions differ");
  if (templ.pixels.empty()) return 0.0;
  const double ma = templ.mean();
  const double mb = patch.mean();
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < templ.pixels.size(); ++i) {
    const double a = templ.pixels[i] - ma;
    const double b = patch.pixels[i] - mb;
    sab += a * b;
    saa += a * a;
    sbb += b * b;
  }
  // Relative floor: rounding noise on a constant image must not read as texture.
  const double n = static_cast<double>(templ.pixels.size());
  if (saa <= 1e-24 * n || sbb <= 1e-24 * n) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

Image extract_patch(const Image& frame, const BoundingBox& box, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw InvalidArgument("extract_patch: output dimensions must be >= 1");
  if (!(box.width > 0.0 && box.height > 0.0)) throw InvalidArgument("extract_patch: box must have positive size");
  if (frame.empty()) throw InvalidArgument("extract_patch: empty frame");
  if (box.right() <= 0.0 || box.bottom() <= 0.0 || box.left() >= frame.width || box.top() >= frame.height)
    throw InvalidArgument("extract_patch: box lies entirely outside the frame");

  // Bilinear taps per output column and row. Pixel centers sit at integer + 0.5.
  struct Tap {
    int i0, i1;
    double a;
    bool outside;
  };
  auto taps = [](double origin, double step, int count, int extent) {
    std::vector<Tap> t(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
      const double p = origin + (k + 0.5) * step;
      const double f = std::clamp(p - 0.5, 0.0, extent - 1.0);
      const int i0 = static_cast<int>(f);
      t[static_cast<std::size_t>(k)] = {i0, std::min(i0 + 1, extent - 1), f - i0, p < 0.0 || p > extent};
    }
    return t;
  };
  const auto xs = taps(box.left(), box.width / out_w, out_w, frame.width);
  const auto ys = taps(box.top(), box.height / out_h, out_h, frame.height);

  // Frame mean is only needed when a sample falls outside.
  double pad = std::numeric_limits<double>::quiet_NaN();
  Image out(out_w, out_h);
  const double* src = frame.pixels.data();
  const auto w = static_cast<std::size_t>(frame.width);
  for (int j = 0; j < out_h; ++j) {
    const Tap& ty = ys[static_cast<std::size_t>(j)];
    const double* r0 = src + static_cast<std::size_t>(ty.i0) * w;
    const double* r1 = src + static_cast<std::size_t>(ty.i1) * w;
    double* dst = out.pixels.data() + static_cast<std::size_t>(j) * out_w;
    for (int i = 0; i < out_w; ++i) {
      const Tap& tx = xs[static_cast<std::size_t>(i)];
      if (tx.outside || ty.outside) {
        if (std::isnan(pad)) pad = frame.mean();
        dst[i] = pad;
        continue;
      }
      const double top = r0[tx.i0] * (1.0 - tx.a) + r0[tx.i1] * tx.a;
      const double bottom = r1[tx.i0] * (1.0 - tx.a) + r1[tx.i1] * tx.a;
      dst[i] = top * (1.0 - ty.a) + bottom * ty.a;
    }
  }
  return out;
}

NccOracle::NccOracle(int template_size) : size_(template_size) {
  if (template_size < 2) throw InvalidArgument("template size must be at least 2");
}

void NccOracle::set_exemplar(const Frame& frame, const BoundingBox& box) {
  exemplar_ = extract_patch(frame.image, box, size_, size_);
}

double NccOracle::do_score(const Frame& frame, const BoundingBox& box, double scale) {
  if (exemplar_.empty()) throw OracleError("NCC oracle has no exemplar");
  const BoundingBox scaled = box.scaled(scale);
  if (scaled.right() <= 0.0 || scaled.bottom() <= 0.0 || scaled.left() >= frame.image.width ||
      scaled.top() >= frame.image.height)
    return 0.0;
  return ncc_score(exemplar_, extract_patch(frame.image, scaled, size_, size_));
}

DopOracle::DopOracle(std::shared_ptr<const DynamicObjective> objective, ScoreRange range)
    : objective_(std::move(objective)), range_(range) {
  if (!objective_) throw InvalidArgument("DopOracle needs an objective");
  if (!(range.hi > range.lo)) throw InvalidArgument("score range must satisfy lo < hi");
}

double DopOracle::do_score(const Frame& frame, const BoundingBox& box, double) {
  return std::clamp(objective_->evaluate({box.cx, box.cy}, frame.index), range_.lo, range_.hi);
}

double TripletScore::best() const { return *std::max_element(scores.begin(), scores.end()); }

TripletScore triplet_score(SimilarityOracle& oracle, const Frame& frame, const BoundingBox& box, double p) {
  if (!(p > 0.0 && p < 0.5)) throw InvalidArgument("triplet scale step p must lie in (0, 0.5)");
  TripletScore t;
  t.p = p;
  const auto scales = t.scales();
  for (std::size_t i = 0; i < 3; ++i) t.scores[i] = oracle.score(frame, box, scales[i]);
  const double best = t.best();
  if (t.scores[1] == best)
    t.best_scale = 1.0;
  else
    t.best_scale = t.scores[0] == best ? scales[0] : scales[2];
  return t;
}

}  // namespace dynbo
