#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

#include "dynbo/kernels.hpp"

namespace dynbo {

/// Axis-aligned rectangle [x0, x0+width] x [y0, y0+height].
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double width = 1.0;
  double height = 1.0;

  bool contains(const Location& p) const {
    return p[0] >= x0 && p[0] <= x0 + width && p[1] >= y0 && p[1] <= y0 + height;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

inline constexpr Rect kUnitSquare{0.0, 0.0, 1.0, 1.0};

/// max f(x, t) subject to x in F(t), for t in [0, horizon).
class DynamicObjective {
 public:
  virtual ~DynamicObjective() = default;

  virtual double evaluate(const Location& x, int t) const = 0;
  // Feasible region F(t); must lie inside the unit square.
  virtual Rect bounds(int t) const { (void)t; return kUnitSquare; }
  virtual int horizon() const = 0;
  // Closed-form maximizer when one is known.
  virtual std::optional<Location> analytic_argmax(int t) const { (void)t; return std::nullopt; }
};

struct MovingPeakParams {
  Location start{0.5, 0.5};
  Location velocity{0.0, 0.0};  // per frame
  double peak_width = 0.08;
  double peak_height = 1.0;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Single Gaussian bump whose center moves linearly and reflects off the
/// unit-square walls. Observation noise is keyed on (seed, x, t), so repeated
/// queries of the same point return the same value.
class MovingPeak final : public DynamicObjective {
 public:
  MovingPeak(MovingPeakParams params, int horizon);

  double evaluate(const Location& x, int t) const override;
  int horizon() const override { return horizon_; }
  std::optional<Location> analytic_argmax(int t) const override { return center(t); }

  Location center(int t) const;
  double latent(const Location& x, int t) const;
  const MovingPeakParams& params() const { return params_; }

 private:
  MovingPeakParams params_;
  int horizon_;
};

/// Wraps an arbitrary callable; the argmax is found by brute force.
class FunctionObjective final : public DynamicObjective {
 public:
  using Fn = std::function<double(const Location&, int)>;
  FunctionObjective(Fn fn, int horizon, Rect bounds = kUnitSquare);

  double evaluate(const Location& x, int t) const override { return fn_(x, t); }
  Rect bounds(int) const override { return bounds_; }
  int horizon() const override { return horizon_; }

 private:
  Fn fn_;
  int horizon_;
  Rect bounds_;
};

MovingPeak make_moving_peak(const MovingPeakParams& params, int horizon);

/// Reflects a coordinate into [0, 1] (mirror at both walls).
double reflect_unit(double x) noexcept;

/// Location of the maximum at frame t: analytic when available, otherwise the
/// best cell center of a 200x200 lattice over F(t), refined by zooming in on
/// the neighbourhood of that cell.
Location true_argmax(const DynamicObjective& objective, int t);

inline constexpr int kBruteForceGrid = 200;

}  // namespace dynbo
