#include "dynbo/dop.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "dynbo/errors.hpp"

namespace dynbo {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t noise_key(std::uint64_t seed, const Location& x, int t) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ std::bit_cast<std::uint64_t>(x[0]));
  h = splitmix(h ^ std::bit_cast<std::uint64_t>(x[1]));
  return splitmix(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(t)));
}

}  // namespace

void MovingPeakParams::validate() const {
  if (!(peak_width > 0.0)) throw InvalidArgument("peak_width must be positive");
  if (!(peak_height > 0.0)) throw InvalidArgument("peak_height must be positive");
  if (!(noise_sd >= 0.0)) throw InvalidArgument("noise_sd must be nonnegative");
  if (!kUnitSquare.contains(start)) throw InvalidArgument("peak start must lie in the unit square");
  if (!std::isfinite(velocity[0]) || !std::isfinite(velocity[1])) throw InvalidArgument("velocity must be finite");
}

double reflect_unit(double x) noexcept {
  double m = std::fmod(x, 2.0);
  if (m < 0.0) m += 2.0;
  return m > 1.0 ? 2.0 - m : m;
}

MovingPeak::MovingPeak(MovingPeakParams params, int horizon) : params_(params), horizon_(horizon) {
  params_.validate();
  if (horizon < 1) throw InvalidArgument("horizon must be at least 1");
}

Location MovingPeak::center(int t) const {
  if (t < 0 || t >= horizon_) throw InvalidArgument("frame " + std::to_string(t) + " outside the horizon");
  return {reflect_unit(params_.start[0] + params_.velocity[0] * t),
          reflect_unit(params_.start[1] + params_.velocity[1] * t)};
}

double MovingPeak::latent(const Location& x, int t) const {
  const Location c = center(t);
  const double dx = x[0] - c[0];
  const double dy = x[1] - c[1];
  const double w = params_.peak_width;
  return params_.peak_height * std::exp(-(dx * dx + dy * dy) / (2.0 * w * w));
}

double MovingPeak::evaluate(const Location& x, int t) const {
  const double f = latent(x, t);
  if (params_.noise_sd == 0.0) return f;
  std::mt19937_64 rng(noise_key(params_.seed, x, t));
  std::normal_distribution<double> noise(0.0, params_.noise_sd);
  return f + noise(rng);
}

FunctionObjective::FunctionObjective(Fn fn, int horizon, Rect bounds)
    : fn_(std::move(fn)), horizon_(horizon), bounds_(bounds) {
  if (!fn_) throw InvalidArgument("objective function is empty");
  if (horizon < 1) throw InvalidArgument("horizon must be at least 1");
}

MovingPeak make_moving_peak(const MovingPeakParams& params, int horizon) { return MovingPeak(params, horizon); }

Location true_argmax(const DynamicObjective& objective, int t) {
  if (t < 0 || t >= objective.horizon())
    throw InvalidArgument("frame " + std::to_string(t) + " outside the horizon");
  if (auto c = objective.analytic_argmax(t)) return *c;

  const Rect bounds = objective.bounds(t);
  Location best{bounds.x0, bounds.y0};
  double best_value = -std::numeric_limits<double>::infinity();
  auto scan = [&](const Rect& r, int n) {
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        const Location p{r.x0 + i * r.width / n, r.y0 + j * r.height / n};
        if (!bounds.contains(p)) continue;
        const double v = objective.evaluate(p, t);
        if (v > best_value) {
          best_value = v;
          best = p;
        }
      }
    }
  };
  for (int j = 0; j < kBruteForceGrid; ++j) {
    for (int i = 0; i < kBruteForceGrid; ++i) {
      const Location p{bounds.x0 + (i + 0.5) * bounds.width / kBruteForceGrid,
                       bounds.y0 + (j + 0.5) * bounds.height / kBruteForceGrid};
      const double v = objective.evaluate(p, t);
      if (v > best_value) {
        best_value = v;
        best = p;
      }
    }
  }
  // Zoom on the winning cell so the result is not limited to lattice resolution.
  double hw = bounds.width / kBruteForceGrid;
  double hh = bounds.height / kBruteForceGrid;
  for (int level = 0; level < 12; ++level) {
    scan(Rect{best[0] - hw, best[1] - hh, 2.0 * hw, 2.0 * hh}, 16);
    hw /= 8.0;
    hh /= 8.0;
  }
  return best;
}

}  // namespace dynbo
