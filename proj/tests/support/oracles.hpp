#pragma once

// Reference computations used by the unit and acceptance tests. They share no
// code with the library beyond plain data types.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "dynbo/acquisition.hpp"
#include "dynbo/gp.hpp"

namespace oracle {

inline long double std_normal_pdf(long double z) {
  return std::exp(-0.5L * z * z) / std::sqrt(2.0L * 3.14159265358979323846264338327950288L);
}

/// Standard normal CDF by composite Simpson quadrature of the density from 0.
inline double std_normal_cdf_simpson(double z, int intervals = 2000) {
  const long double h = static_cast<long double>(z) / intervals;
  long double sum = std_normal_pdf(0.0L) + std_normal_pdf(z);
  for (int i = 1; i < intervals; ++i) sum += (i % 2 ? 4.0L : 2.0L) * std_normal_pdf(i * h);
  return static_cast<double>(0.5L + sum * h / 3.0L);
}

inline long double std_normal_cdf(long double z) { return 0.5L * std::erfc(-z / std::sqrt(2.0L)); }

/// EI and PI evaluated directly in extended precision.
inline long double ei(double mean, double sd, double best, double xi) {
  const long double imp = static_cast<long double>(mean) - best - xi;
  if (sd == 0.0) return imp > 0 ? imp : 0.0L;
  const long double z = imp / sd;
  return imp * std_normal_cdf(z) + sd * std_normal_pdf(z);
}

inline long double pi(double mean, double sd, double best, double xi) {
  const long double imp = static_cast<long double>(mean) - best - xi;
  if (sd == 0.0) return imp > 0 ? 1.0L : 0.0L;
  return std_normal_cdf(imp / sd);
}

/// The MS-EI margin written out term by term.
inline double ms_ei_xi(std::span<const double> values, double alpha, double q, double floor = 0.0) {
  long double sum = 0.0L;
  for (double v : values) sum += static_cast<long double>(v) - floor;
  const long double mean = sum / values.size();
  return static_cast<double>(1.0L / (alpha * mean * std::pow(static_cast<long double>(values.size()), q)));
}

/// Exhaustive re-evaluation of the acquisition over every candidate not yet
/// in `history`; ties keep the lowest index. `preds` must come from an
/// independent posterior computation.
inline std::size_t exhaustive_argmax(std::span<const dynbo::Query> candidates, std::span<const dynbo::Prediction> preds,
                                     const dynbo::SearchHistory& history, const dynbo::AcqConfig& cfg) {
  double xi = cfg.fixed_xi;
  if (cfg.kind == dynbo::AcquisitionKind::MSEI) {
    if (history.n() == 0) {
      xi = cfg.xi_max;
    } else {
      long double sum = 0.0L;
      for (double v : history.values()) sum += static_cast<long double>(v) - cfg.score_floor;
      xi = sum / history.n() <= 1e-6 ? cfg.xi_max : ms_ei_xi(history.values(), cfg.alpha, cfg.q, cfg.score_floor);
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  if (history.n() > 0) {
    for (double v : history.values()) best = std::max(best, v);
  } else {
    for (const auto& p : preds) best = std::max(best, p.mean);
  }
  std::size_t arg = candidates.size();
  long double top = -1.0L;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    bool seen = false;
    for (const auto& l : history.locations()) seen = seen || l == candidates[i].location;
    if (seen) continue;
    const double sd = std::sqrt(preds[i].variance);
    const long double a = cfg.kind == dynbo::AcquisitionKind::PI ? pi(preds[i].mean, sd, best, xi)
                                                                  : ei(preds[i].mean, sd, best, xi);
    if (arg == candidates.size() || a > top) {
      arg = i;
      top = a;
    }
  }
  return arg;
}

}  // namespace oracle
