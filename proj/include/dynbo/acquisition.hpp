#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "dynbo/gp.hpp"

namespace dynbo {

enum class AcquisitionKind { EI, PI, MSEI };

std::string_view to_string(AcquisitionKind kind);
AcquisitionKind parse_acquisition_kind(std::string_view name);

struct AcqConfig {
  AcquisitionKind kind = AcquisitionKind::MSEI;
  double alpha = 1.0;
  double q = 1.1;
  double fixed_xi = 0.01;  // EI and PI margin
  double xi_max = 20.0;    // MS-EI margin for degenerate score means (10x the NCC score range)
  // The MS-EI mean is taken over values minus this floor, so that it is
  // positive for any score inside the oracle range.
  double score_floor = 0.0;

  void validate() const;
};

struct Incumbent {
  double value = 0.0;
  Location location{};
};

/// Observations made in the current frame (the set D of the MS-EI schedule).
class SearchHistory {
 public:
  void record(const Location& location, double value);
  void clear();

  std::size_t n() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  const std::vector<Location>& locations() const { return locations_; }
  double mean() const;
  std::optional<Incumbent> incumbent() const;
  bool contains(const Location& location) const;

 private:
  std::vector<double> values_;
  std::vector<Location> locations_;
  std::set<Location> visited_;
  std::size_t best_ = 0;
};

double normal_pdf(double z) noexcept;
double normal_cdf(double z) noexcept;

/// Memory-score margin 1 / (alpha * (mean(D) - score_floor) * n^q). When that
/// mean is at or below 1e-6 the margin is xi_max instead.
double ms_ei_xi(const SearchHistory& history, const AcqConfig& cfg);

double expected_improvement(double mean, double sd, double incumbent, double xi);
double probability_of_improvement(double mean, double sd, double incumbent, double xi);

// Log-space forms, finite far into the tails where the direct forms underflow.
double log_expected_improvement(double mean, double sd, double incumbent, double xi);
double log_probability_of_improvement(double mean, double sd, double incumbent, double xi);

/// The margin the configured acquisition uses for the next selection. For
/// MS-EI with an empty history this is xi_max.
double exploration_margin(const SearchHistory& history, const AcqConfig& cfg);

/// Value of the configured acquisition in log space (EI, PI and MS-EI are
/// ranked by their logarithm; the argmax is unchanged).
double acquisition_score(AcquisitionKind kind, double mean, double sd, double incumbent, double xi);

struct Selection {
  std::size_t index = 0;
  Query query;
  double score = 0.0;
  bool fallback = false;  // every candidate was already sampled this frame
};

/// Incumbent used for the next acquisition: best observed value in D, or the
/// highest posterior mean over the candidates while D is empty.
double incumbent_value(const SearchHistory& history, std::span<const Prediction> predictions);

Selection select_from_predictions(std::span<const Query> candidates, std::span<const Prediction> predictions,
                                  const SearchHistory& history, const AcqConfig& cfg);

Selection select_next(const GpModel& model, std::span<const Query> candidates, const SearchHistory& history,
                      const AcqConfig& cfg);

}  // namespace dynbo
