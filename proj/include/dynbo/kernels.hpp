#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>

namespace dynbo {

enum class MaternFamily { Matern12, Matern32, Matern52 };

std::string_view to_string(MaternFamily family);
MaternFamily parse_matern_family(std::string_view name);

/// One stationary Matérn covariance. `lengthscale` is in the units of the
/// coordinate it acts on (normalized search units for space, frames for time).
struct KernelSpec {
  MaternFamily family = MaternFamily::Matern52;
  double variance = 1.0;
  double lengthscale = 1.0;

  void validate() const;
};

/// Covariance at distance `r >= 0`. Throws InvalidArgument on a non-finite or
/// negative distance and on an invalid spec.
double kernel_eval(const KernelSpec& spec, double r);

// Unchecked variant for inner loops; `spec` must already be validated.
double matern(const KernelSpec& spec, double r) noexcept;

using Location = std::array<double, 2>;

/// Separable space-time covariance K_S(x,x') * K_T(t,t').
struct SpatioTemporalKernel {
  KernelSpec spatial{MaternFamily::Matern52, 1.0, 0.2};
  KernelSpec temporal{MaternFamily::Matern52, 1.0, 2.0};

  void validate() const;

  double prior_variance() const noexcept { return spatial.variance * temporal.variance; }

  double operator()(const Location& x1, double t1, const Location& x2, double t2) const noexcept;
};

/// Checked evaluation on arbitrary-dimensional locations; the two locations
/// must have the same length.
double st_kernel_eval(const SpatioTemporalKernel& kernel, std::span<const double> x1, double t1,
                      std::span<const double> x2, double t2);

}  // namespace dynbo
