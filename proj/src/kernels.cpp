#include "dynbo/kernels.hpp"

#include <cmath>

#include "dynbo/errors.hpp"

namespace dynbo {

namespace {
constexpr double kSqrt3 = 1.7320508075688772935274463415059;
constexpr double kSqrt5 = 2.2360679774997896964091736687313;
}  // namespace

std::string_view to_string(MaternFamily family) {
  switch (family) {
    case MaternFamily::Matern12:
      return "matern12";
    case MaternFamily::Matern32:
      return "matern32";
    case MaternFamily::Matern52:
      return "matern52";
  }
  return "unknown";
}

MaternFamily parse_matern_family(std::string_view name) {
  if (name == "matern12" || name == "Matern12" || name == "exponential") return MaternFamily::Matern12;
  if (name == "matern32" || name == "Matern32") return MaternFamily::Matern32;
  if (name == "matern52" || name == "Matern52") return MaternFamily::Matern52;
  throw InvalidArgument("unknown kernel family '" + std::string(name) + "'");
}

void KernelSpec::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw InvalidArgument("kernel variance must be positive and finite");
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale))
    throw InvalidArgument("kernel lengthscale must be positive and finite");
}

double matern(const KernelSpec& spec, double r) noexcept {
  const double s = r / spec.lengthscale;
  switch (spec.family) {
    case MaternFamily::Matern12:
      return spec.variance * std::exp(-s);
    case MaternFamily::Matern32: {
      const double a = kSqrt3 * s;
      return spec.variance * (1.0 + a) * std::exp(-a);
    }
    case MaternFamily::Matern52: {
      const double a = kSqrt5 * s;
      return spec.variance * (1.0 + a + a * a / 3.0) * std::exp(-a);
    }
  }
  return 0.0;
}

double kernel_eval(const KernelSpec& spec, double r) {
  spec.validate();
  if (!std::isfinite(r)) throw InvalidArgument("kernel distance must be finite");
  if (r < 0.0) throw InvalidArgument("kernel distance must be nonnegative");
  return matern(spec, r);
}

void SpatioTemporalKernel::validate() const {
  spatial.validate();
  temporal.validate();
}

double SpatioTemporalKernel::operator()(const Location& x1, double t1, const Location& x2,
                                        double t2) const noexcept {
  const double dx = x1[0] - x2[0];
  const double dy = x1[1] - x2[1];
  const double r = std::sqrt(dx * dx + dy * dy);
  const double dt = std::abs(t1 - t2);
  return matern(spatial, r) * (dt == 0.0 ? temporal.variance : matern(temporal, dt));
}

double st_kernel_eval(const SpatioTemporalKernel& kernel, std::span<const double> x1, double t1,
                      std::span<const double> x2, double t2) {
  if (x1.size() != x2.size())
    throw InvalidArgument("location dimensionality mismatch: " + std::to_string(x1.size()) + " vs " +
                          std::to_string(x2.size()));
  if (!std::isfinite(t1) || !std::isfinite(t2)) throw InvalidArgument("time must be finite");
  double sq = 0.0;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const double d = x1[i] - x2[i];
    sq += d * d;
  }
  return kernel_eval(kernel.spatial, std::sqrt(sq)) * kernel_eval(kernel.temporal, std::abs(t1 - t2));
}

}  // namespace dynbo
