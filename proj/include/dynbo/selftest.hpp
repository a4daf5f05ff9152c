#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "dynbo/gp.hpp"

namespace dynbo::selftest {

// Reference linear algebra on plain row-major storage, independent of the
// Cholesky path used by the GP.
using DenseMatrix = std::vector<std::vector<double>>;

/// Inverse by Gauss-Jordan elimination with full pivoting. Also reports the
/// log-determinant. Throws NumericalError on a singular matrix.
struct InverseResult {
  DenseMatrix inverse;
  double log_abs_det = 0.0;
  int det_sign = 1;
};
InverseResult full_pivot_inverse(DenseMatrix a);

/// GP posterior computed as k*^T (K + noise I)^{-1} y and
/// k** - k*^T (K + noise I)^{-1} k*, with the kernel evaluated through the
/// checked st_kernel_eval entry point.
std::vector<Prediction> dense_posterior(std::span<const Sample> samples, const SpatioTemporalKernel& kernel,
                                        double noise, std::span<const Query> queries);

/// Gaussian log density of the sample values under N(0, K + noise I).
double dense_log_likelihood(std::span<const Sample> samples, const SpatioTemporalKernel& kernel, double noise);

struct RandomInstance {
  std::vector<Sample> samples;
  std::vector<Query> queries;
  SpatioTemporalKernel kernel;
  double noise = 0.0;
};

/// Random well-posed GP instance: n in [1, max_samples], random Matérn
/// families and hyperparameters, noise in [1e-4, 1e-2].
RandomInstance random_instance(std::uint64_t seed, int max_samples = 20, int n_queries = 5);

struct SelftestSummary {
  int instances = 0;
  int failures = 0;
  double max_mean_error = 0.0;
  double max_variance_error = 0.0;
  double max_lml_error = 0.0;
  double seconds = 0.0;
  bool passed() const { return failures == 0; }
};

/// Compares gp_fit/gp_predict/log_marginal_likelihood with the dense oracle on
/// `instances` random instances at absolute tolerance `tol`.
SelftestSummary run_gp_selftest(int instances, std::uint64_t seed, double tol, std::ostream* log = nullptr);

}  // namespace dynbo::selftest
