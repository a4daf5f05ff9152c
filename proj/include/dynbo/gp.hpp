#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "dynbo/kernels.hpp"

namespace dynbo {

/// One observed query of the dynamic objective.
struct Sample {
  Location location{};  // normalized search coordinates
  int time = 0;         // frame index
  double scale = 1.0;   // best scale of the triplet that produced `value`
  double value = 0.0;
};

struct Query {
  Location location{};
  double time = 0.0;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Zero-mean GP posterior conditioned on a set of samples. Immutable once
/// built; `GpModel::prior` gives the sample-free model.
class GpModel {
 public:
  static GpModel prior(const SpatioTemporalKernel& kernel);

  const std::vector<Sample>& samples() const { return samples_; }
  const SpatioTemporalKernel& kernel() const { return kernel_; }
  // Effective observation noise variance, including any jitter added during the fit.
  double noise() const { return noise_; }
  const Eigen::MatrixXd& cholesky() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  bool empty() const { return samples_.empty(); }

  Prediction predict(const Query& query) const;
  std::vector<Prediction> predict(std::span<const Query> queries) const;

  double log_marginal_likelihood() const;

 private:
  friend GpModel gp_fit(std::vector<Sample> samples, const SpatioTemporalKernel& kernel, double noise);

  std::vector<Sample> samples_;
  SpatioTemporalKernel kernel_;
  double noise_ = 0.0;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
};

/// Gram matrix K(X, X) without the noise term.
Eigen::MatrixXd gram_matrix(std::span<const Sample> samples, const SpatioTemporalKernel& kernel);

/// Fits the posterior. If Gram + noise*I is not numerically positive definite
/// the noise is raised to max(noise, 1e-8) and doubled until 1e-4 before
/// giving up with NumericalError.
GpModel gp_fit(std::vector<Sample> samples, const SpatioTemporalKernel& kernel, double noise);

std::vector<Prediction> gp_predict(const GpModel& model, std::span<const Query> queries);

double log_marginal_likelihood(const GpModel& model);

struct HyperGrid {
  std::vector<double> spatial{0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.6};
  std::vector<double> temporal{0.5, 1.0, 2.0, 4.0, 8.0};
};

struct Lengthscales {
  double spatial = 0.0;
  double temporal = 0.0;
};

/// Exhaustive log-marginal-likelihood search over the spatial x temporal
/// lengthscale grid with both variances held at 1. Families come from
/// `families`. Ties keep the first grid point (spatial-major order).
Lengthscales fit_hyperparams(std::span<const Sample> samples, const HyperGrid& grid,
                             const SpatioTemporalKernel& families, double noise);

/// Posterior over a fixed query set that is updated one sample at a time by
/// extending the Cholesky factor. Predictions agree with gp_fit + gp_predict
/// on the same samples.
class OnlineGp {
 public:
  OnlineGp(const SpatioTemporalKernel& kernel, double noise, std::vector<Query> queries);

  void reset(std::span<const Sample> samples);
  void add(const Sample& sample);

  std::size_t size() const { return samples_.size(); }
  const std::vector<Sample>& samples() const { return samples_; }
  const std::vector<Query>& queries() const { return queries_; }
  double noise() const { return noise_; }

  // Posterior at every query, in query order.
  std::vector<Prediction> predictions() const;
  const Eigen::VectorXd& means() const { return mean_; }
  const Eigen::VectorXd& variances() const { return var_; }

 private:
  void refactor();
  // K(sample, Q) for every query.
  Eigen::RowVectorXd cross_row(const Sample& s) const;

  SpatioTemporalKernel kernel_;
  double base_noise_;
  double noise_;
  std::vector<Query> queries_;
  std::vector<Sample> samples_;
  Eigen::ArrayXd qx_, qy_, qt_;
  bool shared_time_ = true;

  Eigen::MatrixXd chol_;   // capacity-sized, leading n x n block is used
  Eigen::VectorXd beta_;   // L^{-1} y
  Eigen::MatrixXd proj_;   // L^{-1} K(X, Q), leading n rows are used
  Eigen::VectorXd mean_;
  Eigen::VectorXd var_;
};

}  // namespace dynbo
