#include "dynbo/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "dynbo/errors.hpp"

namespace dynbo {

namespace {

constexpr double kJitterFloor = 1e-8;
constexpr double kJitterCeiling = 1e-4;

void check_sample(const Sample& s) {
  if (!std::isfinite(s.location[0]) || !std::isfinite(s.location[1]) || !std::isfinite(s.value))
    throw InvalidArgument("sample location and value must be finite");
}

void check_query(const Query& q) {
  if (!std::isfinite(q.location[0]) || !std::isfinite(q.location[1]) || !std::isfinite(q.time))
    throw InvalidArgument("query must be finite");
}

std::optional<Eigen::MatrixXd> try_cholesky(const Eigen::MatrixXd& gram, double noise) {
  Eigen::MatrixXd a = gram;
  a.diagonal().array() += noise;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Eigen::MatrixXd l = llt.matrixL();
  for (Eigen::Index i = 0; i < l.rows(); ++i)
    if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) return std::nullopt;
  return l;
}

}  // namespace

Eigen::MatrixXd gram_matrix(std::span<const Sample> samples, const SpatioTemporalKernel& kernel) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& a = samples[i];
    for (Eigen::Index j = 0; j <= i; ++j) {
      const auto& b = samples[j];
      k(i, j) = k(j, i) = kernel(a.location, a.time, b.location, b.time);
    }
  }
  return k;
}

GpModel GpModel::prior(const SpatioTemporalKernel& kernel) {
  kernel.validate();
  GpModel m;
  m.kernel_ = kernel;
  return m;
}

GpModel gp_fit(std::vector<Sample> samples, const SpatioTemporalKernel& kernel, double noise) {
  kernel.validate();
  if (samples.empty()) throw InvalidArgument("gp_fit needs at least one sample");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw InvalidArgument("noise must be nonnegative");
  for (const auto& s : samples) check_sample(s);
  if (noise == 0.0) {
    for (std::size_t i = 0; i < samples.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (samples[i].location == samples[j].location && samples[i].time == samples[j].time)
          throw InvalidArgument("duplicate (location, time) samples require noise > 0");
  }

  const Eigen::MatrixXd gram = gram_matrix(samples, kernel);
  auto chol = try_cholesky(gram, noise);
  double used = noise;
  if (!chol) {
    for (used = std::max(noise, kJitterFloor); used <= kJitterCeiling; used *= 2.0) {
      if ((chol = try_cholesky(gram, used))) break;
    }
    if (!chol)
      throw NumericalError(
          "Gram matrix is not positive definite even with noise 1e-4; increase the jitter/noise");
  }

  GpModel m;
  m.kernel_ = kernel;
  m.noise_ = used;
  m.chol_ = std::move(*chol);
  Eigen::VectorXd y(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) y[static_cast<Eigen::Index>(i)] = samples[i].value;
  m.alpha_ = m.chol_.triangularView<Eigen::Lower>().solve(y);
  m.chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(m.alpha_);
  m.samples_ = std::move(samples);
  return m;
}

Prediction GpModel::predict(const Query& query) const {
  return predict(std::span<const Query>(&query, 1)).front();
}

std::vector<Prediction> GpModel::predict(std::span<const Query> queries) const {
  for (const auto& q : queries) check_query(q);
  const double prior_var = kernel_.prior_variance();
  std::vector<Prediction> out(queries.size(), Prediction{0.0, prior_var});
  if (samples_.empty() || queries.empty()) return out;

  const auto n = static_cast<Eigen::Index>(samples_.size());
  const auto m = static_cast<Eigen::Index>(queries.size());
  Eigen::MatrixXd cross(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& q = queries[j];
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& s = samples_[i];
      cross(i, j) = kernel_(s.location, s.time, q.location, q.time);
    }
  }
  const Eigen::VectorXd mean = cross.transpose() * alpha_;
  chol_.triangularView<Eigen::Lower>().solveInPlace(cross);
  const Eigen::VectorXd reduction = cross.colwise().squaredNorm().transpose();
  for (Eigen::Index j = 0; j < m; ++j) {
    out[j].mean = mean[j];
    out[j].variance = std::max(0.0, prior_var - reduction[j]);
  }
  return out;
}

double GpModel::log_marginal_likelihood() const {
  if (samples_.empty()) return 0.0;
  const auto n = static_cast<double>(samples_.size());
  double fit = 0.0;
  for (std::size_t i = 0; i < samples_.size(); ++i) fit += samples_[i].value * alpha_[static_cast<Eigen::Index>(i)];
  const double log_det_half = chol_.diagonal().array().log().sum();
  return -0.5 * fit - log_det_half - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

std::vector<Prediction> gp_predict(const GpModel& model, std::span<const Query> queries) {
  return model.predict(queries);
}

double log_marginal_likelihood(const GpModel& model) { return model.log_marginal_likelihood(); }

Lengthscales fit_hyperparams(std::span<const Sample> samples, const HyperGrid& grid,
                             const SpatioTemporalKernel& families, double noise) {
  if (grid.spatial.empty() || grid.temporal.empty())
    throw InvalidArgument("hyperparameter grid has an empty range");
  if (samples.size() < 5) throw InvalidArgument("hyperparameter fitting needs at least 5 samples");
  bool two_times = false;
  for (const auto& s : samples) two_times = two_times || s.time != samples.front().time;
  if (!two_times) throw InvalidArgument("hyperparameter fitting needs samples from at least 2 distinct times");

  std::vector<Sample> data(samples.begin(), samples.end());
  Lengthscales best{grid.spatial.front(), grid.temporal.front()};
  double best_lml = -std::numeric_limits<double>::infinity();
  for (double ls : grid.spatial) {
    for (double lt : grid.temporal) {
      SpatioTemporalKernel k = families;
      k.spatial.variance = 1.0;
      k.temporal.variance = 1.0;
      k.spatial.lengthscale = ls;
      k.temporal.lengthscale = lt;
      double lml = -std::numeric_limits<double>::infinity();
      try {
        lml = gp_fit(data, k, noise).log_marginal_likelihood();
      } catch (const NumericalError&) {
        continue;
      }
      if (lml > best_lml) {
        best_lml = lml;
        best = {ls, lt};
      }
    }
  }
  return best;
}

}  // namespace dynbo
