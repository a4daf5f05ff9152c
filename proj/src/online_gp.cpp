#include <cmath>

#include "dynbo/errors.hpp"
#include "dynbo/gp.hpp"

namespace dynbo {

namespace {

Eigen::ArrayXd matern_array(const KernelSpec& spec, const Eigen::ArrayXd& r) {
  const Eigen::ArrayXd s = r / spec.lengthscale;
  switch (spec.family) {
    case MaternFamily::Matern12:
      return spec.variance * (-s).exp();
    case MaternFamily::Matern32: {
      const Eigen::ArrayXd a = std::sqrt(3.0) * s;
      return spec.variance * (1.0 + a) * (-a).exp();
    }
    case MaternFamily::Matern52: {
      const Eigen::ArrayXd a = std::sqrt(5.0) * s;
      return spec.variance * (1.0 + a + a * a / 3.0) * (-a).exp();
    }
  }
  return Eigen::ArrayXd::Zero(r.size());
}

}  // namespace

OnlineGp::OnlineGp(const SpatioTemporalKernel& kernel, double noise, std::vector<Query> queries)
    : kernel_(kernel), base_noise_(noise), noise_(noise), queries_(std::move(queries)) {
  kernel_.validate();
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw InvalidArgument("noise must be nonnegative");
  for (const auto& q : queries_)
    if (!std::isfinite(q.location[0]) || !std::isfinite(q.location[1]) || !std::isfinite(q.time))
      throw InvalidArgument("query must be finite");
  const auto m = static_cast<Eigen::Index>(queries_.size());
  qx_.resize(m);
  qy_.resize(m);
  qt_.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Query& q = queries_[static_cast<std::size_t>(j)];
    qx_[j] = q.location[0];
    qy_[j] = q.location[1];
    qt_[j] = q.time;
    shared_time_ = shared_time_ && q.time == queries_.front().time;
  }
  reset({});
}

Eigen::RowVectorXd OnlineGp::cross_row(const Sample& s) const {
  const Eigen::ArrayXd dx = qx_ - s.location[0];
  const Eigen::ArrayXd dy = qy_ - s.location[1];
  Eigen::ArrayXd k = matern_array(kernel_.spatial, (dx * dx + dy * dy).sqrt());
  if (qt_.size() == 0) return k.matrix().transpose();
  if (shared_time_) {
    const double dt = std::abs(qt_[0] - s.time);
    k *= dt == 0.0 ? kernel_.temporal.variance : matern(kernel_.temporal, dt);
  } else {
    k *= matern_array(kernel_.temporal, (qt_ - s.time).abs());
  }
  return k.matrix().transpose();
}

void OnlineGp::reset(std::span<const Sample> samples) {
  samples_.assign(samples.begin(), samples.end());
  noise_ = base_noise_;
  refactor();
}

void OnlineGp::refactor() {
  const auto m = static_cast<Eigen::Index>(queries_.size());
  const auto n = static_cast<Eigen::Index>(samples_.size());
  const Eigen::Index capacity = std::max<Eigen::Index>(2 * n, 16);
  chol_.setZero(capacity, capacity);
  beta_.setZero(capacity);
  proj_.setZero(capacity, m);
  mean_.setZero(m);
  var_.setConstant(m, kernel_.prior_variance());
  if (n == 0) return;

  // The full fit owns the jitter ladder; reuse its factor and effective noise.
  const GpModel fitted = gp_fit(samples_, kernel_, noise_);
  noise_ = fitted.noise();
  chol_.topLeftCorner(n, n) = fitted.cholesky();

  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = samples_[i].value;
  const auto lower = chol_.topLeftCorner(n, n).triangularView<Eigen::Lower>();
  beta_.head(n) = lower.solve(y);

  Eigen::MatrixXd k(n, m);
  for (Eigen::Index i = 0; i < n; ++i) k.row(i) = cross_row(samples_[static_cast<std::size_t>(i)]);
  lower.solveInPlace(k);
  proj_.topRows(n) = k;
  mean_ = k.transpose() * beta_.head(n);
  var_ -= k.colwise().squaredNorm().transpose();
}

void OnlineGp::add(const Sample& sample) {
  if (!std::isfinite(sample.location[0]) || !std::isfinite(sample.location[1]) || !std::isfinite(sample.value))
    throw InvalidArgument("sample location and value must be finite");
  const auto n = static_cast<Eigen::Index>(samples_.size());
  const auto m = static_cast<Eigen::Index>(queries_.size());

  Eigen::VectorXd kvec(n);
  for (Eigen::Index i = 0; i < n; ++i)
    kvec[i] = kernel_(samples_[i].location, samples_[i].time, sample.location, sample.time);
  const double self = kernel_.prior_variance() + noise_;

  Eigen::VectorXd l = kvec;
  if (n > 0) chol_.topLeftCorner(n, n).triangularView<Eigen::Lower>().solveInPlace(l);
  const double pivot_sq = self - l.squaredNorm();
  samples_.push_back(sample);
  if (!(pivot_sq > 1e-14 * self) || !std::isfinite(pivot_sq)) {
    refactor();
    return;
  }

  if (n + 1 > chol_.rows()) {
    const Eigen::Index cap = 2 * (n + 1);
    chol_.conservativeResize(cap, cap);
    chol_.rightCols(cap - n).setZero();
    chol_.bottomRows(cap - n).setZero();
    beta_.conservativeResize(cap);
    proj_.conservativeResize(cap, m);
  }
  const double pivot = std::sqrt(pivot_sq);
  chol_.row(n).head(n) = l.transpose();
  chol_(n, n) = pivot;
  beta_[n] = (sample.value - l.dot(beta_.head(n))) / pivot;

  Eigen::RowVectorXd row = cross_row(sample);
  if (n > 0) row.noalias() -= l.transpose() * proj_.topRows(n);
  row /= pivot;
  proj_.row(n) = row;
  mean_ += row.transpose() * beta_[n];
  var_ -= row.transpose().cwiseAbs2();
}

std::vector<Prediction> OnlineGp::predictions() const {
  std::vector<Prediction> out(queries_.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const auto idx = static_cast<Eigen::Index>(j);
    out[j] = {mean_[idx], std::max(0.0, var_[idx])};
  }
  return out;
}

}  // namespace dynbo
