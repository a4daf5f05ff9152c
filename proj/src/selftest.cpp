#include "dynbo/selftest.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "dynbo/errors.hpp"

namespace dynbo::selftest {

InverseResult full_pivot_inverse(DenseMatrix a) {
  const std::size_t n = a.size();
  for (const auto& row : a)
    if (row.size() != n) throw InvalidArgument("full_pivot_inverse needs a square matrix");

  // Augment with the identity and reduce to [I | A^-1], tracking column swaps.
  DenseMatrix inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  std::vector<std::size_t> col_perm(n);
  for (std::size_t i = 0; i < n; ++i) col_perm[i] = i;

  InverseResult res;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pr = k, pc = k;
    double best = 0.0;
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j)
        if (std::abs(a[i][j]) > best) {
          best = std::abs(a[i][j]);
          pr = i;
          pc = j;
        }
    if (best == 0.0) throw NumericalError("matrix is singular");
    if (pr != k) {
      std::swap(a[pr], a[k]);
      std::swap(inv[pr], inv[k]);
      res.det_sign = -res.det_sign;
    }
    if (pc != k) {
      for (std::size_t i = 0; i < n; ++i) std::swap(a[i][pc], a[i][k]);
      std::swap(col_perm[pc], col_perm[k]);
      res.det_sign = -res.det_sign;
    }
    const double pivot = a[k][k];
    res.log_abs_det += std::log(std::abs(pivot));
    if (pivot < 0.0) res.det_sign = -res.det_sign;
    for (std::size_t j = 0; j < n; ++j) {
      a[k][j] /= pivot;
      inv[k][j] /= pivot;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k || a[i][k] == 0.0) continue;
      const double f = a[i][k];
      for (std::size_t j = 0; j < n; ++j) {
        a[i][j] -= f * a[k][j];
        inv[i][j] -= f * inv[k][j];
      }
    }
  }
  // Column swaps of A permute the rows of its inverse.
  DenseMatrix out(n);
  for (std::size_t k = 0; k < n; ++k) out[col_perm[k]] = std::move(inv[k]);
  res.inverse = std::move(out);
  return res;
}

namespace {

DenseMatrix noisy_gram(std::span<const Sample> samples, const SpatioTemporalKernel& kernel, double noise) {
  const std::size_t n = samples.size();
  DenseMatrix k(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      k[i][j] = st_kernel_eval(kernel, samples[i].location, samples[i].time, samples[j].location, samples[j].time) +
                (i == j ? noise : 0.0);
  return k;
}

}  // namespace

std::vector<Prediction> dense_posterior(std::span<const Sample> samples, const SpatioTemporalKernel& kernel,
                                        double noise, std::span<const Query> queries) {
  const std::size_t n = samples.size();
  const DenseMatrix inv = full_pivot_inverse(noisy_gram(samples, kernel, noise)).inverse;
  std::vector<Prediction> out;
  for (const auto& q : queries) {
    std::vector<double> ks(n);
    for (std::size_t i = 0; i < n; ++i)
      ks[i] = st_kernel_eval(kernel, samples[i].location, samples[i].time, q.location, q.time);
    double mean = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row_y = 0.0, row_k = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        row_y += inv[i][j] * samples[j].value;
        row_k += inv[i][j] * ks[j];
      }
      mean += ks[i] * row_y;
      quad += ks[i] * row_k;
    }
    const double prior = st_kernel_eval(kernel, q.location, q.time, q.location, q.time);
    out.push_back({mean, std::max(0.0, prior - quad)});
  }
  return out;
}

double dense_log_likelihood(std::span<const Sample> samples, const SpatioTemporalKernel& kernel, double noise) {
  const std::size_t n = samples.size();
  const InverseResult r = full_pivot_inverse(noisy_gram(samples, kernel, noise));
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) quad += samples[i].value * r.inverse[i][j] * samples[j].value;
  return -0.5 * quad - 0.5 * r.log_abs_det - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

RandomInstance random_instance(std::uint64_t seed, int max_samples, int n_queries) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, max_samples);
  std::uniform_int_distribution<int> frame(0, 4);
  std::uniform_int_distribution<int> family(0, 2);
  auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, unit(rng)); };

  RandomInstance inst;
  inst.kernel.spatial = {static_cast<MaternFamily>(family(rng)), log_uniform(0.5, 2.0), log_uniform(0.05, 0.5)};
  inst.kernel.temporal = {static_cast<MaternFamily>(family(rng)), log_uniform(0.5, 2.0), log_uniform(0.5, 5.0)};
  inst.noise = log_uniform(1e-4, 1e-2);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) inst.samples.push_back({{unit(rng), unit(rng)}, frame(rng), 1.0, 2.0 * unit(rng) - 1.0});
  for (int i = 0; i < n_queries; ++i) inst.queries.push_back({{unit(rng), unit(rng)}, static_cast<double>(frame(rng))});
  return inst;
}

SelftestSummary run_gp_selftest(int instances, std::uint64_t seed, double tol, std::ostream* log) {
  SelftestSummary s;
  const auto start = std::chrono::steady_clock::now();
  for (int k = 0; k < instances; ++k) {
    const RandomInstance inst = random_instance(seed + static_cast<std::uint64_t>(k));
    const GpModel model = gp_fit(inst.samples, inst.kernel, inst.noise);
    const auto got = gp_predict(model, inst.queries);
    const auto want = dense_posterior(inst.samples, inst.kernel, inst.noise, inst.queries);
    double mean_err = 0.0, var_err = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      mean_err = std::max(mean_err, std::abs(got[i].mean - want[i].mean));
      var_err = std::max(var_err, std::abs(got[i].variance - want[i].variance));
    }
    const double lml_err =
        std::abs(model.log_marginal_likelihood() - dense_log_likelihood(inst.samples, inst.kernel, inst.noise));
    s.max_mean_error = std::max(s.max_mean_error, mean_err);
    s.max_variance_error = std::max(s.max_variance_error, var_err);
    s.max_lml_error = std::max(s.max_lml_error, lml_err);
    ++s.instances;
    const bool ok = mean_err <= tol && var_err <= tol && lml_err <= tol;
    if (!ok) ++s.failures;
    if (log && !ok)
      *log << "instance " << k << " (n=" << inst.samples.size() << "): mean err " << mean_err << ", var err "
           << var_err << ", lml err " << lml_err << "\n";
  }
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

}  // namespace dynbo::selftest
