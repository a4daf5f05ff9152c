#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dynbo/acquisition.hpp"
#include "dynbo/errors.hpp"
#include "dynbo/selftest.hpp"
#include "oracles.hpp"

using namespace dynbo;

namespace {

SearchHistory history_of(std::initializer_list<double> values) {
  SearchHistory h;
  double x = 10.0;
  for (double v : values) h.record({x, x}, v), x += 1.0;
  return h;
}

AcqConfig msei(double alpha = 1.0, double q = 1.1) {
  AcqConfig c;
  c.kind = AcquisitionKind::MSEI;
  c.alpha = alpha;
  c.q = q;
  return c;
}

std::vector<Query> lattice(int d) {
  std::vector<Query> q;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) q.push_back({{(c + 0.5) / d, (r + 0.5) / d}, 0.0});
  return q;
}

}  // namespace

TEST(Xi, WorkedExamples) {
  EXPECT_NEAR(ms_ei_xi(history_of({1.0}), msei()), 1.0, 1e-15);
  SearchHistory h;
  for (int i = 0; i < 10; ++i) h.record({double(i), 0.0}, i % 2 ? 0.75 : 0.25);
  EXPECT_NEAR(ms_ei_xi(h, msei()), 0.158866, 1e-6);
  EXPECT_NEAR(ms_ei_xi(h, msei()), oracle::ms_ei_xi(h.values(), 1.0, 1.1), 1e-12);
  EXPECT_NEAR(ms_ei_xi(history_of({2.0, 2.0, 2.0, 2.0}), msei(2.0, 1.0)), 0.0625, 1e-15);
}

TEST(Xi, StrictlyDecreasingInN) {
  SearchHistory h;
  double prev = INFINITY;
  for (int n = 1; n <= 100; ++n) {
    h.record({double(n), 0.0}, 0.5);
    const double xi = ms_ei_xi(h, msei());
    EXPECT_LT(xi, prev);
    prev = xi;
  }
}

TEST(Xi, MeanIsTakenAboveTheScoreFloor) {
  auto cfg = msei();
  cfg.score_floor = -1.0;
  // Centered scores averaging -0.5 sit 0.5 above the floor.
  const auto h = history_of({-0.75, -0.25});
  EXPECT_NEAR(ms_ei_xi(h, cfg), 1.0 / (0.5 * std::pow(2.0, 1.1)), 1e-14);
  EXPECT_NEAR(ms_ei_xi(h, cfg), oracle::ms_ei_xi(h.values(), 1.0, 1.1, -1.0), 1e-14);
  cfg.xi_max = 7.0;
  EXPECT_EQ(ms_ei_xi(history_of({-1.0}), cfg), 7.0);
}

TEST(Xi, DegenerateMeanUsesCap) {
  auto cfg = msei();
  cfg.xi_max = 7.0;
  EXPECT_EQ(ms_ei_xi(history_of({-0.5, 0.2}), cfg), 7.0);
  EXPECT_EQ(ms_ei_xi(history_of({0.0}), cfg), 7.0);
  EXPECT_THROW(ms_ei_xi(SearchHistory{}, cfg), InvalidArgument);
  EXPECT_EQ(exploration_margin(SearchHistory{}, cfg), 7.0);
  cfg.kind = AcquisitionKind::EI;
  EXPECT_EQ(exploration_margin(history_of({1.0}), cfg), cfg.fixed_xi);
  cfg.alpha = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(History, IncumbentAndMean) {
  auto h = history_of({0.2, 0.9, 0.4, 0.9});
  EXPECT_EQ(h.n(), 4u);
  EXPECT_DOUBLE_EQ(h.mean(), 0.6);
  EXPECT_EQ(h.incumbent()->value, 0.9);
  EXPECT_EQ(h.incumbent()->location, (Location{11.0, 11.0}));
  EXPECT_TRUE(h.contains({12.0, 12.0}));
  h.clear();
  EXPECT_FALSE(h.incumbent());
  EXPECT_FALSE(h.contains({12.0, 12.0}));
}

TEST(ExpectedImprovement, WorkedExamples) {
  EXPECT_NEAR(expected_improvement(0.6, 1.0, 0.5, 0.1), 0.398942, 1e-6);
  EXPECT_NEAR(expected_improvement(0.6, 1.0, 0.5, 0.1), static_cast<double>(oracle::std_normal_pdf(0)), 1e-15);
  EXPECT_EQ(expected_improvement(0.5, 0.0, 0.5, 0.1), 0.0);
  EXPECT_EQ(expected_improvement(0.2, 0.0, 0.5, 0.1), 0.0);
  EXPECT_NEAR(expected_improvement(5.6, 0.001, 0.5, 0.1), 5.0, 1e-6);
}

TEST(ProbabilityOfImprovement, WorkedExamples) {
  EXPECT_DOUBLE_EQ(probability_of_improvement(0.6, 0.3, 0.5, 0.1), 0.5);
  EXPECT_EQ(probability_of_improvement(0.7, 0.0, 0.5, 0.1), 1.0);
  EXPECT_EQ(probability_of_improvement(0.6, 0.0, 0.5, 0.1), 0.0);
  const double quad = oracle::std_normal_cdf_simpson(1.0);
  EXPECT_NEAR(quad, 0.841345, 1e-6);
  EXPECT_NEAR(probability_of_improvement(1.6, 1.0, 0.5, 0.1), quad, 1e-12);
}

TEST(Acquisition, RangesAndMonotonicity) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 2000; ++i) {
    const double m = u(rng), s = std::abs(u(rng)), f = u(rng), xi = std::abs(u(rng)) / 3;
    const double ei = expected_improvement(m, s, f, xi);
    const double pi = probability_of_improvement(m, s, f, xi);
    EXPECT_GE(ei, 0.0);
    EXPECT_GE(pi, 0.0);
    EXPECT_LE(pi, 1.0);
    EXPECT_GE(expected_improvement(m + 0.1, s, f, xi), ei);
    EXPECT_GE(expected_improvement(m, s + 0.1, f, xi), ei);
    EXPECT_NEAR(ei, static_cast<double>(oracle::ei(m, s, f, xi)), 1e-12);
    EXPECT_NEAR(pi, static_cast<double>(oracle::pi(m, s, f, xi)), 1e-12);
    // Compare logs against the extended-precision oracle, relative to magnitude.
    const long double oei = oracle::ei(m, s, f, xi), opi = oracle::pi(m, s, f, xi);
    if (oei > 0) {
      const double want = static_cast<double>(std::log(oei));
      EXPECT_NEAR(log_expected_improvement(m, s, f, xi), want, 1e-10 * std::max(1.0, std::abs(want)));
    }
    if (opi > 0) {
      const double want = static_cast<double>(std::log(opi));
      EXPECT_NEAR(log_probability_of_improvement(m, s, f, xi), want, 1e-10 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(Acquisition, LogFormsStayFiniteInTails) {
  for (double z : {-30.0, -60.0, -200.0, -1000.0}) {
    const double lei = log_expected_improvement(z, 1.0, 0.0, 0.0);
    const double lpi = log_probability_of_improvement(z, 1.0, 0.0, 0.0);
    EXPECT_TRUE(std::isfinite(lei));
    EXPECT_TRUE(std::isfinite(lpi));
    // Asymptotics: log EI ~ -z^2/2 - 2 log|z|, log PI ~ -z^2/2 - log|z|.
    EXPECT_NEAR(lei, -0.5 * z * z - 2 * std::log(-z) - 0.5 * std::log(2 * M_PI), 1e-2);
    EXPECT_NEAR(lpi, -0.5 * z * z - std::log(-z) - 0.5 * std::log(2 * M_PI), 1e-2);
  }
  // Continuity across the switch to the asymptotic expansion.
  EXPECT_NEAR(log_expected_improvement(-25.0 + 1e-9, 1, 0, 0), log_expected_improvement(-25.0 - 1e-9, 1, 0, 0), 1e-6);
  EXPECT_NEAR(log_probability_of_improvement(-25.0 + 1e-9, 1, 0, 0),
              log_probability_of_improvement(-25.0 - 1e-9, 1, 0, 0), 1e-6);
}

TEST(Acquisition, ShiftInvariance) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const double m = u(rng), s = std::abs(u(rng)), f = u(rng), c = u(rng);
    EXPECT_NEAR(expected_improvement(m + c, s, f + c, 0.05), expected_improvement(m, s, f, 0.05), 1e-12);
  }
  EXPECT_THROW(expected_improvement(0.0, -1.0, 0.0, 0.0), InvalidArgument);
  EXPECT_THROW(expected_improvement(NAN, 1.0, 0.0, 0.0), InvalidArgument);
}

TEST(SelectNext, EmptyHistoryUniformPriorTakesFirst) {
  const auto q = lattice(5);
  const auto sel = select_next(GpModel::prior(SpatioTemporalKernel{}), q, SearchHistory{}, msei());
  EXPECT_EQ(sel.index, 0u);
  EXPECT_FALSE(sel.fallback);
  EXPECT_EQ(sel.query.location, q[0].location);
}

TEST(SelectNext, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int inst = 0; inst < 60; ++inst) {
    const auto ri = selftest::random_instance(5000 + inst, 15, 0);
    const double t = ri.samples.back().time;
    std::vector<Query> cand;
    for (int i = 0; i < 50; ++i) cand.push_back({{u(rng), u(rng)}, t});
    SearchHistory h;
    const int k = inst % 4;
    for (int i = 0; i < k; ++i) h.record(cand[static_cast<std::size_t>(7 * i)].location, u(rng));
    AcqConfig cfg;
    cfg.kind = static_cast<AcquisitionKind>(inst % 3);
    const auto model = gp_fit(ri.samples, ri.kernel, ri.noise);
    const auto sel = select_next(model, cand, h, cfg);
    const auto preds = selftest::dense_posterior(ri.samples, ri.kernel, ri.noise, cand);
    EXPECT_EQ(sel.index, oracle::exhaustive_argmax(cand, preds, h, cfg)) << "instance " << inst;
  }
}

TEST(SelectNext, TiesKeepLowestIndexAndSkipVisited) {
  std::vector<Query> cand{{{0.1, 0.1}, 0}, {{0.2, 0.2}, 0}, {{0.3, 0.3}, 0}};
  std::vector<Prediction> preds{{0.0, 0.5}, {0.2, 0.5}, {0.2, 0.5}};
  AcqConfig cfg;
  cfg.kind = AcquisitionKind::EI;
  EXPECT_EQ(select_from_predictions(cand, preds, SearchHistory{}, cfg).index, 1u);
  SearchHistory h;
  h.record(cand[1].location, 0.0);
  EXPECT_EQ(select_from_predictions(cand, preds, h, cfg).index, 2u);
}

TEST(SelectNext, FallbackWhenEverythingVisited) {
  std::vector<Query> cand{{{0.1, 0.1}, 0}, {{0.2, 0.2}, 0}};
  std::vector<Prediction> preds{{0.0, 0.1}, {0.0, 0.3}};
  SearchHistory h;
  h.record(cand[0].location, 0.0);
  h.record(cand[1].location, 0.0);
  const auto sel = select_from_predictions(cand, preds, h, msei());
  EXPECT_TRUE(sel.fallback);
  EXPECT_EQ(sel.index, 1u);
}

TEST(SelectNext, Preconditions) {
  const auto model = GpModel::prior(SpatioTemporalKernel{});
  EXPECT_THROW(select_next(model, {}, SearchHistory{}, msei()), InvalidArgument);
  std::vector<Query> mixed{{{0.1, 0.1}, 0}, {{0.2, 0.2}, 1}};
  EXPECT_THROW(select_next(model, mixed, SearchHistory{}, msei()), InvalidArgument);
}

TEST(SelectNext, MsEiExploresEarlyAndExploitsLate) {
  const int d = 10;
  const auto q = lattice(d);
  // Off-center inside cell (5, 5) so no two candidates are equidistant from it.
  const Location peak{0.537, 0.561};
  const SpatioTemporalKernel k{{MaternFamily::Matern52, 1.0, 0.2}, {MaternFamily::Matern52, 1.0, 2.0}};
  const std::vector<Sample> data{{peak, 0, 1.0, 1.0}};
  const auto model = gp_fit(data, k, 1e-4);
  const auto preds = selftest::dense_posterior(data, k, 1e-4, q);
  auto cell_distance = [&](std::size_t i) {
    const int c = static_cast<int>(i % d), r = static_cast<int>(i / d);
    return std::max(std::abs(c - 5), std::abs(r - 5));
  };

  SearchHistory early;
  early.record(peak, 1.0);  // n = 1: xi = 1
  const auto e = select_next(model, q, early, msei());
  EXPECT_EQ(e.index, oracle::exhaustive_argmax(q, preds, early, msei()));
  EXPECT_GE(cell_distance(e.index), 2);

  // Fifty observations later the margin has cooled to about 0.027. The
  // padding observations sit off the lattice.
  SearchHistory late;
  late.record(peak, 1.0);
  for (int i = 1; i < 50; ++i) late.record({2.0 + i, 2.0}, 0.5);
  EXPECT_LT(ms_ei_xi(late, msei()), 0.03);
  const auto l = select_next(model, q, late, msei());
  EXPECT_EQ(l.index, oracle::exhaustive_argmax(q, preds, late, msei()));
  EXPECT_LE(cell_distance(l.index), 1);
}

TEST(Names, RoundTrip) {
  for (auto k : {AcquisitionKind::EI, AcquisitionKind::PI, AcquisitionKind::MSEI})
    EXPECT_EQ(parse_acquisition_kind(to_string(k)), k);
  EXPECT_THROW(parse_acquisition_kind("ucb"), InvalidArgument);
}
