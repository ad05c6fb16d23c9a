#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "psearch/solver/equilibrium.hpp"
#include "oracles.hpp"
#include "reference_values.hpp"

using namespace psearch;

namespace {

MarketParams baseline(double s = 0.05) {
  MarketParams m;
  m.n_firms = 2;
  m.valuation = 1.0;
  m.search_cost = s;
  m.cost_dist = DiscreteCost{{0.0, 0.4}, {0.5, 0.5}};
  return m;
}

double stable_q(double surplus, double s) {
  const auto roots = solve_active(surplus, s);
  EXPECT_FALSE(roots.empty());
  return roots.back().q;
}

}  // namespace

TEST(QStar, MatchesGoldenSectionOnQuadrature) {
  const double golden = oracle::golden_section_max(
      [](double q) { return oracle::benefit(q); }, 0.01, 0.99, 1e-12);
  // A flat maximum pins the argmax only to about sqrt(machine epsilon).
  EXPECT_NEAR(find_q_star(), golden, 1e-7);
  EXPECT_NEAR(find_q_star(), ref::kQStar, 1e-14);
  EXPECT_NEAR(benefit_factor(find_q_star()), ref::kPeakBenefit, 1e-15);
  EXPECT_NEAR(benefit_factor(find_q_star()), oracle::benefit(golden), 1e-12);
}

TEST(QStar, FirstOrderConditionAndCostIndependence) {
  const double q = find_q_star();
  EXPECT_NEAR(benefit_factor_deriv(q), 0.0, 1e-8);
  const double h = 1e-5;
  EXPECT_NEAR((benefit_factor(q + h) - benefit_factor(q - h)) / (2 * h), 0.0, 1e-8);
  for (double c : {0.0, 0.4, 0.9}) {
    const double argmax = oracle::golden_section_max(
        [&](double x) { return oracle::benefit(x, c, 1.0) * (1.0 - c); }, 0.01, 0.99, 1e-10);
    EXPECT_NEAR(argmax, q, 1e-6);
  }
}

TEST(Thresholds, Baseline) {
  const auto t = thresholds(baseline());
  ASSERT_EQ(t.s_bar_per_state.size(), 2u);
  EXPECT_NEAR(t.s_bar_per_state[0], ref::kPeakBenefit, 1e-15);
  EXPECT_NEAR(t.s_bar_per_state[1], 0.6 * ref::kPeakBenefit, 1e-15);
  EXPECT_NEAR(t.s_bar, 0.8 * ref::kPeakBenefit, 1e-15);
  EXPECT_NEAR(t.s_bar, 0.5 * (t.s_bar_per_state[0] + t.s_bar_per_state[1]), 1e-15);
  EXPECT_GT(t.s_bar_per_state[0], t.s_bar_per_state[1]);
  EXPECT_LT(0.05, t.s_bar);
  EXPECT_DOUBLE_EQ(t.s_bar_first, t.s_bar_per_state[0]);
  EXPECT_DOUBLE_EQ(t.s_bar_last, t.s_bar_per_state[1]);
}

TEST(Thresholds, SingleStateAndShift) {
  MarketParams m = baseline();
  m.cost_dist = CostDistribution::degenerate(0.0);
  EXPECT_NEAR(thresholds(m).s_bar, ref::kPeakBenefit, 1e-15);
  const auto base = thresholds(baseline());
  m = baseline();
  m.cost_dist = DiscreteCost{{0.1, 0.5}, {0.5, 0.5}};
  const auto shifted = thresholds(m);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(base.s_bar_per_state[k] - shifted.s_bar_per_state[k],
                0.1 * ref::kPeakBenefit, 1e-15);
  }
}

TEST(SolveActive, PooledRootsBaseline) {
  const auto roots = solve_active(0.8, 0.05);
  ASSERT_EQ(roots.size(), 2u);
  EXPECT_EQ(roots[0].stability, Stability::Unstable);
  EXPECT_EQ(roots[1].stability, Stability::Stable);
  EXPECT_NEAR(roots[0].q, ref::kQPooledUnstable, 1e-12);
  EXPECT_NEAR(roots[1].q, ref::kQPooledStable, 1e-12);
  EXPECT_NEAR(roots[1].q, 0.922, 5e-4);
  EXPECT_NEAR(roots[0].q, 0.24, 5e-3);
}

TEST(SolveActive, AgreesWithGridScanOfQuadrature) {
  // 1e-5 grid here; the acceptance run uses 1e-6.
  const auto scanned = oracle::scan_roots(
      [](double q) { return oracle::benefit(q) * 0.8 - 0.05; }, 1e-5, 1.0 - 1e-5, 1e-5);
  ASSERT_EQ(scanned.size(), 2u);
  const auto roots = solve_active(0.8, 0.05);
  EXPECT_NEAR(roots[0].q, scanned[0], 1e-6);
  EXPECT_NEAR(roots[1].q, scanned[1], 1e-6);
}

TEST(SolveActive, StabilityMatchesSlope) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> us(0.01, 0.99);
  for (int i = 0; i < 50; ++i) {
    const double surplus = 0.2 + us(gen);
    const double s = us(gen) * active_threshold(surplus);
    const auto roots = solve_active(surplus, s);
    ASSERT_EQ(roots.size(), 2u);
    const double h = 1e-7;
    auto slope = [&](double q) {
      return (benefit_factor(q + h) - benefit_factor(q - h)) / (2 * h);
    };
    EXPECT_GT(slope(roots[0].q), 0.0);
    EXPECT_LT(slope(roots[1].q), 0.0);
    for (const auto& r : roots) {
      EXPECT_NEAR(benefit_factor(r.q) * surplus, s, 1e-14);
    }
  }
}

TEST(SolveActive, ThresholdConsistency) {
  const double surplus = 0.8;
  const double bar = active_threshold(surplus);
  EXPECT_EQ(solve_active(surplus, bar - 2e-12).size(), 2u);
  EXPECT_EQ(solve_active(surplus, bar + 2e-12).size(), 0u);
  const auto tangent = solve_active(surplus, bar);
  ASSERT_EQ(tangent.size(), 1u);
  EXPECT_EQ(tangent[0].stability, Stability::Tangent);
  EXPECT_DOUBLE_EQ(tangent[0].q, find_q_star());
  EXPECT_TRUE(solve_active(surplus, 0.2).empty());
}

TEST(SolveActive, TinySearchCostRootsNearEnds) {
  const auto roots = solve_active(1.0, 1e-10);
  ASSERT_EQ(roots.size(), 2u);
  // Bisection stops at a 1e-14 bracket in q.
  EXPECT_NEAR(roots[0].q, 3e-10, 1e-14);
  EXPECT_GT(roots[1].q, 1.0 - 1e-8);
  EXPECT_NEAR(benefit_factor(roots[1].q), 1e-10, 1e-13);
}

TEST(SolveActive, Preconditions) {
  EXPECT_THROW(solve_active(0.0, 0.05), std::domain_error);
  EXPECT_THROW(solve_active(1.0, 0.0), std::domain_error);
}

TEST(SolveObserved, BaselineStateRoots) {
  const auto sets = solve_observed(baseline());
  ASSERT_EQ(sets.size(), 2u);
  ASSERT_EQ(sets[0].active.size(), 2u);
  ASSERT_EQ(sets[1].active.size(), 2u);
  EXPECT_NEAR(sets[0].active[1].q, ref::kQCost0Stable, 1e-12);
  EXPECT_NEAR(sets[0].active[0].q, ref::kQCost0Unstable, 1e-12);
  EXPECT_NEAR(sets[1].active[1].q, ref::kQCost04Stable, 1e-12);
  EXPECT_NEAR(sets[1].active[0].q, ref::kQCost04Unstable, 1e-12);
  EXPECT_EQ(sets[0].state, 0u);
  EXPECT_DOUBLE_EQ(sets[1].cost, 0.4);
  EXPECT_DOUBLE_EQ(sets[1].probability, 0.5);
  EXPECT_EQ(sets[1].active[1].laws.size(), 1u);
  EXPECT_DOUBLE_EQ(sets[1].active[1].laws[0].cost(), 0.4);
}

TEST(SolveObserved, DiamondOnlyAboveStateThreshold) {
  const auto sets = solve_observed(baseline(0.09));
  EXPECT_EQ(sets[0].active.size(), 2u);
  EXPECT_TRUE(sets[1].active.empty());
  EXPECT_TRUE(sets[1].diamond.exists);
  EXPECT_DOUBLE_EQ(sets[1].diamond.price, 1.0);
  EXPECT_NEAR(sets[0].active[1].q, ref::kQCost0HighSStable, 1e-12);
  EXPECT_NEAR(sets[0].active[0].q, ref::kQCost0HighSUnstable, 1e-12);
}

TEST(SolveUnobserved, Baseline) {
  const auto set = solve_unobserved(baseline());
  EXPECT_EQ(set.regime, Regime::Unobserved);
  EXPECT_FALSE(set.state.has_value());
  EXPECT_DOUBLE_EQ(set.cost, 0.2);
  ASSERT_EQ(set.active.size(), 2u);
  const auto& eq = set.active[1];
  EXPECT_NEAR(eq.q, ref::kQPooledStable, 1e-12);
  ASSERT_EQ(eq.laws.size(), 2u);
  EXPECT_DOUBLE_EQ(eq.laws[0].weight(), eq.laws[1].weight());
  EXPECT_NEAR(eq.weight, (1 - eq.q) / (2 * eq.q), 1e-15);
  EXPECT_EQ(set.selected(), &set.active[1]);
  EXPECT_TRUE(set.diamond.trade);
}

TEST(SolveUnobserved, SingleStateMatchesObserved) {
  MarketParams m = baseline();
  m.cost_dist = CostDistribution::degenerate(0.3);
  const auto u = solve_unobserved(m);
  const auto o = solve_observed(m);
  ASSERT_EQ(o.size(), 1u);
  ASSERT_EQ(u.active.size(), o[0].active.size());
  for (std::size_t i = 0; i < u.active.size(); ++i) {
    EXPECT_EQ(u.active[i].q, o[0].active[i].q);
    EXPECT_EQ(u.active[i].laws[0].support_low(), o[0].active[i].laws[0].support_low());
  }
  EXPECT_EQ(u.threshold, o[0].threshold);
}

TEST(SolveUnobserved, FirmCountDoesNotMatter) {
  MarketParams m = baseline();
  const double q2 = solve_unobserved(m).active[1].q;
  for (int n : {3, 5, 50}) {
    m.n_firms = n;
    EXPECT_EQ(solve_unobserved(m).active[1].q, q2);
  }
}

TEST(SolveUnobserved, DependsOnlyOnMeanCost) {
  MarketParams m = baseline();
  m.cost_dist = DiscreteCost{{0.1, 0.2, 0.3}, {0.25, 0.5, 0.25}};
  EXPECT_NEAR(solve_unobserved(m).active[1].q, ref::kQPooledStable, 1e-12);
  m.cost_dist = ContinuousCost::uniform(0.0, 0.4);
  EXPECT_NEAR(solve_unobserved(m).active[1].q, ref::kQPooledStable, 1e-12);
}

TEST(SolveUnobserved, ZeroSearchCostIsDiamondOnly) {
  const auto set = solve_unobserved(baseline(0.0));
  EXPECT_TRUE(set.active.empty());
  EXPECT_TRUE(set.diamond.exists);
}

TEST(SolveUnobserved, RejectsShoppers) {
  MarketParams m = baseline();
  m.shopper_share = 0.1;
  EXPECT_THROW(solve_unobserved(m), std::invalid_argument);
  EXPECT_THROW(solve_observed(m), std::invalid_argument);
}

TEST(ObservedMap, DecreasingAndConcaveInCost) {
  const int n = 100;
  std::vector<double> q(n);
  for (int i = 0; i < n; ++i) q[i] = stable_q(1.0 - 0.4 * i / (n - 1), 0.05);
  for (int i = 1; i < n; ++i) EXPECT_LT(q[i], q[i - 1]);
  for (int i = 1; i + 1 < n; ++i) EXPECT_LT(q[i - 1] - 2 * q[i] + q[i + 1], 0.0);
}

TEST(Continuous, UniformMatchesFineDiscretization) {
  MarketParams m = baseline();
  m.cost_dist = ContinuousCost::uniform(0.0, 0.4);
  const double q_cont = solve_unobserved(m).active[1].q;
  std::vector<double> costs, probs;
  for (int i = 0; i < 1000; ++i) {
    costs.push_back(0.4 * (i + 0.5) / 1000.0);
    probs.push_back(1.0 / 1000.0);
  }
  m.cost_dist = DiscreteCost{costs, probs};
  EXPECT_NEAR(solve_unobserved(m).active[1].q, q_cont, 1e-8);
}

TEST(Continuous, ObservedNodesAndThresholdIntegral) {
  MarketParams m = baseline();
  m.cost_dist = ContinuousCost::tabulated({0.0, 0.5, 1.0}, {0.0, 0.1, 0.5});
  SolverOptions opts;
  opts.quadrature_nodes = 16;
  const auto sets = solve_observed(m, opts);
  ASSERT_EQ(sets.size(), 32u);
  double weight = 0.0, mean = 0.0;
  for (const auto& set : sets) {
    weight += set.probability;
    mean += set.probability * set.cost;
  }
  EXPECT_NEAR(weight, 1.0, 1e-14);
  EXPECT_NEAR(mean, 0.175, 1e-14);
  const auto t = thresholds(m, opts);
  double integral = 0.0;
  for (std::size_t i = 0; i < sets.size(); ++i) integral += sets[i].probability * t.s_bar_per_state[i];
  EXPECT_NEAR(integral, t.s_bar, 1e-14);
}

TEST(Shoppers, FixedPoints) {
  MarketParams m = baseline();
  m.shopper_share = 0.1;
  const auto sol = solve_shoppers(m);
  ASSERT_FALSE(sol.unobserved.active.empty());
  EXPECT_NEAR(sol.unobserved.selected()->q, ref::kShopperQPooled, 1e-12);
  EXPECT_NEAR(sol.observed[0].selected()->q, ref::kShopperQCost0, 1e-12);
  EXPECT_NEAR(sol.observed[1].selected()->q, ref::kShopperQCost04, 1e-12);
  EXPECT_FALSE(sol.unobserved.diamond.exists);
  for (const auto& eq : sol.unobserved.active) {
    EXPECT_NEAR(shopper_benefit_factor(eq.weight) * 0.8, 0.05, 1e-14);
  }
}

TEST(Shoppers, ContinuityAtZeroShare) {
  MarketParams m = baseline();
  m.shopper_share = 1e-6;
  const double q = solve_shoppers(m).unobserved.selected()->q;
  EXPECT_LT(std::abs(q - ref::kQPooledStable), 1e-4);
  EXPECT_NEAR(q, ref::kShopperQTiny, 1e-12);
  double prev = std::abs(q - ref::kQPooledStable);
  for (double lambda : {1e-7, 1e-8, 1e-9}) {
    m.shopper_share = lambda;
    const double gap = std::abs(solve_shoppers(m).unobserved.selected()->q - ref::kQPooledStable);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
}

TEST(Shoppers, LargeShareLeavesOnlyStableRoot) {
  // Shoppers keep the benefit positive at q = 0, so no unstable root.
  const double lambda = 0.5;
  const double at_zero = shopper_benefit_factor(1.0 / (2 * lambda / (1 - lambda)));
  const auto roots = solve_active_shoppers(1.0, 0.5 * at_zero, lambda);
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_EQ(roots[0].stability, Stability::Stable);
  EXPECT_TRUE(solve_active_shoppers(1.0, 1.5 * at_zero, lambda).empty());
}

TEST(Shoppers, Preconditions) {
  EXPECT_THROW(solve_shoppers(baseline()), std::invalid_argument);
  EXPECT_THROW(solve_active_shoppers(1.0, 0.05, 0.0), std::domain_error);
}

TEST(Participation, FirstFreeAlwaysParticipates) {
  const auto p = participation_check(0.01, 1.0, 10.0, SearchCostMode::FirstFree);
  EXPECT_TRUE(p.participates);
  EXPECT_NEAR(p.payoff, cs_factor(0.01), 1e-15);
}

TEST(Participation, StableAllCostlyEquilibriaParticipate) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double surplus = 0.1 + u(gen);
    const double s = (1e-6 + u(gen)) * active_threshold(surplus) / (1.0 + 1e-6);
    const auto roots = solve_active(surplus, s);
    ASSERT_FALSE(roots.empty());
    const auto p = participation_check(roots.back().q, surplus, s, SearchCostMode::AllCostly);
    EXPECT_TRUE(p.participates) << surplus << ' ' << s;
    EXPECT_GT(p.payoff, 0.0);
  }
}

TEST(Participation, MarginNonNegativeOnLogGrid) {
  for (int i = 0; i < 100; ++i) {
    const double eta = std::pow(10.0, -2.0 + 4.0 * i / 99.0);
    const double lhs = (1 + 2 * eta) / (2 * eta * (1 + eta));
    const double rhs = std::log(1 + 1 / eta);
    EXPECT_GE(participation_margin(eta), 0.0) << eta;
    EXPECT_NEAR(participation_margin(eta), lhs - rhs, 1e-12 * std::max(1.0, lhs));
  }
  EXPECT_THROW(participation_margin(0.0), std::domain_error);
}
