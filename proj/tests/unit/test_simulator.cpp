#include <cmath>
#include <cstring>
#include <stdexcept>

#include <gtest/gtest.h>

#include "psearch/sim/ks.hpp"
#include "psearch/sim/rng.hpp"
#include "psearch/sim/simulator.hpp"
#include "reference_values.hpp"

using namespace psearch;
using namespace psearch::sim;

namespace {

MarketParams baseline() {
  MarketParams m;
  m.search_cost = 0.05;
  m.cost_dist = DiscreteCost{{0.0, 0.4}, {0.5, 0.5}};
  return m;
}

EquilibriumSelection pooled_stable() {
  return *select_equilibrium(solve_unobserved(baseline()), Stability::Stable);
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool identical(const SimulationResult& a, const SimulationResult& b) {
  bool same = a.one_search == b.one_search && a.two_search == b.two_search &&
              same_bits(a.profit_per_firm.mean, b.profit_per_firm.mean) &&
              same_bits(a.profit_per_firm.std_error, b.profit_per_firm.std_error) &&
              same_bits(a.transaction_price.mean, b.transaction_price.mean) &&
              same_bits(a.second_search_benefit.mean, b.second_search_benefit.mean) &&
              same_bits(a.second_search_benefit.std_error, b.second_search_benefit.std_error) &&
              same_bits(a.consumer_surplus.mean, b.consumer_surplus.mean) &&
              a.firm_profits.size() == b.firm_profits.size();
  for (std::size_t j = 0; same && j < a.firm_profits.size(); ++j) {
    same = same_bits(a.firm_profits[j], b.firm_profits[j]);
  }
  return same;
}

}  // namespace

TEST(StreamRng, Deterministic) {
  StreamRng a(7, 3), b(7, 3), c(7, 4);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
  EXPECT_NE(StreamRng(7, 3).uniform(), c.uniform());
  StreamRng d(1, 1);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(d.below(5), 5u);
}

TEST(SelectEquilibrium, PicksRequestedRoot) {
  const auto set = solve_unobserved(baseline());
  EXPECT_NEAR(select_equilibrium(set, Stability::Stable)->q, ref::kQPooledStable, 1e-12);
  EXPECT_NEAR(select_equilibrium(set, Stability::Unstable)->q, ref::kQPooledUnstable, 1e-12);
  MarketParams high = baseline();
  high.search_cost = 0.2;
  EXPECT_FALSE(select_equilibrium(solve_unobserved(high), Stability::Stable));
}

TEST(Simulate, BaselineWithinThreeStandardErrors) {
  const auto sel = pooled_stable();
  SimulationConfig cfg;
  cfg.seed = 2024;
  cfg.n_rounds = 1000000;
  const auto r = simulate_market(baseline(), sel, cfg);
  const auto a = analytic_moments(baseline(), sel);
  EXPECT_NEAR(a.profit_per_firm, (1 - sel.q) * 0.8 / 2, 1e-15);
  EXPECT_NEAR(a.second_search_benefit, 0.05, 1e-14);
  EXPECT_LT(std::abs(r.profit_per_firm.mean - a.profit_per_firm), 3 * r.profit_per_firm.std_error);
  EXPECT_LT(std::abs(r.transaction_price.mean - a.transaction_price),
            3 * r.transaction_price.std_error);
  EXPECT_LT(std::abs(r.second_search_benefit.mean - a.second_search_benefit),
            3 * r.second_search_benefit.std_error);
  EXPECT_LT(std::abs(r.consumer_surplus.mean - a.consumer_surplus),
            3 * r.consumer_surplus.std_error);
  ASSERT_EQ(r.per_state.size(), 2u);
  for (const auto& st : r.per_state) {
    const double expected = (1 - sel.q) * (1 - st.cost) / 2;
    EXPECT_LT(std::abs(st.profit_per_firm.mean - expected), 3 * st.profit_per_firm.std_error);
  }
  EXPECT_EQ(r.one_search + r.two_search, r.consumers);
  EXPECT_EQ(r.consumers, 1000000u);
  const auto z = verify_indifference(r, 0.05);
  EXPECT_FALSE(z.degenerate);
  EXPECT_LE(std::abs(z.z), 3.0);
}

TEST(Simulate, FirmsEarnTheSameWithinSamplingError) {
  SimulationConfig cfg;
  cfg.seed = 9;
  cfg.n_rounds = 400000;
  const auto r = simulate_market(baseline(), pooled_stable(), cfg);
  const double se = r.profit_per_firm.std_error * std::sqrt(2.0) * 2.0;
  EXPECT_LT(std::abs(r.firm_profits[0] - r.firm_profits[1]), 4 * se);
}

TEST(Simulate, BitIdenticalAcrossThreadCounts) {
  SimulationConfig cfg;
  cfg.seed = 77;
  cfg.n_rounds = 100000;
  cfg.consumers_per_round = 3;
  const auto sel = pooled_stable();
  cfg.threads = 1;
  const auto one = simulate_market(baseline(), sel, cfg);
  for (unsigned t : {2u, 3u, 8u}) {
    cfg.threads = t;
    EXPECT_TRUE(identical(one, simulate_market(baseline(), sel, cfg))) << t;
  }
  cfg.seed = 78;
  EXPECT_FALSE(identical(one, simulate_market(baseline(), sel, cfg)));
}

TEST(Simulate, PriceLawKolmogorovSmirnov) {
  SimulationConfig cfg;
  cfg.seed = 5;
  cfg.n_rounds = 500000;
  cfg.record_prices = true;
  const auto sel = pooled_stable();
  const auto r = simulate_market(baseline(), sel, cfg);
  ASSERT_EQ(r.posted_prices.size(), 2u);
  const double costs[2] = {0.0, 0.4};
  for (int k = 0; k < 2; ++k) {
    const PriceLaw law(costs[k], shopper_weight(sel.q, 0.0), 1.0);
    EXPECT_GT(r.posted_prices[k].size(), 400000u);
    EXPECT_LT(ks_distance(r.posted_prices[k], [&](double p) { return law.cdf(p); }), 0.005);
  }
}

TEST(Simulate, OffEquilibriumIntensityRaisesBenefit) {
  auto sel = pooled_stable();
  sel.q -= 0.1;
  SimulationConfig cfg;
  cfg.seed = 3;
  cfg.n_rounds = 200000;
  const auto r = simulate_market(baseline(), sel, cfg);
  const auto z = verify_indifference(r, 0.05);
  EXPECT_GT(z.z, 3.0);
}

TEST(Simulate, NearFullComparisonPricesApproachCost) {
  MarketParams m = baseline();
  m.cost_dist = CostDistribution::degenerate(0.3);
  EquilibriumSelection sel{Regime::Unobserved, std::nullopt, 1.0 - 1e-9, Stability::Stable};
  SimulationConfig cfg;
  cfg.n_rounds = 10000;
  const auto r = simulate_market(m, sel, cfg);
  EXPECT_NEAR(r.transaction_price.mean, 0.3, 1e-7);
}

TEST(Simulate, ObservedStateAndShoppers) {
  MarketParams m = baseline();
  m.shopper_share = 0.1;
  const auto sol = solve_shoppers(m);
  const auto sel = *select_equilibrium(sol.observed[1], Stability::Stable);
  SimulationConfig cfg;
  cfg.seed = 11;
  cfg.n_rounds = 300000;
  const auto r = simulate_market(m, sel, cfg);
  const auto a = analytic_moments(m, sel);
  EXPECT_NEAR(a.profit_per_firm, 0.9 * (1 - sel.q) * 0.6 / 2, 1e-15);
  EXPECT_LT(std::abs(r.profit_per_firm.mean - a.profit_per_firm), 3 * r.profit_per_firm.std_error);
  EXPECT_LT(std::abs(r.second_search_benefit.mean - 0.05), 3 * r.second_search_benefit.std_error);
  EXPECT_TRUE(r.per_state.empty());
}

TEST(Simulate, ContinuousCosts) {
  MarketParams m = baseline();
  m.cost_dist = ContinuousCost::uniform(0.0, 0.4);
  const auto sel = *select_equilibrium(solve_unobserved(m), Stability::Stable);
  SimulationConfig cfg;
  cfg.n_rounds = 300000;
  const auto r = simulate_market(m, sel, cfg);
  const auto a = analytic_moments(m, sel);
  EXPECT_NEAR(a.profit_per_firm, (1 - sel.q) * 0.8 / 2, 1e-14);
  EXPECT_LT(std::abs(r.profit_per_firm.mean - a.profit_per_firm), 3 * r.profit_per_firm.std_error);
}

TEST(Simulate, RejectsBadInput) {
  SimulationConfig cfg;
  cfg.n_rounds = 0;
  EXPECT_THROW(simulate_market(baseline(), pooled_stable(), cfg), std::invalid_argument);
  cfg.n_rounds = 10;
  auto sel = pooled_stable();
  sel.regime = Regime::Observed;
  EXPECT_THROW(simulate_market(baseline(), sel, cfg), std::invalid_argument);
  sel.q = 0.0;
  sel.regime = Regime::Unobserved;
  EXPECT_THROW(simulate_market(baseline(), sel, cfg), std::invalid_argument);
}

TEST(EqualProfit, ConstantAcrossSupport) {
  const auto set = solve_unobserved(baseline());
  for (const auto& eq : set.active) {
    for (const auto& law : eq.laws) {
      EXPECT_LT(verify_equal_profit(baseline(), eq.q, law, 1000), 1e-10);
    }
  }
  MarketParams m = baseline();
  m.shopper_share = 0.3;
  for (const auto& set_k : solve_shoppers(m).observed) {
    for (const auto& eq : set_k.active) {
      const auto& law = eq.laws[0];
      EXPECT_LT(verify_equal_profit(m, eq.q, law, 1000), 1e-10);
      // The constant is the profit at the monopoly price.
      const double at_v = (1 - 0.3) * (1 - eq.q) / 2 * (1 - law.cost());
      EXPECT_NEAR(at_v, (1 - 0.3) * (1 - eq.q) * (1 - set_k.cost) / 2, 1e-15);
    }
  }
}

TEST(Indifference, AnalyticBenefitGivesZero) {
  SimulationResult r;
  r.rounds = 100;
  r.second_search_benefit = {0.05, 0.001};
  EXPECT_DOUBLE_EQ(verify_indifference(r, 0.05).z, 0.0);
  r.rounds = 1;
  EXPECT_TRUE(verify_indifference(r, 0.05).degenerate);
}
