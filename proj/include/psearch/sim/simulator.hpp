#ifndef PSEARCH_SIM_SIMULATOR_HPP
#define PSEARCH_SIM_SIMULATOR_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "psearch/core/factors.hpp"
#include "psearch/core/model.hpp"
#include "psearch/core/price_law.hpp"
#include "psearch/sim/rng.hpp"
#include "psearch/solver/equilibrium.hpp"

namespace psearch::sim {

struct SimulationConfig {
  std::uint64_t seed = 1;
  std::size_t n_rounds = 1;
  std::size_t consumers_per_round = 1;
  unsigned threads = 1;
  /// Keep every posted price, grouped by discrete cost state.
  bool record_prices = false;

  void validate() const {
    if (n_rounds < 1) throw std::invalid_argument("n_rounds must be >= 1");
    if (consumers_per_round < 1) {
      throw std::invalid_argument("consumers_per_round must be >= 1");
    }
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  }
};

/// The single active equilibrium a simulation plays out.
struct EquilibriumSelection {
  Regime regime = Regime::Unobserved;
  /// Cost state the observed regime is conditioned on.
  std::optional<std::size_t> state;
  double q = 0.0;
  Stability stability = Stability::Stable;
};

/// Picks the stable (or tangent) or unstable root of an equilibrium set.
inline std::optional<EquilibriumSelection> select_equilibrium(
    const EquilibriumSet& set, Stability wanted) {
  for (const auto& eq : set.active) {
    const bool match = eq.stability == wanted ||
                       (wanted == Stability::Stable &&
                        eq.stability == Stability::Tangent);
    if (match) return EquilibriumSelection{set.regime, set.state, eq.q, eq.stability};
  }
  return std::nullopt;
}

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct StateEstimate {
  double cost = 0.0;
  std::uint64_t rounds = 0;
  Estimate profit_per_firm;
};

struct SimulationResult {
  EquilibriumSelection equilibrium;
  Estimate profit_per_firm;
  Estimate transaction_price;
  /// First quote minus the lower of two quotes, for every consumer.
  Estimate second_search_benefit;
  Estimate consumer_surplus;
  /// Mean profit per consumer earned by each firm.
  std::vector<double> firm_profits;
  /// Discrete unobserved simulations only.
  std::vector<StateEstimate> per_state;
  std::uint64_t one_search = 0;
  /// Includes shoppers.
  std::uint64_t two_search = 0;
  std::uint64_t consumers = 0;
  std::uint64_t rounds = 0;
  /// Posted prices by cost state when recording was requested.
  std::vector<std::vector<double>> posted_prices;
};

/// Population values the simulation estimates.
struct AnalyticMoments {
  double profit_per_firm = 0.0;
  double transaction_price = 0.0;
  double second_search_benefit = 0.0;
  double consumer_surplus = 0.0;
};

namespace detail {

struct Welford {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }

  static Welford merge(const Welford& a, const Welford& b) {
    if (a.n == 0) return b;
    if (b.n == 0) return a;
    Welford out;
    out.n = a.n + b.n;
    const double na = static_cast<double>(a.n);
    const double nb = static_cast<double>(b.n);
    const double delta = b.mean - a.mean;
    out.mean = a.mean + delta * nb / static_cast<double>(out.n);
    out.m2 = a.m2 + b.m2 + delta * delta * na * nb / static_cast<double>(out.n);
    return out;
  }

  Estimate estimate() const {
    if (n < 2) return {mean, 0.0};
    const double var = m2 / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
  }
};

struct BlockStats {
  Welford profit, price, benefit, surplus;
  std::vector<Welford> state_profit;
  std::vector<double> firm_profit_sum;
  std::uint64_t one_search = 0, two_search = 0;
  std::vector<std::vector<double>> prices;

  static BlockStats merge(const BlockStats& a, const BlockStats& b) {
    BlockStats out;
    out.profit = Welford::merge(a.profit, b.profit);
    out.price = Welford::merge(a.price, b.price);
    out.benefit = Welford::merge(a.benefit, b.benefit);
    out.surplus = Welford::merge(a.surplus, b.surplus);
    out.state_profit.resize(a.state_profit.size());
    for (std::size_t k = 0; k < a.state_profit.size(); ++k) {
      out.state_profit[k] = Welford::merge(a.state_profit[k], b.state_profit[k]);
    }
    out.firm_profit_sum.resize(a.firm_profit_sum.size());
    for (std::size_t j = 0; j < a.firm_profit_sum.size(); ++j) {
      out.firm_profit_sum[j] = a.firm_profit_sum[j] + b.firm_profit_sum[j];
    }
    out.one_search = a.one_search + b.one_search;
    out.two_search = a.two_search + b.two_search;
    return out;
  }
};

// Pairwise reduction over blocks in index order.
inline BlockStats reduce(const std::vector<BlockStats>& blocks, std::size_t lo,
                         std::size_t hi) {
  if (hi - lo == 1) {
    BlockStats copy = blocks[lo];
    copy.prices.clear();
    return copy;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return BlockStats::merge(reduce(blocks, lo, mid), reduce(blocks, mid, hi));
}

inline constexpr std::size_t kRoundsPerBlock = 1024;

inline double quote_spend(bool two_quotes, bool shopper, double s,
                          SearchCostMode mode) {
  if (shopper) return 0.0;
  if (mode == SearchCostMode::FirstFree) return two_quotes ? s : 0.0;
  return two_quotes ? 2.0 * s : s;
}

}  // namespace detail

/// Plays out an active equilibrium round by round: a cost is drawn, every
/// firm posts a price from its equilibrium law, and consumers sample one or
/// two distinct firms uniformly and buy at the lowest price seen. Round r
/// draws only from stream r, and blocks of rounds are reduced in a fixed
/// order, so the result is bit-identical for any thread count.
inline SimulationResult simulate_market(const MarketParams& params,
                                        const EquilibriumSelection& equilibrium,
                                        const SimulationConfig& config) {
  params.validate();
  config.validate();
  if (!(equilibrium.q > 0.0 && equilibrium.q < 1.0)) {
    throw std::invalid_argument("simulation needs an active-search equilibrium");
  }
  const auto& dist = params.cost_dist;
  const bool observed = equilibrium.regime == Regime::Observed;
  if (observed && (!dist.is_discrete() || !equilibrium.state ||
                   *equilibrium.state >= dist.discrete().costs.size())) {
    throw std::invalid_argument("observed simulation needs a discrete cost state");
  }
  const std::size_t n_states =
      dist.is_discrete() ? dist.discrete().costs.size() : 0;
  const bool track_states = !observed && n_states > 0;

  const int n_firms = params.n_firms;
  const double v = params.valuation;
  const double s = params.search_cost;
  const double lambda = params.shopper_share;
  const double q = equilibrium.q;
  const double weight = shopper_weight(q, lambda);
  const auto mode = params.search_cost_mode;
  const std::size_t m = config.consumers_per_round;
  const std::size_t n_blocks =
      (config.n_rounds + detail::kRoundsPerBlock - 1) / detail::kRoundsPerBlock;

  std::vector<detail::BlockStats> blocks(n_blocks);

  auto run_block = [&](std::size_t b) {
    detail::BlockStats& out = blocks[b];
    out.state_profit.resize(track_states ? n_states : 0);
    out.firm_profit_sum.assign(static_cast<std::size_t>(n_firms), 0.0);
    if (config.record_prices) out.prices.resize(std::max<std::size_t>(n_states, 1));
    std::vector<double> prices(static_cast<std::size_t>(n_firms));
    std::vector<double> round_firm(static_cast<std::size_t>(n_firms));

    const std::size_t first = b * detail::kRoundsPerBlock;
    const std::size_t last =
        std::min(config.n_rounds, first + detail::kRoundsPerBlock);
    for (std::size_t r = first; r < last; ++r) {
      StreamRng rng(config.seed, r);
      std::size_t state = 0;
      double cost;
      if (observed) {
        state = *equilibrium.state;
        cost = dist.discrete().costs[state];
      } else if (n_states > 0) {
        state = dist.sample_state(rng.uniform());
        cost = dist.discrete().costs[state];
      } else {
        cost = dist.sample(rng.uniform());
      }
      const PriceLaw law(cost, weight, v);
      for (auto& p : prices) {
        p = law.quantile(rng.uniform());
        if (config.record_prices) out.prices[n_states > 0 ? state : 0].push_back(p);
      }

      std::fill(round_firm.begin(), round_firm.end(), 0.0);
      double sum_margin = 0.0, sum_price = 0.0, sum_benefit = 0.0,
             sum_surplus = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const bool shopper = lambda > 0.0 && rng.uniform() < lambda;
        const bool two_quotes = shopper || rng.uniform() < q;
        const auto a = rng.below(static_cast<std::uint64_t>(n_firms));
        auto other = rng.below(static_cast<std::uint64_t>(n_firms - 1));
        if (other >= a) ++other;
        const double p1 = prices[a];
        const double p2 = prices[other];
        const double low = std::min(p1, p2);
        sum_benefit += p1 - low;
        const auto seller = (two_quotes && p2 < p1) ? other : a;
        const double paid = prices[seller];
        round_firm[seller] += paid - cost;
        sum_margin += paid - cost;
        sum_price += paid;
        sum_surplus += v - paid - detail::quote_spend(two_quotes, shopper, s, mode);
        if (two_quotes) {
          ++out.two_search;
        } else {
          ++out.one_search;
        }
      }
      const double md = static_cast<double>(m);
      const double round_profit = sum_margin / (md * n_firms);
      out.profit.add(round_profit);
      out.price.add(sum_price / md);
      out.benefit.add(sum_benefit / md);
      out.surplus.add(sum_surplus / md);
      if (track_states) out.state_profit[state].add(round_profit);
      for (std::size_t j = 0; j < round_firm.size(); ++j) {
        out.firm_profit_sum[j] += round_firm[j] / md;
      }
    }
  };

  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(config.threads, n_blocks));
  if (n_threads <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < n_threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t b = next++; b < n_blocks; b = next++) run_block(b);
      });
    }
  }

  const auto total = detail::reduce(blocks, 0, n_blocks);
  SimulationResult result;
  result.equilibrium = equilibrium;
  result.rounds = config.n_rounds;
  result.consumers = total.one_search + total.two_search;
  result.one_search = total.one_search;
  result.two_search = total.two_search;
  result.profit_per_firm = total.profit.estimate();
  result.transaction_price = total.price.estimate();
  result.second_search_benefit = total.benefit.estimate();
  result.consumer_surplus = total.surplus.estimate();
  for (double sum : total.firm_profit_sum) {
    result.firm_profits.push_back(sum / static_cast<double>(config.n_rounds));
  }
  for (std::size_t k = 0; k < total.state_profit.size(); ++k) {
    result.per_state.push_back({dist.discrete().costs[k], total.state_profit[k].n,
                                total.state_profit[k].estimate()});
  }
  if (config.record_prices) {
    result.posted_prices.resize(std::max<std::size_t>(n_states, 1));
    for (const auto& block : blocks) {
      for (std::size_t k = 0; k < block.prices.size(); ++k) {
        auto& dst = result.posted_prices[k];
        dst.insert(dst.end(), block.prices[k].begin(), block.prices[k].end());
      }
    }
  }
  return result;
}

/// Expected values of the simulated statistics at the selected intensity,
/// which need not be an equilibrium.
inline AnalyticMoments analytic_moments(const MarketParams& params,
                                        const EquilibriumSelection& equilibrium,
                                        const SolverOptions& options = {}) {
  const double v = params.valuation;
  const double lambda = params.shopper_share;
  const double q = equilibrium.q;
  const double weight = shopper_weight(q, lambda);
  std::vector<CostState> states;
  if (equilibrium.regime == Regime::Observed) {
    states.push_back({params.cost_dist.discrete().costs.at(*equilibrium.state), 1.0});
  } else {
    states = cost_states(params.cost_dist, options);
  }
  const double captive = (1.0 - lambda) * (1.0 - q);
  const double spend =
      (1.0 - lambda) * params.search_cost *
      (params.search_cost_mode == SearchCostMode::FirstFree ? q : 1.0 + q);
  AnalyticMoments out;
  for (const auto& st : states) {
    const double surplus = v - st.cost;
    const double price = st.cost + captive * surplus;
    out.profit_per_firm += st.probability * captive * surplus / params.n_firms;
    out.transaction_price += st.probability * price;
    out.second_search_benefit +=
        st.probability * shopper_benefit_factor(weight) * surplus;
    out.consumer_surplus += st.probability * (v - price - spend);
  }
  return out;
}

/// Largest deviation of a firm's expected profit across a price grid on the
/// support from its value at the monopoly price, (1-lambda)(1-q)(v-c)/N.
inline double verify_equal_profit(const MarketParams& params, double q,
                                  const PriceLaw& law, std::size_t grid_size) {
  if (grid_size < 2) throw std::invalid_argument("grid_size must be >= 2");
  const double lambda = params.shopper_share;
  const double n = params.n_firms;
  const double c = law.cost();
  const double v = law.support_high();
  const double captive = (1.0 - lambda) * (1.0 - q) / n;
  const double comparing = 2.0 * ((1.0 - lambda) * q + lambda) / n;
  const double reference = captive * (v - c);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(grid_size - 1);
    const double p = std::lerp(law.support_low(), v, t);
    const double profit = (captive + comparing * law.ccdf(p)) * (p - c);
    worst = std::max(worst, std::abs(profit - reference));
  }
  return worst;
}

struct IndifferenceCheck {
  double z = 0.0;
  /// Standard error unusable (fewer than two rounds or zero variance).
  bool degenerate = false;
};

/// z-score of the simulated second-search benefit against the search cost.
inline IndifferenceCheck verify_indifference(const SimulationResult& result,
                                             double s) {
  const auto& b = result.second_search_benefit;
  if (result.rounds < 2 || !(b.std_error > 0.0)) {
    return {std::numeric_limits<double>::quiet_NaN(), true};
  }
  return {(b.mean - s) / b.std_error, false};
}

}  // namespace psearch::sim

#endif  // PSEARCH_SIM_SIMULATOR_HPP
