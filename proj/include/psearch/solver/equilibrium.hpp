#ifndef PSEARCH_SOLVER_EQUILIBRIUM_HPP
#define PSEARCH_SOLVER_EQUILIBRIUM_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "psearch/core/factors.hpp"
#include "psearch/core/model.hpp"
#include "psearch/core/price_law.hpp"
#include "psearch/numeric/quadrature.hpp"
#include "psearch/numeric/roots.hpp"

namespace psearch {

enum class Regime { Unobserved, Observed };

/// Tangent marks the single root at s equal to the threshold.
enum class Stability { Stable, Unstable, Tangent };

inline const char* to_string(Regime r) {
  return r == Regime::Unobserved ? "unobserved" : "observed";
}

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Tangent: return "tangent";
  }
  return "?";
}

struct SolverOptions {
  /// Bracket width at which bisection stops.
  double tolerance = 1e-14;
  /// Gauss-Legendre nodes per quantile-table segment for continuous costs.
  int quadrature_nodes = 64;
  /// |s - threshold| at or below this reports a single tangency root.
  double tangency_tolerance = 1e-12;
};

struct ActiveRoot {
  double q;
  Stability stability;
};

/// Everyone samples one firm and pays v; under AllCostly search nobody
/// samples and there is no trade. `exists` is false with shoppers present.
struct DiamondRecord {
  double price;
  bool trade;
  bool exists;
};

struct ActiveEquilibrium {
  double q;
  Stability stability;
  /// Price-law weight shared by every cost state.
  double weight;
  /// One law per cost state; a single law in the observed regime.
  std::vector<PriceLaw> laws;
};

struct EquilibriumSet {
  Regime regime = Regime::Unobserved;
  /// Cost-state index in the observed regime.
  std::optional<std::size_t> state;
  /// c_k in the observed regime, E[c] in the unobserved one.
  double cost = 0.0;
  /// f_k (or quadrature weight) in the observed regime, 1 otherwise.
  double probability = 1.0;
  /// Search cost at which active search stops being an equilibrium.
  double threshold = 0.0;
  DiamondRecord diamond{};
  /// Ascending in q.
  std::vector<ActiveEquilibrium> active;

  /// Highest-intensity active equilibrium (stable or tangent), if any.
  const ActiveEquilibrium* selected() const {
    return active.empty() ? nullptr : &active.back();
  }
};

struct CostState {
  double cost;
  double probability;
};

struct Thresholds {
  double q_star;
  /// benefit_factor(q_star).
  double peak_benefit;
  std::vector<double> s_bar_per_state;
  double s_bar;
  /// Thresholds at the lowest and highest cost in the support.
  double s_bar_first;
  double s_bar_last;
};

/// Discrete states as given; continuous laws become composite
/// Gauss-Legendre nodes in the quantile level, one rule per table segment.
inline std::vector<CostState> cost_states(const CostDistribution& dist,
                                          const SolverOptions& options = {}) {
  std::vector<CostState> out;
  if (dist.is_discrete()) {
    const auto& d = dist.discrete();
    for (std::size_t k = 0; k < d.costs.size(); ++k) {
      out.push_back({d.costs[k], d.probs[k]});
    }
    return out;
  }
  const auto& c = dist.continuous();
  const numeric::GaussLegendre rule(options.quadrature_nodes);
  for (std::size_t i = 0; i + 1 < c.levels.size(); ++i) {
    for (const auto& [u, w] : rule.on(c.levels[i], c.levels[i + 1])) {
      out.push_back({c.quantile(u), w});
    }
  }
  return out;
}

/// Unique maximizer of benefit_factor on (0, 1); it does not depend on cost.
inline double find_q_star() {
  static const double q_star = numeric::bisect(
      [](double q) { return benefit_factor_deriv(q); }, 0.01, 0.99, 0.0);
  return q_star;
}

inline Thresholds thresholds(const MarketParams& params,
                             const SolverOptions& options = {}) {
  params.validate();
  Thresholds t{};
  t.q_star = find_q_star();
  t.peak_benefit = benefit_factor(t.q_star);
  const double v = params.valuation;
  for (const auto& st : cost_states(params.cost_dist, options)) {
    t.s_bar_per_state.push_back((v - st.cost) * t.peak_benefit);
  }
  t.s_bar = (v - params.cost_dist.mean()) * t.peak_benefit;
  t.s_bar_first = (v - params.cost_dist.min_cost()) * t.peak_benefit;
  t.s_bar_last = (v - params.cost_dist.max_cost()) * t.peak_benefit;
  return t;
}

namespace detail {

inline constexpr double kLowestIntensity = std::numeric_limits<double>::min();
// Largest double below one.
inline constexpr double kHighestIntensity =
    1.0 - std::numeric_limits<double>::epsilon() / 2.0;

// Roots of a single-peaked curve h(q) - s on (0, 1) with its peak at
// q_peak (q_peak == 0 means h is decreasing). `at_zero` is the limit of h
// at q -> 0.
template <class H>
std::vector<ActiveRoot> single_peak_roots(H&& h, double q_peak, double at_zero,
                                          double s,
                                          const SolverOptions& options) {
  auto excess = [&](double q) { return h(q) - s; };
  const double peak = q_peak > 0.0 ? h(q_peak) : at_zero;
  if (s > peak + options.tangency_tolerance) return {};
  if (q_peak > 0.0 && std::abs(s - peak) <= options.tangency_tolerance) {
    return {{q_peak, Stability::Tangent}};
  }

  std::vector<ActiveRoot> roots;
  if (q_peak > 0.0 && at_zero < s) {
    roots.push_back({numeric::bisect(excess, kLowestIntensity, q_peak,
                                     options.tolerance),
                     Stability::Unstable});
  }
  const double lo = q_peak > 0.0 ? q_peak : kLowestIntensity;
  if (!(excess(lo) > 0.0)) return roots;
  if (excess(kHighestIntensity) >= 0.0) {
    roots.push_back({kHighestIntensity, Stability::Stable});
  } else {
    roots.push_back({numeric::bisect(excess, lo, kHighestIntensity,
                                     options.tolerance),
                     Stability::Stable});
  }
  return roots;
}

inline void require_positive_search(double surplus, double s) {
  if (!(surplus > 0.0)) throw std::domain_error("surplus must be positive");
  if (!(s > 0.0)) throw std::domain_error("search cost must be positive");
}

}  // namespace detail

/// Largest search cost supporting active search for a given surplus.
inline double active_threshold(double effective_surplus) {
  return effective_surplus * benefit_factor(find_q_star());
}

/// Threshold with shoppers: the supremum of the benefit curve over (0, 1).
inline double active_threshold_shoppers(double effective_surplus,
                                        double lambda) {
  const double phi = 2.0 * lambda / (1.0 - lambda);
  const double q_star = find_q_star();
  const double peak_weight = (1.0 - q_star) / (2.0 * q_star);
  return effective_surplus *
         shopper_benefit_factor(std::min(peak_weight, 1.0 / phi));
}

/// Roots of benefit_factor(q) * surplus = s, ascending. Two roots below the
/// threshold (smaller unstable, larger stable), one tangency root at it,
/// none above it.
inline std::vector<ActiveRoot> solve_active(double effective_surplus, double s,
                                            const SolverOptions& options = {}) {
  detail::require_positive_search(effective_surplus, s);
  return detail::single_peak_roots(
      [&](double q) { return effective_surplus * benefit_factor(q); },
      find_q_star(), 0.0, s, options);
}

/// Same problem with a share `lambda` of consumers who always compare two
/// prices. The curve no longer vanishes at q -> 0, so only a stable root
/// may exist.
inline std::vector<ActiveRoot> solve_active_shoppers(
    double effective_surplus, double s, double lambda,
    const SolverOptions& options = {}) {
  detail::require_positive_search(effective_surplus, s);
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::domain_error("shopper share must lie in (0, 1)");
  }
  const double phi = 2.0 * lambda / (1.0 - lambda);
  const double q_star = find_q_star();
  const double peak_weight = (1.0 - q_star) / (2.0 * q_star);
  const double q_peak = (1.0 - peak_weight * phi) / (1.0 + 2.0 * peak_weight);
  const double at_zero = effective_surplus * shopper_benefit_factor(1.0 / phi);
  return detail::single_peak_roots(
      [&](double q) {
        return effective_surplus *
               shopper_benefit_factor(shopper_weight(q, lambda));
      },
      std::max(q_peak, 0.0), at_zero, s, options);
}

namespace detail {

inline std::vector<ActiveEquilibrium> build_active(
    const std::vector<ActiveRoot>& roots, double lambda, double valuation,
    const std::vector<CostState>& states) {
  std::vector<ActiveEquilibrium> out;
  for (const auto& r : roots) {
    ActiveEquilibrium eq{r.q, r.stability, shopper_weight(r.q, lambda), {}};
    for (const auto& st : states) {
      eq.laws.emplace_back(st.cost, eq.weight, valuation);
    }
    out.push_back(std::move(eq));
  }
  return out;
}

inline DiamondRecord diamond_for(const MarketParams& params) {
  return {params.valuation,
          params.search_cost_mode == SearchCostMode::FirstFree,
          params.shopper_share == 0.0};
}

template <class RootFn, class ThresholdFn>
EquilibriumSet unobserved_set(const MarketParams& params,
                              const SolverOptions& options, RootFn&& roots_for,
                              ThresholdFn&& threshold_for) {
  const double mean_cost = params.cost_dist.mean();
  const double surplus = params.valuation - mean_cost;
  EquilibriumSet out;
  out.regime = Regime::Unobserved;
  out.cost = mean_cost;
  out.threshold = threshold_for(surplus);
  out.diamond = diamond_for(params);
  if (params.search_cost > 0.0) {
    out.active = build_active(roots_for(surplus), params.shopper_share,
                              params.valuation,
                              cost_states(params.cost_dist, options));
  }
  return out;
}

template <class RootFn, class ThresholdFn>
std::vector<EquilibriumSet> observed_sets(const MarketParams& params,
                                          const SolverOptions& options,
                                          RootFn&& roots_for,
                                          ThresholdFn&& threshold_for) {
  std::vector<EquilibriumSet> out;
  const auto states = cost_states(params.cost_dist, options);
  for (std::size_t k = 0; k < states.size(); ++k) {
    const double surplus = params.valuation - states[k].cost;
    EquilibriumSet set;
    set.regime = Regime::Observed;
    set.state = k;
    set.cost = states[k].cost;
    set.probability = states[k].probability;
    set.threshold = threshold_for(surplus);
    set.diamond = diamond_for(params);
    if (params.search_cost > 0.0) {
      set.active = build_active(roots_for(surplus), params.shopper_share,
                                params.valuation, {states[k]});
    }
    out.push_back(std::move(set));
  }
  return out;
}

inline void require_no_shoppers(const MarketParams& params) {
  if (params.shopper_share != 0.0) {
    throw std::invalid_argument(
        "shopper_share > 0: use solve_shoppers for this market");
  }
}

}  // namespace detail

/// Consumers know only the cost law: the indifference condition involves
/// the mean cost alone, and every state's price law shares q.
inline EquilibriumSet solve_unobserved(const MarketParams& params,
                                       const SolverOptions& options = {}) {
  params.validate();
  detail::require_no_shoppers(params);
  return detail::unobserved_set(params, options, [&](double surplus) {
    return solve_active(surplus, params.search_cost, options);
  }, active_threshold);
}

/// Consumers observe the realized cost: one independent game per state
/// (per quadrature node for continuous laws).
inline std::vector<EquilibriumSet> solve_observed(
    const MarketParams& params, const SolverOptions& options = {}) {
  params.validate();
  detail::require_no_shoppers(params);
  return detail::observed_sets(params, options, [&](double surplus) {
    return solve_active(surplus, params.search_cost, options);
  }, active_threshold);
}

struct ShopperSolution {
  EquilibriumSet unobserved;
  std::vector<EquilibriumSet> observed;
};

inline ShopperSolution solve_shoppers(const MarketParams& params,
                                      const SolverOptions& options = {}) {
  params.validate();
  if (!(params.shopper_share > 0.0)) {
    throw std::invalid_argument("solve_shoppers needs shopper_share > 0");
  }
  auto roots_for = [&](double surplus) {
    return solve_active_shoppers(surplus, params.search_cost,
                                 params.shopper_share, options);
  };
  auto threshold_for = [&](double surplus) {
    return active_threshold_shoppers(surplus, params.shopper_share);
  };
  ShopperSolution out;
  out.unobserved =
      detail::unobserved_set(params, options, roots_for, threshold_for);
  out.observed =
      detail::observed_sets(params, options, roots_for, threshold_for);
  return out;
}

struct Participation {
  bool participates;
  double payoff;
};

/// Expected payoff of entering the market at an equilibrium intensity.
/// Under FirstFree the first quote is free, so consumers always take part.
inline Participation participation_check(double q, double effective_surplus,
                                         double s, SearchCostMode mode) {
  const double payoff = cs_factor(q) * effective_surplus -
                        (mode == SearchCostMode::AllCostly ? s : 0.0);
  return {mode == SearchCostMode::FirstFree || payoff >= 0.0, payoff};
}

/// (1 + 2 eta) / (2 eta (1 + eta)) - ln(1 + 1/eta). Non-negative for every
/// eta > 0; at eta = (1 - q*)/(2 q*) its sign is that of the lowest payoff
/// a searching consumer can get in a stable equilibrium when every quote
/// is costly.
inline double participation_margin(double eta) {
  if (!(eta > 0.0)) throw std::domain_error("eta must be positive");
  return (1.0 + 2.0 * eta) / (2.0 * eta * (1.0 + eta)) - std::log1p(1.0 / eta);
}

}  // namespace psearch

#endif  // PSEARCH_SOLVER_EQUILIBRIUM_HPP
