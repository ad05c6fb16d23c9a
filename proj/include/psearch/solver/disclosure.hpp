#ifndef PSEARCH_SOLVER_DISCLOSURE_HPP
#define PSEARCH_SOLVER_DISCLOSURE_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "psearch/solver/equilibrium.hpp"

namespace psearch {

/// One step of the unraveling argument: the highest still-pooled state
/// compares revealing its cost with staying in the pool.
struct DisclosureStep {
  std::size_t state;
  double cost;
  /// Conditional mean cost of the pool before this step.
  double pool_mean;
  double q_disclosed;
  double q_pooled;
  double profit_disclosed;
  double profit_pooled;
  bool disclosed;
};

struct DisclosureTrace {
  std::vector<DisclosureStep> steps;
  /// Ascending state indices left in the pool.
  std::vector<std::size_t> undisclosed;
};

namespace detail {

inline double stable_root(double surplus, double s,
                          const SolverOptions& options) {
  const auto roots = solve_active(surplus, s, options);
  if (roots.empty()) {
    throw std::domain_error("no active-search equilibrium for a pooled state");
  }
  return roots.back().q;
}

}  // namespace detail

/// Iterated disclosure from the highest cost state down. Consumers facing a
/// silent firm believe the cost is the conditional mean of the states still
/// pooled; a state leaves the pool when revealing is weakly more profitable.
inline DisclosureTrace unravel_disclosure(const MarketParams& params,
                                          const SolverOptions& options = {}) {
  params.validate();
  if (!params.cost_dist.is_discrete()) {
    throw std::invalid_argument("unraveling needs a discrete cost law");
  }
  const auto& d = params.cost_dist.discrete();
  const double v = params.valuation;
  const double s = params.search_cost;
  const double n = params.n_firms;
  if (!(s > 0.0) ||
      s > active_threshold(v - d.costs.back()) + options.tangency_tolerance) {
    throw std::domain_error(
        "unraveling needs active search in every cost state");
  }

  DisclosureTrace trace;
  std::vector<std::size_t> pool(d.costs.size());
  for (std::size_t k = 0; k < pool.size(); ++k) pool[k] = k;

  while (pool.size() > 1) {
    double mass = 0.0;
    double weighted = 0.0;
    for (auto k : pool) {
      mass += d.probs[k];
      weighted += d.probs[k] * d.costs[k];
    }
    DisclosureStep step{};
    step.state = pool.back();
    step.cost = d.costs[step.state];
    step.pool_mean = weighted / mass;
    step.q_disclosed = detail::stable_root(v - step.cost, s, options);
    step.q_pooled = detail::stable_root(v - step.pool_mean, s, options);
    step.profit_disclosed = (1.0 - step.q_disclosed) * (v - step.cost) / n;
    step.profit_pooled = (1.0 - step.q_pooled) * (v - step.cost) / n;
    step.disclosed = step.profit_disclosed >= step.profit_pooled;
    trace.steps.push_back(step);
    if (!step.disclosed) break;
    pool.pop_back();
  }
  trace.undisclosed = pool;
  return trace;
}

}  // namespace psearch

#endif  // PSEARCH_SOLVER_DISCLOSURE_HPP
