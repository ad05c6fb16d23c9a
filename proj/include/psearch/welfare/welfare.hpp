#ifndef PSEARCH_WELFARE_WELFARE_HPP
#define PSEARCH_WELFARE_WELFARE_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "psearch/core/factors.hpp"
#include "psearch/solver/equilibrium.hpp"

namespace psearch {

// Outcome helpers take q = 0 to mean the Diamond equilibrium (one quote,
// price v; no trade at all when every quote is costly).

/// Ex-interim consumer surplus net of search spending.
inline double consumer_surplus(double q, double c, double v, double s,
                               SearchCostMode mode) {
  if (q < 0.0 || q > 1.0) throw std::domain_error("q must lie in [0, 1]");
  if (q == 0.0) return 0.0;
  const double factor = q == 1.0 ? 1.0 : cs_factor(q);
  return factor * (v - c) - (mode == SearchCostMode::AllCostly ? s : 0.0);
}

inline double firm_profit(double q, double c, double v, int n_firms,
                          SearchCostMode mode = SearchCostMode::FirstFree) {
  if (q < 0.0 || q > 1.0) throw std::domain_error("q must lie in [0, 1]");
  if (q == 0.0 && mode == SearchCostMode::AllCostly) return 0.0;
  return (1.0 - q) * (v - c) / n_firms;
}

/// Gains from trade minus total search spending.
inline double total_surplus(double q, double c, double v, double s,
                            SearchCostMode mode) {
  if (q < 0.0 || q > 1.0) throw std::domain_error("q must lie in [0, 1]");
  if (q == 0.0) return mode == SearchCostMode::FirstFree ? v - c : 0.0;
  const double quotes = mode == SearchCostMode::FirstFree ? q : 1.0 + q;
  return v - c - quotes * s;
}

/// Captive over comparing demand weight, (1 - q) / (2q).
inline double market_power(double q) {
  detail::require_open_unit(q, "market_power");
  return (1.0 - q) / (2.0 * q);
}

struct RegimeOutcome {
  double cost = 0.0;
  double probability = 1.0;
  bool active = false;
  /// 0 in the Diamond equilibrium.
  double q = 0.0;
  double consumer_surplus = 0.0;
  double firm_profit = 0.0;
  double total_surplus = 0.0;
  /// Undefined (unbounded) in the Diamond equilibrium.
  std::optional<double> market_power;
};

struct WelfareMeans {
  double q = 0.0;
  double consumer_surplus = 0.0;
  double firm_profit = 0.0;
  double total_surplus = 0.0;
};

/// Signed gap (unobserved minus expected observed) and whether it has the
/// sign under which hiding the cost helps consumers.
struct Ordering {
  double gap = 0.0;
  bool holds = false;
};

enum class WelfareRegime {
  /// Active search in every observed state and without information.
  BothActive,
  /// Some observed states are Diamond-only; active search without information.
  Mixed,
  /// Diamond-only without information, active search in some observed states.
  AsymmetryDiamondOnly,
  /// No active search anywhere.
  NoActiveAnywhere,
};

inline const char* to_string(WelfareRegime r) {
  switch (r) {
    case WelfareRegime::BothActive: return "both_active";
    case WelfareRegime::Mixed: return "mixed";
    case WelfareRegime::AsymmetryDiamondOnly: return "asymmetry_diamond_only";
    case WelfareRegime::NoActiveAnywhere: return "no_active_anywhere";
  }
  return "?";
}

struct WelfareReport {
  Thresholds thresholds;
  RegimeOutcome unobserved;
  std::vector<RegimeOutcome> observed;
  WelfareMeans observed_mean;
  /// Unobserved searches more.
  Ordering search;
  /// Unobserved consumer surplus higher.
  Ordering consumer_surplus;
  /// Unobserved profit lower.
  Ordering profit;
  /// Unobserved total surplus lower.
  Ordering total_surplus;
  WelfareRegime regime = WelfareRegime::BothActive;

  /// Every ordering holds strictly: consumers gain from not seeing cost.
  bool asymmetry_favors_consumers() const {
    return search.holds && consumer_surplus.holds && profit.holds &&
           total_surplus.holds;
  }

  /// Every ordering is strictly reversed.
  bool disclosure_favors_consumers() const {
    return search.gap < 0.0 && consumer_surplus.gap < 0.0 &&
           profit.gap > 0.0 && total_surplus.gap > 0.0;
  }
};

namespace detail {

inline RegimeOutcome outcome_of(const EquilibriumSet& set,
                                const MarketParams& params) {
  RegimeOutcome out;
  out.cost = set.cost;
  out.probability = set.probability;
  const auto* eq = set.selected();
  out.active = eq != nullptr;
  out.q = out.active ? eq->q : 0.0;
  const double v = params.valuation;
  const double s = params.search_cost;
  const auto mode = params.search_cost_mode;
  out.consumer_surplus = consumer_surplus(out.q, set.cost, v, s, mode);
  out.firm_profit = firm_profit(out.q, set.cost, v, params.n_firms, mode);
  out.total_surplus = total_surplus(out.q, set.cost, v, s, mode);
  if (out.active && out.q < 1.0) out.market_power = market_power(out.q);
  return out;
}

}  // namespace detail

/// Solves both information regimes at their stable equilibria and compares
/// expected search, consumer surplus, profit and total surplus.
inline WelfareReport welfare_report(const MarketParams& params,
                                    const SolverOptions& options = {}) {
  params.validate();
  if (!(params.search_cost > 0.0)) {
    throw std::invalid_argument("welfare report needs a positive search cost");
  }
  WelfareReport report;
  report.thresholds = thresholds(params, options);
  report.unobserved =
      detail::outcome_of(solve_unobserved(params, options), params);
  for (const auto& set : solve_observed(params, options)) {
    report.observed.push_back(detail::outcome_of(set, params));
  }

  auto& m = report.observed_mean;
  for (const auto& o : report.observed) {
    m.q += o.probability * o.q;
    m.consumer_surplus += o.probability * o.consumer_surplus;
    m.firm_profit += o.probability * o.firm_profit;
    m.total_surplus += o.probability * o.total_surplus;
  }
  const auto& u = report.unobserved;
  report.search = {u.q - m.q, u.q > m.q};
  report.consumer_surplus = {u.consumer_surplus - m.consumer_surplus,
                             u.consumer_surplus > m.consumer_surplus};
  report.profit = {u.firm_profit - m.firm_profit,
                   u.firm_profit < m.firm_profit};
  report.total_surplus = {u.total_surplus - m.total_surplus,
                          u.total_surplus < m.total_surplus};

  const double s = params.search_cost;
  const double tol = options.tangency_tolerance;
  const auto& t = report.thresholds;
  if (s <= t.s_bar_last + tol) {
    report.regime = WelfareRegime::BothActive;
  } else if (s <= t.s_bar + tol) {
    report.regime = WelfareRegime::Mixed;
  } else if (s <= t.s_bar_first + tol) {
    report.regime = WelfareRegime::AsymmetryDiamondOnly;
  } else {
    report.regime = WelfareRegime::NoActiveAnywhere;
  }
  return report;
}

}  // namespace psearch

#endif  // PSEARCH_WELFARE_WELFARE_HPP
