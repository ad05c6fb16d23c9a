#ifndef PSEARCH_CLI_COMMANDS_HPP
#define PSEARCH_CLI_COMMANDS_HPP

#include <charconv>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "psearch/cli/config.hpp"
#include "psearch/solver/disclosure.hpp"
#include "psearch/solver/equilibrium.hpp"
#include "psearch/welfare/welfare.hpp"
#include "psearch/sim/simulator.hpp"

namespace psearch::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNoActive = 3,
  kExitNoSelection = 4,
  kExitContinuous = 5,
};

/// Shortest decimal that reads back to the same double.
inline std::string num(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace detail {

using nlohmann::json;

struct Equilibria {
  EquilibriumSet unobserved;
  std::vector<EquilibriumSet> observed;
};

inline Equilibria solve_all(const ScenarioConfig& cfg) {
  if (cfg.market.shopper_share > 0.0) {
    auto sol = solve_shoppers(cfg.market, cfg.solver);
    return {std::move(sol.unobserved), std::move(sol.observed)};
  }
  return {solve_unobserved(cfg.market, cfg.solver),
          solve_observed(cfg.market, cfg.solver)};
}

inline json set_to_json(const EquilibriumSet& set) {
  json j = {{"regime", to_string(set.regime)},
            {"cost", set.cost},
            {"probability", set.probability},
            {"threshold", set.threshold},
            {"diamond",
             {{"price", set.diamond.price},
              {"trade", set.diamond.trade},
              {"exists", set.diamond.exists}}}};
  j["state"] = set.state ? json(*set.state + 1) : json(nullptr);
  json active = json::array();
  for (const auto& eq : set.active) {
    json laws = json::array();
    for (const auto& law : eq.laws) {
      laws.push_back({{"cost", law.cost()},
                      {"support_low", law.support_low()},
                      {"support_high", law.support_high()}});
    }
    active.push_back({{"q", eq.q},
                      {"stability", to_string(eq.stability)},
                      {"weight", eq.weight},
                      {"laws", laws}});
  }
  j["active"] = active;
  return j;
}

// One row per (equilibrium, cost state) for a set.
inline void set_to_csv(std::ostream& out, const EquilibriumSet& set,
                       const std::vector<CostState>& states, double q_star) {
  auto row = [&](std::size_t k, const CostState& st, const char* kind,
                 double q, const char* stability, double weight,
                 double low, double high) {
    out << to_string(set.regime) << ',' << k + 1 << ',' << num(st.cost) << ','
        << num(st.probability) << ',' << num(set.threshold) << ','
        << num(q_star) << ',' << kind << ',' << num(q) << ',' << stability
        << ',' << (weight > 0.0 ? num(weight) : "") << ',' << num(low) << ','
        << num(high) << '\n';
  };
  const double v = set.diamond.price;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::size_t k = set.state ? *set.state : i;
    if (set.diamond.exists) row(k, states[i], "diamond", 0.0, "", 0.0, v, v);
  }
  for (const auto& eq : set.active) {
    for (std::size_t i = 0; i < eq.laws.size(); ++i) {
      const std::size_t k = set.state ? *set.state : i;
      row(k, states[i], "active", eq.q, to_string(eq.stability), eq.weight,
          eq.laws[i].support_low(), eq.laws[i].support_high());
    }
  }
}

inline double curve_value(double q, double surplus, double lambda) {
  if (q >= 1.0) return 0.0;
  if (lambda == 0.0) return q <= 0.0 ? 0.0 : surplus * benefit_factor(q);
  const double phi = 2.0 * lambda / (1.0 - lambda);
  const double mu = q <= 0.0 ? 1.0 / phi : shopper_weight(q, lambda);
  return surplus * shopper_benefit_factor(mu);
}

inline json outcome_json(const RegimeOutcome& o) {
  return {{"cost", o.cost},
          {"probability", o.probability},
          {"active", o.active},
          {"q", o.q},
          {"consumer_surplus", o.consumer_surplus},
          {"firm_profit", o.firm_profit},
          {"total_surplus", o.total_surplus},
          {"market_power", o.market_power ? json(*o.market_power) : json(nullptr)}};
}

inline void outcome_kv(std::vector<std::pair<std::string, std::string>>& kv,
                       const std::string& prefix, const RegimeOutcome& o) {
  kv.emplace_back(prefix + ".cost", num(o.cost));
  kv.emplace_back(prefix + ".probability", num(o.probability));
  kv.emplace_back(prefix + ".active", o.active ? "true" : "false");
  kv.emplace_back(prefix + ".q", num(o.q));
  kv.emplace_back(prefix + ".consumer_surplus", num(o.consumer_surplus));
  kv.emplace_back(prefix + ".firm_profit", num(o.firm_profit));
  kv.emplace_back(prefix + ".total_surplus", num(o.total_surplus));
  kv.emplace_back(prefix + ".market_power",
                  o.market_power ? num(*o.market_power) : "");
}

inline void write_kv(std::ostream& out,
                     const std::vector<std::pair<std::string, std::string>>& kv) {
  out << "key,value\n";
  for (const auto& [k, v] : kv) out << k << ',' << v << '\n';
}

}  // namespace detail

/// Thresholds, the Diamond record and every active root per regime/state.
/// Returns kExitNoActive when no regime or state has active search.
inline int cmd_solve(const ScenarioConfig& cfg, std::ostream& out) {
  const auto thr = thresholds(cfg.market, cfg.solver);
  const auto eqs = detail::solve_all(cfg);
  bool any_active = !eqs.unobserved.active.empty();
  for (const auto& set : eqs.observed) any_active = any_active || !set.active.empty();

  if (cfg.output.format == Format::Json) {
    nlohmann::json j;
    j["q_star"] = thr.q_star;
    j["peak_benefit"] = thr.peak_benefit;
    j["thresholds"] = {{"s_bar", thr.s_bar},
                       {"s_bar_per_state", thr.s_bar_per_state},
                       {"s_bar_first", thr.s_bar_first},
                       {"s_bar_last", thr.s_bar_last}};
    j["unobserved"] = detail::set_to_json(eqs.unobserved);
    j["observed"] = nlohmann::json::array();
    for (const auto& set : eqs.observed) j["observed"].push_back(detail::set_to_json(set));
    out << j.dump(2) << '\n';
  } else {
    const auto states = cost_states(cfg.market.cost_dist, cfg.solver);
    out << "regime,state,cost,probability,threshold,q_star,equilibrium,q,"
           "stability,weight,price_low,price_high\n";
    detail::set_to_csv(out, eqs.unobserved, states, thr.q_star);
    for (const auto& set : eqs.observed) {
      detail::set_to_csv(out, set, {states[*set.state]}, thr.q_star);
    }
  }
  return any_active ? kExitOk : kExitNoActive;
}

/// Benefit of a second quote on a q grid: pooled curve, one curve per cost
/// state (or the support endpoints for continuous laws) and the search cost.
inline int cmd_sweep_benefit(const ScenarioConfig& cfg, std::size_t grid,
                             std::ostream& out) {
  if (grid < 3) throw ConfigError("--grid must be at least 3");
  const auto& m = cfg.market;
  const double lambda = m.shopper_share;
  std::vector<std::string> names{"q", "pooled"};
  std::vector<CostState> curves;
  if (m.cost_dist.is_discrete()) {
    curves = cost_states(m.cost_dist, cfg.solver);
    for (std::size_t k = 0; k < curves.size(); ++k) {
      names.push_back("state_" + std::to_string(k + 1));
    }
  } else {
    curves = {{m.cost_dist.min_cost(), 0.0}, {m.cost_dist.max_cost(), 0.0}};
    names.push_back("cost_lower");
    names.push_back("cost_upper");
  }
  names.push_back("s");

  const double mean_surplus = m.valuation - m.cost_dist.mean();
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < grid; ++i) {
    const double q = static_cast<double>(i) / static_cast<double>(grid - 1);
    std::vector<double> row{q};
    if (m.cost_dist.is_discrete()) {
      double pooled = 0.0;
      std::vector<double> per_state;
      for (const auto& st : curves) {
        per_state.push_back(detail::curve_value(q, m.valuation - st.cost, lambda));
        pooled += st.probability * per_state.back();
      }
      row.push_back(pooled);
      row.insert(row.end(), per_state.begin(), per_state.end());
    } else {
      row.push_back(detail::curve_value(q, mean_surplus, lambda));
      for (const auto& st : curves) {
        row.push_back(detail::curve_value(q, m.valuation - st.cost, lambda));
      }
    }
    row.push_back(m.search_cost);
    rows.push_back(std::move(row));
  }

  if (cfg.output.format == Format::Json) {
    nlohmann::json j;
    j["columns"] = names;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : rows) {
      nlohmann::json obj;
      for (std::size_t c = 0; c < names.size(); ++c) obj[names[c]] = row[c];
      j["rows"].push_back(obj);
    }
    out << j.dump(2) << '\n';
  } else {
    for (std::size_t c = 0; c < names.size(); ++c) {
      out << (c ? "," : "") << names[c];
    }
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << num(row[c]);
      out << '\n';
    }
  }
  return kExitOk;
}

inline int cmd_welfare(const ScenarioConfig& cfg, std::ostream& out) {
  const auto r = welfare_report(cfg.market, cfg.solver);
  auto ordering = [](const Ordering& o) {
    return nlohmann::json{{"gap", o.gap}, {"holds", o.holds}};
  };
  if (cfg.output.format == Format::Json) {
    nlohmann::json j;
    j["regime"] = to_string(r.regime);
    j["thresholds"] = {{"q_star", r.thresholds.q_star},
                       {"s_bar", r.thresholds.s_bar},
                       {"s_bar_first", r.thresholds.s_bar_first},
                       {"s_bar_last", r.thresholds.s_bar_last}};
    j["unobserved"] = detail::outcome_json(r.unobserved);
    j["observed"] = nlohmann::json::array();
    for (const auto& o : r.observed) j["observed"].push_back(detail::outcome_json(o));
    j["observed_mean"] = {{"q", r.observed_mean.q},
                          {"consumer_surplus", r.observed_mean.consumer_surplus},
                          {"firm_profit", r.observed_mean.firm_profit},
                          {"total_surplus", r.observed_mean.total_surplus}};
    j["orderings"] = {{"search", ordering(r.search)},
                      {"consumer_surplus", ordering(r.consumer_surplus)},
                      {"profit", ordering(r.profit)},
                      {"total_surplus", ordering(r.total_surplus)}};
    j["asymmetry_favors_consumers"] = r.asymmetry_favors_consumers();
    j["disclosure_favors_consumers"] = r.disclosure_favors_consumers();
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("regime", to_string(r.regime));
  kv.emplace_back("thresholds.q_star", num(r.thresholds.q_star));
  kv.emplace_back("thresholds.s_bar", num(r.thresholds.s_bar));
  kv.emplace_back("thresholds.s_bar_first", num(r.thresholds.s_bar_first));
  kv.emplace_back("thresholds.s_bar_last", num(r.thresholds.s_bar_last));
  detail::outcome_kv(kv, "unobserved", r.unobserved);
  for (std::size_t k = 0; k < r.observed.size(); ++k) {
    detail::outcome_kv(kv, "observed." + std::to_string(k + 1), r.observed[k]);
  }
  kv.emplace_back("observed_mean.q", num(r.observed_mean.q));
  kv.emplace_back("observed_mean.consumer_surplus", num(r.observed_mean.consumer_surplus));
  kv.emplace_back("observed_mean.firm_profit", num(r.observed_mean.firm_profit));
  kv.emplace_back("observed_mean.total_surplus", num(r.observed_mean.total_surplus));
  const std::pair<const char*, const Ordering*> orders[] = {
      {"search", &r.search},
      {"consumer_surplus", &r.consumer_surplus},
      {"profit", &r.profit},
      {"total_surplus", &r.total_surplus}};
  for (const auto& [name, o] : orders) {
    kv.emplace_back(std::string("ordering.") + name + ".gap", num(o->gap));
    kv.emplace_back(std::string("ordering.") + name + ".holds", o->holds ? "true" : "false");
  }
  kv.emplace_back("asymmetry_favors_consumers",
                  r.asymmetry_favors_consumers() ? "true" : "false");
  kv.emplace_back("disclosure_favors_consumers",
                  r.disclosure_favors_consumers() ? "true" : "false");
  detail::write_kv(out, kv);
  return kExitOk;
}

/// Monte Carlo run of the configured equilibrium. Returns kExitNoSelection
/// when that equilibrium does not exist.
inline int cmd_simulate(const ScenarioConfig& cfg, std::ostream& out,
                        std::ostream& err) {
  if (!cfg.simulation) throw ConfigError("simulate needs a 'simulation' section");
  const auto& sim_cfg = *cfg.simulation;
  const auto eqs = detail::solve_all(cfg);
  const EquilibriumSet* set = &eqs.unobserved;
  if (sim_cfg.regime == Regime::Observed) {
    if (!cfg.market.cost_dist.is_discrete()) {
      throw ConfigError("observed-regime simulation needs a discrete cost law");
    }
    const std::size_t k = *sim_cfg.state - 1;
    if (k >= eqs.observed.size()) throw ConfigError("simulation.equilibrium.state out of range");
    set = &eqs.observed[k];
  }
  const auto selection = sim::select_equilibrium(*set, sim_cfg.root);
  if (!selection) {
    err << "selected equilibrium does not exist\n";
    return kExitNoSelection;
  }
  const auto result = sim::simulate_market(cfg.market, *selection, sim_cfg.run);
  const auto analytic = sim::analytic_moments(cfg.market, *selection, cfg.solver);
  const auto check = sim::verify_indifference(result, cfg.market.search_cost);

  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("regime", to_string(selection->regime));
  kv.emplace_back("state", selection->state ? std::to_string(*selection->state + 1) : "");
  kv.emplace_back("q", num(selection->q));
  kv.emplace_back("stability", to_string(selection->stability));
  kv.emplace_back("seed", std::to_string(sim_cfg.run.seed));
  kv.emplace_back("rounds", std::to_string(result.rounds));
  kv.emplace_back("consumers", std::to_string(result.consumers));
  kv.emplace_back("one_search", std::to_string(result.one_search));
  kv.emplace_back("two_search", std::to_string(result.two_search));
  auto estimate = [&](const std::string& name, const sim::Estimate& e, double a) {
    kv.emplace_back(name + ".mean", num(e.mean));
    kv.emplace_back(name + ".std_error", num(e.std_error));
    kv.emplace_back(name + ".analytic", num(a));
  };
  estimate("profit_per_firm", result.profit_per_firm, analytic.profit_per_firm);
  estimate("transaction_price", result.transaction_price, analytic.transaction_price);
  estimate("second_search_benefit", result.second_search_benefit,
           analytic.second_search_benefit);
  estimate("consumer_surplus", result.consumer_surplus, analytic.consumer_surplus);
  kv.emplace_back("indifference.z", check.degenerate ? "" : num(check.z));
  kv.emplace_back("indifference.degenerate", check.degenerate ? "true" : "false");
  for (std::size_t j = 0; j < result.firm_profits.size(); ++j) {
    kv.emplace_back("firm." + std::to_string(j + 1) + ".profit", num(result.firm_profits[j]));
  }
  for (std::size_t k = 0; k < result.per_state.size(); ++k) {
    const auto& st = result.per_state[k];
    const std::string p = "state." + std::to_string(k + 1);
    kv.emplace_back(p + ".rounds", std::to_string(st.rounds));
    kv.emplace_back(p + ".profit_per_firm.mean", num(st.profit_per_firm.mean));
    kv.emplace_back(p + ".profit_per_firm.std_error", num(st.profit_per_firm.std_error));
  }

  if (cfg.output.format == Format::Json) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : kv) j[k] = v;
    out << j.dump(2) << '\n';
  } else {
    detail::write_kv(out, kv);
  }
  if (selection->stability == Stability::Unstable) {
    err << "note: simulating the unstable equilibrium\n";
  }
  return kExitOk;
}

/// Step-by-step disclosure trace. Continuous laws give kExitContinuous; a
/// search cost above the highest-cost threshold gives kExitNoActive.
inline int cmd_unravel(const ScenarioConfig& cfg, std::ostream& out,
                       std::ostream& err) {
  if (!cfg.market.cost_dist.is_discrete()) {
    err << "unravel needs a discrete cost law\n";
    return kExitContinuous;
  }
  DisclosureTrace trace;
  try {
    trace = unravel_disclosure(cfg.market, cfg.solver);
  } catch (const std::domain_error& e) {
    err << e.what() << '\n';
    return kExitNoActive;
  }
  const auto& costs = cfg.market.cost_dist.discrete().costs;
  if (cfg.output.format == Format::Json) {
    nlohmann::json j;
    j["steps"] = nlohmann::json::array();
    for (const auto& st : trace.steps) {
      j["steps"].push_back({{"state", st.state + 1},
                            {"cost", st.cost},
                            {"pool_mean", st.pool_mean},
                            {"q_disclosed", st.q_disclosed},
                            {"q_pooled", st.q_pooled},
                            {"profit_disclosed", st.profit_disclosed},
                            {"profit_pooled", st.profit_pooled},
                            {"decision", st.disclosed ? "disclose" : "pool"}});
    }
    j["undisclosed"] = nlohmann::json::array();
    for (auto k : trace.undisclosed) j["undisclosed"].push_back(k + 1);
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  out << "step,state,cost,pool_mean,q_disclosed,q_pooled,profit_disclosed,"
         "profit_pooled,decision\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& st = trace.steps[i];
    out << i + 1 << ',' << st.state + 1 << ',' << num(st.cost) << ','
        << num(st.pool_mean) << ',' << num(st.q_disclosed) << ','
        << num(st.q_pooled) << ',' << num(st.profit_disclosed) << ','
        << num(st.profit_pooled) << ',' << (st.disclosed ? "disclose" : "pool")
        << '\n';
  }
  for (auto k : trace.undisclosed) {
    out << ',' << k + 1 << ',' << num(costs[k]) << ",,,,,,undisclosed\n";
  }
  return kExitOk;
}

}  // namespace psearch::cli

#endif  // PSEARCH_CLI_COMMANDS_HPP
