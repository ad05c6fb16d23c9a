#ifndef PSEARCH_CLI_CONFIG_HPP
#define PSEARCH_CLI_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "psearch/core/model.hpp"
#include "psearch/sim/simulator.hpp"
#include "psearch/solver/equilibrium.hpp"

namespace psearch::cli {

/// Malformed or invalid scenario file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { Csv, Json };

struct SimulationSection {
  sim::SimulationConfig run;
  Regime regime = Regime::Unobserved;
  /// 1-based cost state, observed regime only.
  std::optional<std::size_t> state;
  Stability root = Stability::Stable;
};

struct OutputSection {
  Format format = Format::Csv;
  /// Empty means stdout.
  std::string path;
};

struct ScenarioConfig {
  MarketParams market;
  SolverOptions solver;
  std::optional<SimulationSection> simulation;
  OutputSection output;
};

namespace detail {

using nlohmann::json;

inline void allow_keys(const json& obj, const char* section,
                       std::initializer_list<const char*> keys) {
  if (!obj.is_object()) {
    throw ConfigError(std::string(section) + ": expected an object");
  }
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || item.key() == k;
    if (!known) {
      throw ConfigError(std::string(section) + ": unknown key '" + item.key() + "'");
    }
  }
}

template <class T>
T required(const json& obj, const char* section, const char* key) {
  if (!obj.contains(key)) {
    throw ConfigError(std::string(section) + ": missing key '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(section) + "." + key + ": wrong type");
  }
}

template <class T>
T optional_or(const json& obj, const char* section, const char* key, T fallback) {
  return obj.contains(key) ? required<T>(obj, section, key) : fallback;
}

inline CostDistribution parse_costs(const json& j) {
  const char* sec = "market.cost_distribution";
  const auto type = required<std::string>(j, sec, "type");
  if (type == "discrete") {
    allow_keys(j, sec, {"type", "costs", "probabilities"});
    return DiscreteCost{required<std::vector<double>>(j, sec, "costs"),
                        required<std::vector<double>>(j, sec, "probabilities")};
  }
  if (type == "uniform") {
    allow_keys(j, sec, {"type", "lower", "upper"});
    return ContinuousCost::uniform(required<double>(j, sec, "lower"),
                                   required<double>(j, sec, "upper"));
  }
  if (type == "tabulated") {
    allow_keys(j, sec, {"type", "levels", "costs"});
    return ContinuousCost::tabulated(required<std::vector<double>>(j, sec, "levels"),
                                     required<std::vector<double>>(j, sec, "costs"));
  }
  throw ConfigError(std::string(sec) + ".type: unknown family '" + type + "'");
}

inline json costs_to_json(const CostDistribution& dist) {
  if (dist.is_discrete()) {
    return {{"type", "discrete"},
            {"costs", dist.discrete().costs},
            {"probabilities", dist.discrete().probs}};
  }
  const auto& c = dist.continuous();
  if (c.family == ContinuousCost::Family::Uniform) {
    return {{"type", "uniform"}, {"lower", c.lower()}, {"upper", c.upper()}};
  }
  return {{"type", "tabulated"}, {"levels", c.levels}, {"costs", c.costs}};
}

inline SearchCostMode parse_mode(const std::string& s) {
  if (s == "first_free") return SearchCostMode::FirstFree;
  if (s == "all_costly") return SearchCostMode::AllCostly;
  throw ConfigError("market.search_cost_mode: expected first_free or all_costly");
}

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw ConfigError("output.format: expected csv or json");
}

}  // namespace detail

inline const char* to_string(Format f) { return f == Format::Csv ? "csv" : "json"; }

inline Format parse_format(const std::string& s) { return detail::parse_format(s); }

inline ScenarioConfig config_from_json(const nlohmann::json& root) {
  using detail::allow_keys;
  using detail::optional_or;
  using detail::required;
  ScenarioConfig cfg;
  try {
    allow_keys(root, "config", {"market", "solver", "simulation", "output"});
    if (!root.contains("market")) throw ConfigError("config: missing 'market'");

    const auto& m = root.at("market");
    allow_keys(m, "market", {"n_firms", "valuation", "search_cost",
                             "cost_distribution", "shopper_share",
                             "search_cost_mode"});
    cfg.market.n_firms = required<int>(m, "market", "n_firms");
    cfg.market.valuation = required<double>(m, "market", "valuation");
    cfg.market.search_cost = required<double>(m, "market", "search_cost");
    if (!m.contains("cost_distribution")) {
      throw ConfigError("market: missing key 'cost_distribution'");
    }
    cfg.market.cost_dist = detail::parse_costs(m.at("cost_distribution"));
    cfg.market.shopper_share = optional_or<double>(m, "market", "shopper_share", 0.0);
    cfg.market.search_cost_mode = detail::parse_mode(
        optional_or<std::string>(m, "market", "search_cost_mode", "first_free"));
    cfg.market.validate();

    if (root.contains("solver")) {
      const auto& s = root.at("solver");
      allow_keys(s, "solver", {"tolerance", "quadrature_nodes"});
      cfg.solver.tolerance =
          optional_or<double>(s, "solver", "tolerance", cfg.solver.tolerance);
      cfg.solver.quadrature_nodes = optional_or<int>(
          s, "solver", "quadrature_nodes", cfg.solver.quadrature_nodes);
    }
    if (!(cfg.solver.tolerance > 0.0 && cfg.solver.tolerance <= 1e-3)) {
      throw ConfigError("solver.tolerance must lie in (0, 1e-3]");
    }
    if (cfg.solver.quadrature_nodes < 1 || cfg.solver.quadrature_nodes > 512) {
      throw ConfigError("solver.quadrature_nodes must lie in [1, 512]");
    }

    if (root.contains("simulation")) {
      const auto& s = root.at("simulation");
      const char* sec = "simulation";
      allow_keys(s, sec, {"seed", "n_rounds", "consumers_per_round", "threads",
                          "equilibrium"});
      SimulationSection sim;
      sim.run.seed = optional_or<std::uint64_t>(s, sec, "seed", 1);
      sim.run.n_rounds = required<std::size_t>(s, sec, "n_rounds");
      sim.run.consumers_per_round =
          optional_or<std::size_t>(s, sec, "consumers_per_round", 1);
      sim.run.threads = optional_or<unsigned>(s, sec, "threads", 1);
      sim.run.validate();
      if (s.contains("equilibrium")) {
        const auto& e = s.at("equilibrium");
        const char* esec = "simulation.equilibrium";
        allow_keys(e, esec, {"regime", "state", "root"});
        const auto regime = optional_or<std::string>(e, esec, "regime", "unobserved");
        if (regime == "unobserved") {
          sim.regime = Regime::Unobserved;
        } else if (regime == "observed") {
          sim.regime = Regime::Observed;
        } else {
          throw ConfigError("simulation.equilibrium.regime: expected unobserved or observed");
        }
        if (e.contains("state")) {
          const auto state = required<std::size_t>(e, esec, "state");
          if (state < 1) throw ConfigError("simulation.equilibrium.state is 1-based");
          sim.state = state;
        }
        if (sim.regime == Regime::Observed && !sim.state) {
          throw ConfigError("simulation.equilibrium.state required for the observed regime");
        }
        const auto root_kind = optional_or<std::string>(e, esec, "root", "stable");
        if (root_kind == "stable") {
          sim.root = Stability::Stable;
        } else if (root_kind == "unstable") {
          sim.root = Stability::Unstable;
        } else {
          throw ConfigError("simulation.equilibrium.root: expected stable or unstable");
        }
      }
      cfg.simulation = sim;
    }

    if (root.contains("output")) {
      const auto& o = root.at("output");
      allow_keys(o, "output", {"format", "path"});
      cfg.output.format =
          detail::parse_format(optional_or<std::string>(o, "output", "format", "csv"));
      cfg.output.path = optional_or<std::string>(o, "output", "path", "");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline nlohmann::json config_to_json(const ScenarioConfig& cfg) {
  nlohmann::json root;
  const auto& m = cfg.market;
  root["market"] = {{"n_firms", m.n_firms},
                    {"valuation", m.valuation},
                    {"search_cost", m.search_cost},
                    {"cost_distribution", detail::costs_to_json(m.cost_dist)},
                    {"shopper_share", m.shopper_share},
                    {"search_cost_mode", to_string(m.search_cost_mode)}};
  root["solver"] = {{"tolerance", cfg.solver.tolerance},
                    {"quadrature_nodes", cfg.solver.quadrature_nodes}};
  if (cfg.simulation) {
    const auto& s = *cfg.simulation;
    nlohmann::json eq = {{"regime", to_string(s.regime)},
                         {"root", s.root == Stability::Unstable ? "unstable" : "stable"}};
    if (s.state) eq["state"] = *s.state;
    root["simulation"] = {{"seed", s.run.seed},
                          {"n_rounds", s.run.n_rounds},
                          {"consumers_per_round", s.run.consumers_per_round},
                          {"threads", s.run.threads},
                          {"equilibrium", eq}};
  }
  root["output"] = {{"format", to_string(cfg.output.format)},
                    {"path", cfg.output.path}};
  return root;
}

inline ScenarioConfig parse_config(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return config_from_json(root);
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return parse_config(text);
}

}  // namespace psearch::cli

#endif  // PSEARCH_CLI_CONFIG_HPP
