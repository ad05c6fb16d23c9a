#ifndef PSEARCH_CORE_MODEL_HPP
#define PSEARCH_CORE_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace psearch {

/// Whether the first price quote is free (the base model) or every quote
/// costs `search_cost` (consumers may then stay out of the market).
enum class SearchCostMode { FirstFree, AllCostly };

inline const char* to_string(SearchCostMode mode) {
  return mode == SearchCostMode::FirstFree ? "first_free" : "all_costly";
}

/// Finite support cost law: costs ascending, probabilities positive.
struct DiscreteCost {
  std::vector<double> costs;
  std::vector<double> probs;
};

/// Atomless cost law on [lower, upper], given by a piecewise-linear
/// quantile function through (levels[i], costs[i]). A uniform law is the
/// two-point table {0, 1} -> {lower, upper}.
struct ContinuousCost {
  enum class Family { Uniform, Tabulated };

  Family family = Family::Uniform;
  std::vector<double> levels;
  std::vector<double> costs;

  static ContinuousCost uniform(double lower, double upper) {
    return {Family::Uniform, {0.0, 1.0}, {lower, upper}};
  }

  static ContinuousCost tabulated(std::vector<double> levels,
                                  std::vector<double> costs) {
    return {Family::Tabulated, std::move(levels), std::move(costs)};
  }

  double lower() const { return costs.front(); }
  double upper() const { return costs.back(); }

  double quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) {
      throw std::domain_error("quantile level outside [0, 1]");
    }
    auto it = std::upper_bound(levels.begin(), levels.end(), u);
    if (it == levels.end()) return costs.back();
    const auto hi = static_cast<std::size_t>(it - levels.begin());
    const auto lo = hi - 1;
    const double t = (u - levels[lo]) / (levels[hi] - levels[lo]);
    return std::lerp(costs[lo], costs[hi], t);
  }
};

class CostDistribution {
 public:
  CostDistribution() : law_(DiscreteCost{{0.0}, {1.0}}) {}
  CostDistribution(DiscreteCost d) : law_(std::move(d)) { validate(); }
  CostDistribution(ContinuousCost c) : law_(std::move(c)) { validate(); }

  static CostDistribution degenerate(double cost) {
    return DiscreteCost{{cost}, {1.0}};
  }

  bool is_discrete() const {
    return std::holds_alternative<DiscreteCost>(law_);
  }
  const DiscreteCost& discrete() const { return std::get<DiscreteCost>(law_); }
  const ContinuousCost& continuous() const {
    return std::get<ContinuousCost>(law_);
  }

  double min_cost() const {
    return is_discrete() ? discrete().costs.front() : continuous().lower();
  }
  double max_cost() const {
    return is_discrete() ? discrete().costs.back() : continuous().upper();
  }

  /// Mean cost. Exact for both variants (a piecewise-linear quantile
  /// integrates segment by segment with the trapezoid rule).
  double mean() const {
    if (is_discrete()) {
      const auto& d = discrete();
      return std::inner_product(d.costs.begin(), d.costs.end(),
                                d.probs.begin(), 0.0);
    }
    const auto& c = continuous();
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < c.levels.size(); ++i) {
      total += 0.5 * (c.costs[i] + c.costs[i + 1]) *
               (c.levels[i + 1] - c.levels[i]);
    }
    return total;
  }

  /// Draw a cost from a uniform variate on [0, 1).
  double sample(double u) const {
    if (!is_discrete()) return continuous().quantile(u);
    const auto& d = discrete();
    double cumulative = 0.0;
    for (std::size_t k = 0; k + 1 < d.probs.size(); ++k) {
      cumulative += d.probs[k];
      if (u < cumulative) return d.costs[k];
    }
    return d.costs.back();
  }

  /// State index of a draw; discrete laws only.
  std::size_t sample_state(double u) const {
    const auto& d = discrete();
    double cumulative = 0.0;
    for (std::size_t k = 0; k + 1 < d.probs.size(); ++k) {
      cumulative += d.probs[k];
      if (u < cumulative) return k;
    }
    return d.probs.size() - 1;
  }

 private:
  void validate() const {
    if (is_discrete()) {
      const auto& d = discrete();
      if (d.costs.empty() || d.costs.size() != d.probs.size()) {
        throw std::invalid_argument(
            "discrete cost law needs matching non-empty costs and probabilities");
      }
      if (d.costs.front() < 0.0) {
        throw std::invalid_argument("costs must be non-negative");
      }
      if (!std::is_sorted(d.costs.begin(), d.costs.end())) {
        throw std::invalid_argument("costs must be ascending");
      }
      double total = 0.0;
      for (double f : d.probs) {
        if (!(f > 0.0)) {
          throw std::invalid_argument("probabilities must be positive");
        }
        total += f;
      }
      if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("probabilities must sum to one");
      }
      return;
    }
    const auto& c = continuous();
    if (c.levels.size() < 2 || c.levels.size() != c.costs.size()) {
      throw std::invalid_argument(
          "quantile table needs at least two matching points");
    }
    if (c.levels.front() != 0.0 || c.levels.back() != 1.0) {
      throw std::invalid_argument("quantile table must span levels 0 and 1");
    }
    for (std::size_t i = 0; i + 1 < c.levels.size(); ++i) {
      if (!(c.levels[i + 1] > c.levels[i])) {
        throw std::invalid_argument("quantile levels must be strictly increasing");
      }
      if (c.costs[i + 1] < c.costs[i]) {
        throw std::invalid_argument("quantile must be nondecreasing");
      }
    }
    if (c.costs.front() < 0.0 || !(c.costs.back() > c.costs.front())) {
      throw std::invalid_argument("continuous support must satisfy 0 <= lower < upper");
    }
  }

  std::variant<DiscreteCost, ContinuousCost> law_;
};

struct MarketParams {
  int n_firms = 2;
  double valuation = 1.0;
  double search_cost = 0.0;
  CostDistribution cost_dist;
  double shopper_share = 0.0;
  SearchCostMode search_cost_mode = SearchCostMode::FirstFree;

  void validate() const {
    if (n_firms < 2) throw std::invalid_argument("n_firms must be at least 2");
    if (!(valuation > cost_dist.max_cost())) {
      throw std::invalid_argument("valuation must exceed every cost");
    }
    if (!(search_cost >= 0.0)) {
      throw std::invalid_argument("search_cost must be non-negative");
    }
    if (!(shopper_share >= 0.0 && shopper_share < 1.0)) {
      throw std::invalid_argument("shopper_share must lie in [0, 1)");
    }
  }
};

}  // namespace psearch

#endif  // PSEARCH_CORE_MODEL_HPP
