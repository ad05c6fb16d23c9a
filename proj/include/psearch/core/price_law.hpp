#ifndef PSEARCH_CORE_PRICE_LAW_HPP
#define PSEARCH_CORE_PRICE_LAW_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psearch {

/// Equilibrium price distribution for one cost state. Parameterized by the
/// weight mu (single-price observers over price comparers, halved) so the
/// base model and the shopper extension share one code path:
///   CCDF      x(p) = mu ((v - c)/(p - c) - 1),   p in [support_low, v]
///   quantile  p(x) = mu (v - c)/(mu + x) + c,    x in [0, 1]
class PriceLaw {
 public:
  PriceLaw(double cost, double weight, double valuation)
      : cost_(cost), weight_(weight), valuation_(valuation) {
    if (!(weight > 0.0) || std::isinf(weight)) {
      throw std::domain_error("price law weight must be positive and finite");
    }
    if (!(valuation > cost)) {
      throw std::domain_error("price law needs valuation above cost");
    }
    support_low_ = weight * (valuation - cost) / (weight + 1.0) + cost;
  }

  double cost() const { return cost_; }
  double weight() const { return weight_; }
  double support_low() const { return support_low_; }
  double support_high() const { return valuation_; }

  /// Price at CCDF level x: decreasing, p(0) = v, p(1) = support_low.
  double quantile(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw std::domain_error("price_quantile: level outside [0, 1]");
    }
    if (x == 1.0) return support_low_;
    return weight_ * (valuation_ - cost_) / (weight_ + x) + cost_;
  }

  /// Probability that a firm's price exceeds p.
  double ccdf(double p) const {
    const double slack = 1e-13 * (valuation_ - cost_);
    if (!(p > cost_) || p < support_low_ - slack || p > valuation_ + slack) {
      throw std::domain_error("price_ccdf: price outside the support");
    }
    p = std::clamp(p, support_low_, valuation_);
    const double x = weight_ * ((valuation_ - cost_) / (p - cost_) - 1.0);
    return std::clamp(x, 0.0, 1.0);
  }

  double cdf(double p) const { return 1.0 - ccdf(p); }

 private:
  double cost_;
  double weight_;
  double valuation_;
  double support_low_;
};

inline double price_quantile(double x, const PriceLaw& law) {
  return law.quantile(x);
}

inline double price_ccdf(double p, const PriceLaw& law) { return law.ccdf(p); }

}  // namespace psearch

#endif  // PSEARCH_CORE_PRICE_LAW_HPP
