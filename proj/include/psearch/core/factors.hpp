#ifndef PSEARCH_CORE_FACTORS_HPP
#define PSEARCH_CORE_FACTORS_HPP

// Closed-form scalar functions of an active-search equilibrium. With `q` the
// share of consumers comparing two prices, equilibrium prices follow
//   p(x) = mu (v - c) / (mu + x) + c,  x in [0, 1] the CCDF level,
// and every quantity below is a per-unit-of-surplus (v - c) integral of it.

#include <cmath>
#include <stdexcept>
#include <string>

namespace psearch {

namespace detail {

inline void require_open_unit(double q, const char* what) {
  if (!(q > 0.0 && q < 1.0)) {
    throw std::domain_error(std::string(what) + ": q must lie in (0, 1)");
  }
}

// Below this intensity the log-difference forms cancel badly and the
// power series in q is used instead.
inline constexpr double kSeriesCutoff = 0.25;

// S(q) = (ln((1+q)/(1-q)) - 2q) / (2 q^2) = sum_{k>=1} q^(2k-1) / (2k+1),
// and its first two derivatives. benefit_factor is (1 - q) S(q).
struct LogExcess {
  double value;
  double d1;
  double d2;
};

inline LogExcess log_excess_series(double q) {
  const double q2 = q * q;
  LogExcess out{0.0, 0.0, 0.0};
  double pow_odd = q;      // q^(2k-1)
  double pow_even = 1.0;   // q^(2k-2)
  double pow_d2 = 0.0;     // q^(2k-3)
  for (int k = 1; k < 60; ++k) {
    const double denom = 2.0 * k + 1.0;
    out.value += pow_odd / denom;
    out.d1 += (2.0 * k - 1.0) * pow_even / denom;
    if (k >= 2) out.d2 += (2.0 * k - 1.0) * (2.0 * k - 2.0) * pow_d2 / denom;
    // S ~ q/3 while S' ~ 1/3 and S'' ~ 6q/5; stop once the next term of each
    // is below double resolution of its leading term.
    const double next_odd = pow_odd * q2;
    if (k >= 2 && (2.0 * k + 1.0) * 2.0 * k * next_odd < 1e-18 * q) {
      break;
    }
    pow_d2 = (k == 1) ? q : pow_d2 * q2;
    pow_even *= q2;
    pow_odd *= q2;
  }
  return out;
}

// Log of the ratio (1 + q) / (1 - q), accurate for all q in (0, 1).
inline double log_odds(double q) { return 2.0 * std::atanh(q); }

}  // namespace detail

/// Added benefit of a second price quote per unit of surplus,
///   A(q) = [ln((1+q)/(1-q)) - 2q] (1-q) / (2 q^2).
/// Positive and strictly concave on (0, 1), vanishing at both ends.
inline double benefit_factor(double q) {
  detail::require_open_unit(q, "benefit_factor");
  if (q < detail::kSeriesCutoff) {
    return (1.0 - q) * detail::log_excess_series(q).value;
  }
  return (detail::log_odds(q) - 2.0 * q) * (1.0 - q) / (2.0 * q * q);
}

/// dA/dq. Positive below the argmax of A, negative above it.
inline double benefit_factor_deriv(double q) {
  detail::require_open_unit(q, "benefit_factor_deriv");
  if (q < detail::kSeriesCutoff) {
    const auto s = detail::log_excess_series(q);
    return -s.value + (1.0 - q) * s.d1;
  }
  const double l = detail::log_odds(q);
  return (2.0 * q * (2.0 + q) - (2.0 + q - q * q) * l) /
         (2.0 * q * q * q * (1.0 + q));
}

/// d^2A/dq^2, negative throughout (0, 1).
inline double benefit_factor_second_deriv(double q) {
  detail::require_open_unit(q, "benefit_factor_second_deriv");
  if (q < detail::kSeriesCutoff) {
    const auto s = detail::log_excess_series(q);
    return -2.0 * s.d1 + (1.0 - q) * s.d2;
  }
  const double l = detail::log_odds(q);
  const double num = (1.0 + q) * (1.0 + q) * (3.0 - q) * (1.0 - q) * l -
                     2.0 * q * (3.0 + 2.0 * q - 3.0 * q * q - q * q * q);
  return num / (q * q * q * q * (1.0 - q) * (1.0 + q) * (1.0 + q));
}

/// Consumer surplus per unit of surplus at an equilibrium intensity,
///   B(q) = 1 - ((1-q)/(2q)) ln((1+q)/(1-q)),
/// evaluated through the identity B(q) = q (1 - A(q)).
inline double cs_factor(double q) {
  detail::require_open_unit(q, "cs_factor");
  return q * (1.0 - benefit_factor(q));
}

/// Ratio of single-price observers to price comparers (halved) when a share
/// `lambda` of consumers always compares two prices:
///   mu = (1-q) / (2q + phi),  phi = 2 lambda / (1 - lambda).
/// Reduces to (1-q)/(2q) at lambda = 0.
inline double shopper_weight(double q, double lambda) {
  detail::require_open_unit(q, "shopper_weight");
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw std::domain_error("shopper_weight: lambda must lie in [0, 1)");
  }
  const double phi = 2.0 * lambda / (1.0 - lambda);
  return (1.0 - q) / (2.0 * q + phi);
}

/// Added benefit of a second quote as a function of the price-law weight,
///   G(mu) = mu [(1 + 2 mu) ln(1 + 1/mu) - 2].
/// G(mu) = A(q) whenever mu = (1-q)/(2q).
inline double shopper_benefit_factor(double mu) {
  if (!(mu > 0.0) || std::isinf(mu)) {
    throw std::domain_error("shopper_benefit_factor: mu must be positive");
  }
  if (mu <= 4.0) {
    return mu * ((1.0 + 2.0 * mu) * std::log1p(1.0 / mu) - 2.0);
  }
  // Expansion in t = 1/mu: sum_{j>=2} (-1)^j (j-1) / (j (j+1)) t^(j-1).
  const double t = 1.0 / mu;
  double sum = 0.0;
  double power = t;
  for (int j = 2; j < 80; ++j) {
    const double term = (j - 1.0) / (j * (j + 1.0)) * power;
    sum += (j % 2 == 0) ? term : -term;
    if (term < 1e-18 * std::abs(sum)) break;
    power *= t;
  }
  return sum;
}

/// Consumer surplus per unit of surplus for a single-quote buyer facing the
/// price law with weight mu: 1 - mu ln(1 + 1/mu).
inline double single_quote_surplus_factor(double mu) {
  if (!(mu > 0.0)) {
    throw std::domain_error("single_quote_surplus_factor: mu must be positive");
  }
  return 1.0 - mu * std::log1p(1.0 / mu);
}

}  // namespace psearch

#endif  // PSEARCH_CORE_FACTORS_HPP
