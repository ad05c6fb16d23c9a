#ifndef PSEARCH_NUMERIC_QUADRATURE_HPP
#define PSEARCH_NUMERIC_QUADRATURE_HPP

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace psearch::numeric {

/// Gauss-Legendre rule on [-1, 1] with ascending nodes.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n) {
    if (n < 1) throw std::invalid_argument("Gauss-Legendre needs n >= 1");
    // Boost returns the non-negative zeros of P_n in ascending order.
    const auto half = boost::math::legendre_p_zeros<double>(n);
    for (auto it = half.rbegin(); it != half.rend(); ++it) {
      if (*it != 0.0) push(-*it, n);
    }
    for (double x : half) push(x, n);
  }

  /// Nodes and weights mapped to [a, b].
  std::vector<std::pair<double, double>> on(double a, double b) const {
    std::vector<std::pair<double, double>> out;
    out.reserve(nodes.size());
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      out.emplace_back(mid + half * nodes[i], half * weights[i]);
    }
    return out;
  }

 private:
  void push(double x, int n) {
    const double dp = boost::math::legendre_p_prime(n, x);
    nodes.push_back(x);
    weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
  }
};

}  // namespace psearch::numeric

#endif  // PSEARCH_NUMERIC_QUADRATURE_HPP
