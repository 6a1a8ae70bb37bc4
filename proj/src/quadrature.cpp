#include "teleamp/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/legendre.hpp>
#include <fmt/format.h>

#include "teleamp/errors.hpp"

namespace teleamp {

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw DomainError(fmt::format("quadrature order {} must be positive", n));
  // Boost returns the non-negative roots only, ascending.
  const std::vector<double> half = boost::math::legendre_p_zeros<double>(n);
  std::vector<double> x;
  for (auto it = half.rbegin(); it != half.rend(); ++it) {
    if (*it != 0.0) x.push_back(-*it);
  }
  x.insert(x.end(), half.begin(), half.end());

  QuadratureRule rule;
  const double mid = 0.5 * (a + b);
  const double half_len = 0.5 * (b - a);
  for (double xi : x) {
    const double dp = boost::math::legendre_p_prime(n, xi);
    rule.nodes.push_back(mid + half_len * xi);
    rule.weights.push_back(half_len * 2.0 / ((1.0 - xi * xi) * dp * dp));
  }
  return rule;
}

std::vector<PolarGrid::Point> PolarGrid::points(double sigma) const {
  if (sigma == 0.0) return {{{0.0, 0.0}, 1.0}};
  if (!(sigma > 0.0)) throw DomainError(fmt::format("window width sigma = {} must be non-negative", sigma));
  if (radius_in_sigma < 5.0 || n_angular < 1 || radius_in_sigma / n_radial > 1.0 / 6.0) {
    throw DomainError(fmt::format("beta grid (radius {} sigma, {} radial points) must cover 5 sigma with spacing <= sigma/6",
                                  radius_in_sigma, n_radial));
  }
  const double radius = radius_in_sigma * sigma;
  const QuadratureRule radial = gauss_legendre(n_radial, 0.0, radius);
  const double dphi = 2.0 * std::numbers::pi / n_angular;

  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n_radial) * n_angular);
  for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
    const double r = radial.nodes[i];
    for (int j = 0; j < n_angular; ++j) {
      pts.push_back({std::polar(r, j * dphi), radial.weights[i] * r * dphi});
    }
  }
  return pts;
}

}  // namespace teleamp
