#pragma once

#include <complex>
#include <vector>

namespace teleamp {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped onto [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Weighted points of a polar grid over the disc |β| ≤ radius:
/// Gauss-Legendre in the radius (with the r Jacobian folded into the
/// weights) and the periodic trapezoid rule in the angle.
struct PolarGrid {
  double radius_in_sigma = 5.0;
  int n_angular = 48;
  int n_radial = 60;

  struct Point {
    std::complex<double> beta;
    double weight;
  };

  /// Throws DomainError if the grid does not cover 5σ with radial spacing ≤ σ/6.
  std::vector<Point> points(double sigma) const;
};

}  // namespace teleamp
