#include "uwrb/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "uwrb/errors.hpp"

namespace uwrb {

GaussRule1D gauss_legendre(int n) {
  if (n < 1 || n > 64) throw InvalidArgument("gauss_legendre: unsupported point count " + std::to_string(n));
  GaussRule1D rule;
  rule.points.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));

  // Newton iteration on P_n over [-1,1], mapped to [0,1] afterwards.
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0;
    double p1 = x;
    for (int m = 2; m <= n; ++m) {
      const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
      p0 = p1;
      p1 = p2;
    }
    const double pn = n == 1 ? x : p1;
    const double pnm1 = n == 1 ? 1.0 : p0;
    dp = n * (x * pn - pnm1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);

    // ascending order on [0,1]
    const auto idx = static_cast<std::size_t>(i);
    rule.points[idx] = 0.5 * (1.0 - x);
    rule.weights[idx] = 0.5 * w;
  }
  return rule;
}

QuadratureRule::QuadratureRule(int points_per_direction)
    : order_(points_per_direction), line_(gauss_legendre(points_per_direction)) {
  const std::size_t n = line_.size();
  points_.reserve(n * n);
  weights_.reserve(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      points_.emplace_back(line_.points[i], line_.points[j]);
      weights_.push_back(line_.weights[i] * line_.weights[j]);
    }
  }
}

}  // namespace uwrb
