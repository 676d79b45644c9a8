#pragma once

#include <cstddef>
#include <vector>

#include "uwrb/mesh.hpp"

namespace uwrb {

/// Gauss-Legendre points and weights on [0,1]; n points integrate
/// polynomials of degree 2n-1 exactly and the weights sum to 1.
struct GaussRule1D {
  std::vector<double> points;
  std::vector<double> weights;
  std::size_t size() const noexcept { return points.size(); }
};

GaussRule1D gauss_legendre(int n);

/// Tensor Gauss-Legendre rule on the reference square [0,1]^2, points ordered x-fastest.
class QuadratureRule {
 public:
  explicit QuadratureRule(int points_per_direction);

  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return points_.size(); }
  const Vec2& point(std::size_t q) const { return points_[q]; }
  double weight(std::size_t q) const { return weights_[q]; }
  const GaussRule1D& line() const noexcept { return line_; }

 private:
  int order_;
  GaussRule1D line_;
  std::vector<Vec2> points_;
  std::vector<double> weights_;
};

/// Default number of points per direction for Q^k forms with non-polynomial velocity.
inline int default_quadrature_order(int polynomial_order) { return polynomial_order + 2; }

}  // namespace uwrb
