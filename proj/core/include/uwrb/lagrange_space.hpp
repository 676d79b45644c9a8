#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "uwrb/mesh.hpp"
#include "uwrb/quadrature.hpp"

namespace uwrb {

/// Continuous Lagrange space Q^k on a Mesh with equispaced nodes.
///
/// Global dofs are the nodes of the (k*n+1)^2 lattice, numbered
/// lexicographically x-fastest. Local basis index is a + (k+1)*b for the
/// 1D node indices a (x) and b (y) of the reference cell.
class LagrangeSpace {
 public:
  LagrangeSpace(std::shared_ptr<const Mesh> mesh, int order);

  const Mesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
  int order() const noexcept { return order_; }
  std::size_t nodes_per_axis() const noexcept { return nodes_per_axis_; }
  std::size_t num_dofs() const noexcept { return nodes_per_axis_ * nodes_per_axis_; }
  std::size_t dofs_per_cell() const noexcept {
    return static_cast<std::size_t>((order_ + 1) * (order_ + 1));
  }

  /// Global index of local basis function `local` on `cell`.
  std::size_t dof(std::size_t cell, std::size_t local) const;
  void cell_dofs(std::size_t cell, std::span<std::size_t> out) const;
  std::vector<std::size_t> cell_dofs(std::size_t cell) const;
  Vec2 node(std::size_t dof) const;

  /// 1D Lagrange basis on [0,1] with nodes m/k.
  double shape_1d(int a, double t) const;
  double shape_1d_derivative(int a, double t) const;

  /// Values and reference-coordinate gradients of all cell basis functions at
  /// reference point xi. Physical gradients are these divided by h.
  void reference_basis(const Vec2& xi, std::span<double> values, std::span<Vec2> gradients) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int order_;
  std::size_t nodes_per_axis_;
  std::vector<double> nodes_1d_;
};

/// Reference basis tabulated at the points of a quadrature rule.
/// values(i, q), dx(i, q), dy(i, q) with reference derivatives.
struct CellTabulation {
  Eigen::MatrixXd values;
  Eigen::MatrixXd dx;
  Eigen::MatrixXd dy;
};

CellTabulation tabulate(const LagrangeSpace& space, const QuadratureRule& rule);

/// Reference coordinates of point t in [0,1] along a face.
Vec2 face_reference_point(Face face, double t);

struct FieldSample {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
};

/// Evaluates the finite element function with coefficients `coeffs` at physical
/// points. Throws InvalidArgument for points outside the unit square.
std::vector<FieldSample> evaluate_field(const LagrangeSpace& space, const Eigen::VectorXd& coeffs,
                                        std::span<const Vec2> points);

/// Evaluation restricted to a known cell (no point location).
FieldSample evaluate_in_cell(const LagrangeSpace& space, const Eigen::VectorXd& coeffs, std::size_t cell,
                             const Vec2& point);

/// Nodal interpolant of f.
Eigen::VectorXd interpolate(const LagrangeSpace& space, const std::function<double(const Vec2&)>& f);

}  // namespace uwrb
