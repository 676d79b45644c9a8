#include "uwrb/lagrange_space.hpp"

#include <string>

#include "uwrb/errors.hpp"

namespace uwrb {

LagrangeSpace::LagrangeSpace(std::shared_ptr<const Mesh> mesh, int order)
    : mesh_(std::move(mesh)), order_(order) {
  if (!mesh_) throw InvalidArgument("LagrangeSpace: null mesh");
  if (order < 1 || order > 6) throw InvalidArgument("LagrangeSpace: unsupported order " + std::to_string(order));
  nodes_per_axis_ = static_cast<std::size_t>(order_) * static_cast<std::size_t>(mesh_->cells_per_axis()) + 1;
  for (int m = 0; m <= order_; ++m) nodes_1d_.push_back(static_cast<double>(m) / order_);
}

std::size_t LagrangeSpace::dof(std::size_t cell, std::size_t local) const {
  const auto [i, j] = mesh_->cell_ij(cell);
  const std::size_t k1 = static_cast<std::size_t>(order_ + 1);
  const std::size_t a = local % k1;
  const std::size_t b = local / k1;
  const std::size_t ix = static_cast<std::size_t>(order_) * static_cast<std::size_t>(i) + a;
  const std::size_t iy = static_cast<std::size_t>(order_) * static_cast<std::size_t>(j) + b;
  return iy * nodes_per_axis_ + ix;
}

void LagrangeSpace::cell_dofs(std::size_t cell, std::span<std::size_t> out) const {
  const auto [i, j] = mesh_->cell_ij(cell);
  const std::size_t k = static_cast<std::size_t>(order_);
  const std::size_t x0 = k * static_cast<std::size_t>(i);
  const std::size_t y0 = k * static_cast<std::size_t>(j);
  std::size_t l = 0;
  for (std::size_t b = 0; b <= k; ++b)
    for (std::size_t a = 0; a <= k; ++a) out[l++] = (y0 + b) * nodes_per_axis_ + x0 + a;
}

std::vector<std::size_t> LagrangeSpace::cell_dofs(std::size_t cell) const {
  std::vector<std::size_t> out(dofs_per_cell());
  cell_dofs(cell, out);
  return out;
}

Vec2 LagrangeSpace::node(std::size_t dof) const {
  const double step = 1.0 / static_cast<double>(nodes_per_axis_ - 1);
  return {static_cast<double>(dof % nodes_per_axis_) * step, static_cast<double>(dof / nodes_per_axis_) * step};
}

double LagrangeSpace::shape_1d(int a, double t) const {
  double v = 1.0;
  for (int m = 0; m <= order_; ++m)
    if (m != a) v *= (t - nodes_1d_[m]) / (nodes_1d_[a] - nodes_1d_[m]);
  return v;
}

double LagrangeSpace::shape_1d_derivative(int a, double t) const {
  double sum = 0.0;
  for (int l = 0; l <= order_; ++l) {
    if (l == a) continue;
    double term = 1.0 / (nodes_1d_[a] - nodes_1d_[l]);
    for (int m = 0; m <= order_; ++m)
      if (m != a && m != l) term *= (t - nodes_1d_[m]) / (nodes_1d_[a] - nodes_1d_[m]);
    sum += term;
  }
  return sum;
}

void LagrangeSpace::reference_basis(const Vec2& xi, std::span<double> values, std::span<Vec2> gradients) const {
  const int k1 = order_ + 1;
  double vx[8], vy[8], dx[8], dy[8];
  for (int a = 0; a < k1; ++a) {
    vx[a] = shape_1d(a, xi.x());
    vy[a] = shape_1d(a, xi.y());
    dx[a] = shape_1d_derivative(a, xi.x());
    dy[a] = shape_1d_derivative(a, xi.y());
  }
  std::size_t l = 0;
  for (int b = 0; b < k1; ++b) {
    for (int a = 0; a < k1; ++a, ++l) {
      if (!values.empty()) values[l] = vx[a] * vy[b];
      if (!gradients.empty()) gradients[l] = Vec2(dx[a] * vy[b], vx[a] * dy[b]);
    }
  }
}

CellTabulation tabulate(const LagrangeSpace& space, const QuadratureRule& rule) {
  const std::size_t nb = space.dofs_per_cell();
  CellTabulation tab;
  tab.values.resize(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(rule.size()));
  tab.dx.resizeLike(tab.values);
  tab.dy.resizeLike(tab.values);
  std::vector<double> v(nb);
  std::vector<Vec2> g(nb);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    space.reference_basis(rule.point(q), v, g);
    for (std::size_t i = 0; i < nb; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto qq = static_cast<Eigen::Index>(q);
      tab.values(ii, qq) = v[i];
      tab.dx(ii, qq) = g[i].x();
      tab.dy(ii, qq) = g[i].y();
    }
  }
  return tab;
}

Vec2 face_reference_point(Face face, double t) {
  switch (face) {
    case Face::bottom: return {t, 0.0};
    case Face::right: return {1.0, t};
    case Face::top: return {t, 1.0};
    case Face::left: return {0.0, t};
  }
  return Vec2::Zero();
}

FieldSample evaluate_in_cell(const LagrangeSpace& space, const Eigen::VectorXd& coeffs, std::size_t cell,
                             const Vec2& point) {
  const Mesh& mesh = space.mesh();
  const Vec2 xi = (point - mesh.cell_origin(cell)) / mesh.h();
  const std::size_t nb = space.dofs_per_cell();
  double v[64];
  Vec2 g[64];
  std::size_t dofs[64];
  space.reference_basis(xi, std::span<double>(v, nb), std::span<Vec2>(g, nb));
  space.cell_dofs(cell, std::span<std::size_t>(dofs, nb));
  FieldSample s;
  for (std::size_t i = 0; i < nb; ++i) {
    const double c = coeffs[static_cast<Eigen::Index>(dofs[i])];
    s.value += c * v[i];
    s.gradient += c * g[i];
  }
  s.gradient /= mesh.h();
  return s;
}

std::vector<FieldSample> evaluate_field(const LagrangeSpace& space, const Eigen::VectorXd& coeffs,
                                        std::span<const Vec2> points) {
  if (static_cast<std::size_t>(coeffs.size()) != space.num_dofs())
    throw InvalidArgument("evaluate_field: coefficient vector has wrong size");
  std::vector<FieldSample> out;
  out.reserve(points.size());
  for (const Vec2& p : points) {
    if (!Mesh::contains(p)) throw InvalidArgument("evaluate_field: point outside the domain");
    out.push_back(evaluate_in_cell(space, coeffs, space.mesh().locate(p), p));
  }
  return out;
}

Eigen::VectorXd interpolate(const LagrangeSpace& space, const std::function<double(const Vec2&)>& f) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(space.num_dofs()));
  for (std::size_t i = 0; i < space.num_dofs(); ++i) c[static_cast<Eigen::Index>(i)] = f(space.node(i));
  return c;
}

}  // namespace uwrb
