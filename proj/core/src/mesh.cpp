#include "uwrb/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uwrb/errors.hpp"

namespace uwrb {

const char* to_string(Geometry g) {
  switch (g) {
    case Geometry::poiseuille: return "poiseuille";
    case Geometry::darcy: return "darcy";
  }
  return "?";
}

const char* to_string(Compartment c) {
  switch (c) {
    case Compartment::free: return "free";
    case Compartment::washcoat: return "washcoat";
    case Compartment::coating: return "coating";
  }
  return "?";
}

const char* to_string(FacetTag t) {
  switch (t) {
    case FacetTag::inflow: return "inflow";
    case FacetTag::outflow: return "outflow";
    case FacetTag::characteristic: return "characteristic";
  }
  return "?";
}

namespace filter {
Compartment compartment_at(const Vec2& p) {
  const double y = p.y();
  if (y > washcoat_lower && y < washcoat_upper) return Compartment::washcoat;
  if (y > coating_lower && y < coating_upper) return Compartment::coating;
  return Compartment::free;
}
}  // namespace filter

Mesh::Mesh(int level) : level_(level) {
  if (level < 0) throw InvalidArgument("Mesh: refinement level must be >= 0, got " + std::to_string(level));
  if (level > 12) throw InvalidArgument("Mesh: refinement level " + std::to_string(level) + " is beyond desk scale");
  n_ = 1 << (level + 3);
  h_ = std::ldexp(1.0, -(level + 3));

  const int nv = n_ + 1;
  vertices_.reserve(static_cast<std::size_t>(nv) * static_cast<std::size_t>(nv));
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nv; ++i) vertices_.emplace_back(i * h_, j * h_);

  const auto vid = [nv](int i, int j) {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nv) + static_cast<std::size_t>(i);
  };
  cells_.reserve(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_));
  compartments_.reserve(cells_.capacity());
  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i < n_; ++i) {
      cells_.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
      compartments_.push_back(filter::compartment_at(Vec2((i + 0.5) * h_, (j + 0.5) * h_)));
    }
  }
}

Vec2 Mesh::cell_origin(std::size_t cell) const {
  const auto [i, j] = cell_ij(cell);
  return {i * h_, j * h_};
}

Vec2 Mesh::cell_center(std::size_t cell) const {
  const auto [i, j] = cell_ij(cell);
  return {(i + 0.5) * h_, (j + 0.5) * h_};
}

bool Mesh::contains(const Vec2& p, double tol) {
  return p.x() >= -tol && p.x() <= 1.0 + tol && p.y() >= -tol && p.y() <= 1.0 + tol;
}

std::size_t Mesh::locate(const Vec2& p) const {
  if (!contains(p)) throw InvalidArgument("Mesh::locate: point outside the unit square");
  const auto index = [this](double t) {
    return std::clamp(static_cast<int>(std::floor(t / h_)), 0, n_ - 1);
  };
  return cell_index(index(p.x()), index(p.y()));
}

std::size_t Mesh::locate(const Vec2& p, const Vec2& toward) const {
  if (!contains(p)) throw InvalidArgument("Mesh::locate: point outside the unit square");
  const Vec2 d = toward - p;
  const double len = d.norm();
  if (len == 0.0) return locate(p);
  Vec2 q = p + (1e-9 * h_ / len) * d;
  q = q.cwiseMax(0.0).cwiseMin(1.0);
  return locate(q);
}

Vec2 BoundaryFacet::outer_normal() const {
  switch (face) {
    case Face::bottom: return {0.0, -1.0};
    case Face::right: return {1.0, 0.0};
    case Face::top: return {0.0, 1.0};
    case Face::left: return {-1.0, 0.0};
  }
  return Vec2::Zero();
}

Vec2 inflow_point(Geometry geometry, double s) {
  switch (geometry) {
    case Geometry::poiseuille: return {s, 1.0};
    case Geometry::darcy: return {0.0, 0.75 + 0.25 * s};
  }
  return Vec2::Zero();
}

double inflow_parameter(Geometry geometry, const Vec2& p) {
  switch (geometry) {
    case Geometry::poiseuille: return p.x();
    case Geometry::darcy: return 4.0 * (p.y() - 0.75);
  }
  return 0.0;
}

double boundary_measure(Geometry geometry, FacetTag tag) {
  switch (geometry) {
    case Geometry::poiseuille:
      return tag == FacetTag::characteristic ? 2.0 : 1.0;
    case Geometry::darcy:
      return tag == FacetTag::characteristic ? 3.5 : 0.25;
  }
  return 0.0;
}

namespace {

FacetTag tag_for(Geometry geometry, Face face, const Vec2& mid) {
  if (geometry == Geometry::poiseuille) {
    if (face == Face::top) return FacetTag::inflow;
    if (face == Face::bottom) return FacetTag::outflow;
    return FacetTag::characteristic;
  }
  if (face == Face::left && mid.y() > 0.75) return FacetTag::inflow;
  if (face == Face::right && mid.y() < 0.25) return FacetTag::outflow;
  return FacetTag::characteristic;
}

}  // namespace

std::vector<BoundaryFacet> classify_boundary(const Mesh& mesh, Geometry geometry) {
  const int n = mesh.cells_per_axis();
  const double h = mesh.h();
  std::vector<BoundaryFacet> facets;
  facets.reserve(4 * static_cast<std::size_t>(n));

  const auto add = [&](int i, int j, Face face, Vec2 a, Vec2 b) {
    BoundaryFacet f;
    f.cell = mesh.cell_index(i, j);
    f.face = face;
    f.tag = tag_for(geometry, face, 0.5 * (a + b));
    if (f.tag == FacetTag::inflow) {
      double sa = inflow_parameter(geometry, a);
      double sb = inflow_parameter(geometry, b);
      if (sa > sb) {
        std::swap(a, b);
        std::swap(sa, sb);
      }
      f.s_begin = sa;
      f.s_end = sb;
    }
    f.a = a;
    f.b = b;
    facets.push_back(f);
  };

  for (int i = 0; i < n; ++i) add(i, 0, Face::bottom, {i * h, 0.0}, {(i + 1) * h, 0.0});
  for (int j = 0; j < n; ++j) add(n - 1, j, Face::right, {1.0, j * h}, {1.0, (j + 1) * h});
  for (int i = 0; i < n; ++i) add(i, n - 1, Face::top, {i * h, 1.0}, {(i + 1) * h, 1.0});
  for (int j = 0; j < n; ++j) add(0, j, Face::left, {0.0, j * h}, {0.0, (j + 1) * h});
  return facets;
}

Mesh build_mesh(int r) { return Mesh(r); }

}  // namespace uwrb
