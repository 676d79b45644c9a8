#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace uwrb {

using Vec2 = Eigen::Vector2d;

/// Filter compartments. Washcoat is the band 3/8 < y < 5/8, the coating
/// surrounds it inside 1/4 < y < 3/4, everything else is free flow.
enum class Compartment : std::uint8_t { free, washcoat, coating };

enum class Geometry { poiseuille, darcy };

enum class FacetTag : std::uint8_t { inflow, outflow, characteristic };

/// Local face numbering of a square cell.
enum class Face : std::uint8_t { bottom = 0, right = 1, top = 2, left = 3 };

const char* to_string(Geometry g);
const char* to_string(Compartment c);
const char* to_string(FacetTag t);

namespace filter {
inline constexpr double washcoat_lower = 3.0 / 8.0;
inline constexpr double washcoat_upper = 5.0 / 8.0;
inline constexpr double coating_lower = 1.0 / 4.0;
inline constexpr double coating_upper = 3.0 / 4.0;

/// Compartment containing point p (interior points; ties on band edges go to the outer region).
Compartment compartment_at(const Vec2& p);
}  // namespace filter

/// Uniform quadrilateral mesh of the unit square at refinement level r,
/// with 2^(r+3) square cells per axis. Cells are numbered x-fastest.
class Mesh {
 public:
  explicit Mesh(int level);

  int level() const noexcept { return level_; }
  int cells_per_axis() const noexcept { return n_; }
  double h() const noexcept { return h_; }
  std::size_t num_cells() const noexcept { return compartments_.size(); }
  std::size_t num_vertices() const noexcept { return vertices_.size(); }

  const Vec2& vertex(std::size_t v) const { return vertices_[v]; }
  /// Counterclockwise starting at the lower-left corner.
  const std::array<std::size_t, 4>& cell_vertices(std::size_t cell) const { return cells_[cell]; }

  std::size_t cell_index(int i, int j) const noexcept {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
  }
  std::pair<int, int> cell_ij(std::size_t cell) const noexcept {
    return {static_cast<int>(cell % static_cast<std::size_t>(n_)),
            static_cast<int>(cell / static_cast<std::size_t>(n_))};
  }
  Vec2 cell_origin(std::size_t cell) const;
  Vec2 cell_center(std::size_t cell) const;
  double cell_area() const noexcept { return h_ * h_; }
  Compartment compartment(std::size_t cell) const { return compartments_[cell]; }

  /// Cell containing p. Points on interior cell edges are resolved towards
  /// `toward`, which should lie strictly inside the intended cell.
  /// Throws InvalidArgument for points outside the closed unit square.
  std::size_t locate(const Vec2& p) const;
  std::size_t locate(const Vec2& p, const Vec2& toward) const;

  static bool contains(const Vec2& p, double tol = 1e-12);

 private:
  int level_;
  int n_;
  double h_;
  std::vector<Vec2> vertices_;
  std::vector<std::array<std::size_t, 4>> cells_;
  std::vector<Compartment> compartments_;
};

/// Validates r >= 0 and builds the mesh.
Mesh build_mesh(int r);

struct BoundaryFacet {
  std::size_t cell = 0;
  Face face = Face::bottom;
  Vec2 a = Vec2::Zero();  ///< start point; for inflow facets the inflow parameter increases from a to b
  Vec2 b = Vec2::Zero();
  FacetTag tag = FacetTag::characteristic;
  double s_begin = 0.0;  ///< inflow parameter range, only meaningful for inflow facets
  double s_end = 0.0;

  Vec2 midpoint() const { return 0.5 * (a + b); }
  double length() const { return (b - a).norm(); }
  Vec2 outer_normal() const;
};

/// Tags every boundary facet of the mesh for the given geometry:
///  poiseuille: inflow [0,1]x{1}, outflow [0,1]x{0}, sides characteristic;
///  darcy:      inflow {0}x(3/4,1), outflow {1}x(0,1/4), rest characteristic.
std::vector<BoundaryFacet> classify_boundary(const Mesh& mesh, Geometry geometry);

/// Inflow parametrization phi: [0,1] -> inflow boundary and its inverse.
Vec2 inflow_point(Geometry geometry, double s);
double inflow_parameter(Geometry geometry, const Vec2& p);

/// Analytic measure of the inflow/outflow/characteristic boundary parts.
double boundary_measure(Geometry geometry, FacetTag tag);

}  // namespace uwrb
