#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "uwrb/flow.hpp"
#include "uwrb/lagrange_space.hpp"
#include "uwrb/mesh.hpp"
#include "uwrb/sparse.hpp"

namespace uwrb {

/// Inflow concentration profiles g(s), s in [0,1].
enum class InflowProfile { sin4pi_sq, indicator_quarter, sin_pi_sq };

const char* to_string(InflowProfile p);
double inflow_profile(InflowProfile p, double s);
/// Points in (0,1) where the profile is not smooth.
std::vector<double> profile_breakpoints(InflowProfile p);

/// mu = (c_w, c_c, g_0): reaction rates in washcoat and coating, inflow magnitude.
struct Parameter {
  double c_w = 0.0;
  double c_c = 0.0;
  double g_0 = 1.0;

  friend bool operator==(const Parameter&, const Parameter&) = default;
  /// Supremum of the piecewise constant reaction coefficient.
  double max_reaction() const { return std::max(c_w, c_c); }
};

/// Admissible parameter sets of the parametrized testcases.
enum class ParameterDomain { p1, p2, p3 };

const char* to_string(ParameterDomain d);
bool is_admissible(ParameterDomain d, const Parameter& mu, double tol = 1e-12);
/// Throws DomainError if mu is not admissible.
void require_admissible(ParameterDomain d, const Parameter& mu);

/// Operator coefficients theta^a(mu) = (1, c_w, c_c).
inline std::array<double, 3> operator_coefficients(const Parameter& mu) { return {1.0, mu.c_w, mu.c_c}; }

/// Number of symmetric affine terms of the normal-equation matrix.
inline constexpr std::size_t num_symmetric_terms = 6;

/// Coefficients of the symmetric terms
///   S_0 = M11, S_1 = M12 + M21, S_2 = M13 + M31, S_3 = M22, S_4 = M33, S_5 = M23 + M32,
/// i.e. (1, c_w, c_c, c_w^2, c_c^2, c_w c_c).
std::array<double, num_symmetric_terms> symmetric_coefficients(const Parameter& mu);

struct AssemblyOptions {
  int quadrature_order = 0;  ///< points per direction, 0 selects k+2
  std::size_t threads = 1;
};

/// Parameter-separable full-order model of the normal equation
///   sum_{p,q} theta_p theta_q (D_p w, D_q v)_X = g_0 f(v)
/// with D_1 v = (-b.grad v, v|out), D_2 v = (chi_w v, 0), D_3 v = (chi_c v, 0).
struct AffineSystem {
  std::shared_ptr<const LagrangeSpace> space;
  FlowField flow;
  std::vector<BoundaryFacet> facets;
  InflowProfile profile = InflowProfile::sin_pi_sq;
  int quadrature_order = 0;

  /// Upper-triangular blocks M^{p,q}, p <= q, in the order 11, 12, 13, 22, 23, 33.
  std::array<SparseMatrix, 6> blocks;
  /// S_j as documented at symmetric_coefficients().
  std::array<SparseMatrix, num_symmetric_terms> symmetric_terms;
  /// f(v) = (g, v)_{L2(Gamma_in, |b.n|)} for unit magnitude.
  Eigen::VectorXd rhs;
  /// H^1(b) Gram matrix.
  SparseMatrix gram;

  std::size_t num_dofs() const { return space->num_dofs(); }
  /// M^{p,q} for p, q in {1,2,3}; lower blocks are returned transposed.
  SparseMatrix block(int p, int q) const;
  SparseMatrix combined(const Parameter& mu) const;
  Eigen::VectorXd rhs_for(const Parameter& mu) const { return mu.g_0 * rhs; }
};

/// Streamline Gram matrix: v^T G v = |b.grad v|^2 + |v|^2 in L2.
SparseMatrix assemble_h1b_gram(const LagrangeSpace& space, const FlowField& flow, const AssemblyOptions& options = {});

/// Assembles all affine blocks, the right-hand side and the H^1(b) Gram matrix.
/// Throws InvalidArgument if the facets were classified for another geometry than the flow's.
AffineSystem assemble_affine(std::shared_ptr<const LagrangeSpace> space, const FlowField& flow,
                             std::vector<BoundaryFacet> facets, InflowProfile profile,
                             const AssemblyOptions& options = {});

struct FomSolution {
  Eigen::VectorXd coefficients;
  Parameter mu;
  double residual = 0.0;  ///< relative algebraic residual
  double seconds = 0.0;   ///< wall time of combine + factorize + solve
};

FomSolution solve_fom(const AffineSystem& sys, const Parameter& mu, const SolverOptions& options = {});

/// Quadrature points on which primal fields are represented.
struct QuadratureLayout {
  std::shared_ptr<const Mesh> mesh;
  int quadrature_order = 0;
  std::vector<Vec2> points;
  Eigen::VectorXd weights;                 ///< physical weights, sum to 1
  std::vector<Compartment> compartments;
  std::vector<Vec2> outflow_points;
  Eigen::VectorXd outflow_weights;         ///< arc-length weights on the outflow boundary
  Eigen::VectorXd outflow_flux_weights;    ///< arc-length weights times |b.n|
};

/// Primal solution pr(u) = -b.grad w + c w on volume quadrature points and the
/// outflow trace u_hat = w on outflow quadrature points.
struct PrimalField {
  std::shared_ptr<const QuadratureLayout> layout;
  Eigen::VectorXd volume;
  Eigen::VectorXd outflow_trace;
};

/// Precomputed linear maps from coefficient vectors to primal quadrature values.
/// The layout mesh may be any refinement of the space's mesh, which lets coarse
/// solutions be compared to fine references without interpolation error.
class PrimalReconstructor {
 public:
  explicit PrimalReconstructor(const AffineSystem& sys);
  PrimalReconstructor(const AffineSystem& sys, std::shared_ptr<const Mesh> layout_mesh, int quadrature_order);

  PrimalField operator()(const Eigen::VectorXd& w, const Parameter& mu) const;
  const std::shared_ptr<const QuadratureLayout>& layout() const noexcept { return layout_; }

 private:
  std::size_t num_dofs_ = 0;
  std::shared_ptr<const QuadratureLayout> layout_;
  SparseMatrix streamline_;  ///< rows: -b.grad phi_j at volume points
  SparseMatrix values_;      ///< rows: phi_j at volume points
  SparseMatrix trace_;       ///< rows: phi_j at outflow points
  Eigen::VectorXd washcoat_;
  Eigen::VectorXd coating_;
};

PrimalField reconstruct_primal(const AffineSystem& sys, const Parameter& mu, const Eigen::VectorXd& w);

/// Quadrature L2(Omega) norm of primal - reference.
double l2_error(const PrimalField& primal, const std::function<double(const Vec2&)>& reference);
/// Requires both fields on the same layout; throws InvalidArgument otherwise.
double l2_error(const PrimalField& primal, const PrimalField& reference);
double l2_norm(const PrimalField& primal);
/// L2(Gamma_out) norm (unweighted arc length) of the outflow trace.
double outflow_trace_norm(const PrimalField& primal);

/// Exact solution of the Poiseuille transport problem,
/// u(x,y) = g(x) exp(-int_y^1 c(x,t) dt / b0(x)), for reaction rates c_w, c_c
/// and unit inflow magnitude. Throws DegenerateStreamline where b0(x) = 0.
double exact_poiseuille(const Vec2& p, double c_w, double c_c, InflowProfile profile,
                        const PoiseuilleParameters& params = {});

/// Length of [y,1] intersected with the washcoat and with the coating.
std::array<double, 2> reaction_path_lengths(double y);

}  // namespace uwrb
