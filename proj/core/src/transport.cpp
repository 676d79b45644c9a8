#include "uwrb/transport.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include "uwrb/errors.hpp"
#include "uwrb/parallel.hpp"
#include "uwrb/quadrature.hpp"

namespace uwrb {

const char* to_string(InflowProfile p) {
  switch (p) {
    case InflowProfile::sin4pi_sq: return "sin4pi_sq";
    case InflowProfile::indicator_quarter: return "indicator_quarter";
    case InflowProfile::sin_pi_sq: return "sin_pi_sq";
  }
  return "?";
}

double inflow_profile(InflowProfile p, double s) {
  switch (p) {
    case InflowProfile::sin4pi_sq: {
      const double v = std::sin(4.0 * std::numbers::pi * s);
      return v * v;
    }
    case InflowProfile::indicator_quarter: return (s >= 0.25 && s <= 0.75) ? 1.0 : 0.0;
    case InflowProfile::sin_pi_sq: {
      const double v = std::sin(std::numbers::pi * s);
      return v * v;
    }
  }
  return 0.0;
}

std::vector<double> profile_breakpoints(InflowProfile p) {
  if (p == InflowProfile::indicator_quarter) return {0.25, 0.75};
  return {};
}

const char* to_string(ParameterDomain d) {
  switch (d) {
    case ParameterDomain::p1: return "P.1";
    case ParameterDomain::p2: return "P.2";
    case ParameterDomain::p3: return "P.3";
  }
  return "?";
}

bool is_admissible(ParameterDomain d, const Parameter& mu, double tol) {
  const auto in = [tol](double v, double lo, double hi) { return v >= lo - tol && v <= hi + tol; };
  if (!std::isfinite(mu.c_w) || !std::isfinite(mu.c_c) || !std::isfinite(mu.g_0)) return false;
  switch (d) {
    case ParameterDomain::p1:
      return in(mu.c_w, 0.0, 1.0) && std::abs(mu.c_c) <= tol && std::abs(mu.g_0 - 1.0) <= tol;
    case ParameterDomain::p2:
      return in(mu.c_c, 0.0, 1.0) && in(mu.c_w, 0.0, 1.0) && mu.c_c <= mu.c_w + tol && std::abs(mu.g_0 - 1.0) <= tol;
    case ParameterDomain::p3:
      return in(mu.c_c, 0.0, 1.0) && in(mu.c_w, 0.0, 1.0) && mu.c_c <= mu.c_w + tol && in(mu.g_0, 1.0, 10.0);
  }
  return false;
}

void require_admissible(ParameterDomain d, const Parameter& mu) {
  if (!is_admissible(d, mu))
    throw DomainError("parameter (" + std::to_string(mu.c_w) + ", " + std::to_string(mu.c_c) + ", " +
                      std::to_string(mu.g_0) + ") is not admissible for " + to_string(d));
}

std::array<double, num_symmetric_terms> symmetric_coefficients(const Parameter& mu) {
  return {1.0, mu.c_w, mu.c_c, mu.c_w * mu.c_w, mu.c_c * mu.c_c, mu.c_w * mu.c_c};
}

namespace {

int block_index(int p, int q) {
  static constexpr int table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  if (p < 1 || p > 3 || q < 1 || q > 3) throw InvalidArgument("AffineSystem::block: indices must lie in {1,2,3}");
  return table[p - 1][q - 1];
}

/// A + A^T for a structurally symmetric A, keeping A's pattern (explicit zeros included).
SparseMatrix symmetrize_same_pattern(const SparseMatrix& a) {
  SparseMatrix out = a;
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const double* values = a.valuePtr();
  for (int col = 0; col < a.outerSize(); ++col) {
    for (int k = outer[col]; k < outer[col + 1]; ++k) {
      const int row = inner[k];
      const int* begin = inner + outer[row];
      const int* end = inner + outer[row + 1];
      const int* it = std::lower_bound(begin, end, col);
      if (it == end || *it != col) throw InvalidArgument("symmetrize_same_pattern: pattern is not symmetric");
      out.valuePtr()[k] += values[it - inner];
    }
  }
  return out;
}

struct CellForms {
  Eigen::MatrixXd bb;  // sum w (b.grad phi_a)(b.grad phi_b)
  Eigen::MatrixXd bv;  // sum w (b.grad phi_a) phi_b
  Eigen::MatrixXd vv;  // sum w phi_a phi_b
};

/// Per-axis number of flow cells inside one cell of `mesh`: discrete velocity
/// fields are only piecewise smooth on their own (finer) mesh.
int flow_subdivisions(const FlowField& flow, const Mesh& mesh) {
  const DarcyField* darcy = flow.darcy_field();
  if (!darcy) return 1;
  const int diff = darcy->space->mesh().level() - mesh.level();
  return diff > 0 ? 1 << diff : 1;
}

class CellIntegrator {
 public:
  CellIntegrator(const LagrangeSpace& space, const FlowField& flow, int quadrature_order)
      : space_(space), flow_(flow), subdivisions_(flow_subdivisions(flow, space.mesh())) {
    const QuadratureRule rule(quadrature_order);
    const int s = subdivisions_;
    const double hs = 1.0 / s;
    const std::size_t nb = space.dofs_per_cell();
    const std::size_t nq = rule.size() * static_cast<std::size_t>(s * s);
    points_.reserve(nq);
    weights_.reserve(nq);
    hints_.reserve(nq);
    for (int j = 0; j < s; ++j)
      for (int i = 0; i < s; ++i) {
        const Vec2 corner(i * hs, j * hs);
        for (std::size_t q = 0; q < rule.size(); ++q) {
          points_.push_back(corner + hs * rule.point(q));
          weights_.push_back(rule.weight(q) * hs * hs);
          hints_.push_back(corner + Vec2(0.5 * hs, 0.5 * hs));
        }
      }
    values_.resize(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(nq));
    dx_.resizeLike(values_);
    dy_.resizeLike(values_);
    std::vector<double> v(nb);
    std::vector<Vec2> g(nb);
    for (std::size_t q = 0; q < nq; ++q) {
      space.reference_basis(points_[q], v, g);
      for (std::size_t a = 0; a < nb; ++a) {
        const auto aa = static_cast<Eigen::Index>(a);
        const auto qq = static_cast<Eigen::Index>(q);
        values_(aa, qq) = v[a];
        dx_(aa, qq) = g[a].x();
        dy_(aa, qq) = g[a].y();
      }
    }
  }

  void compute(std::size_t cell, CellForms& out, bool with_bb = true) const {
    const Mesh& mesh = space_.mesh();
    const double h = mesh.h();
    const Vec2 origin = mesh.cell_origin(cell);
    const auto nb = values_.rows();
    out.bb.setZero(nb, nb);
    out.bv.setZero(nb, nb);
    out.vv.setZero(nb, nb);
    Eigen::VectorXd bgrad(nb);
    for (std::size_t q = 0; q < points_.size(); ++q) {
      const auto qq = static_cast<Eigen::Index>(q);
      const Vec2 x = origin + h * points_[q];
      const Vec2 b = flow_.velocity(x, origin + h * hints_[q]);
      const double w = weights_[q] * h * h;
      bgrad = (b.x() / h) * dx_.col(qq) + (b.y() / h) * dy_.col(qq);
      if (with_bb) out.bb.noalias() += w * bgrad * bgrad.transpose();
      out.bv.noalias() += w * bgrad * values_.col(qq).transpose();
      out.vv.noalias() += w * values_.col(qq) * values_.col(qq).transpose();
    }
  }

 private:
  const LagrangeSpace& space_;
  const FlowField& flow_;
  int subdivisions_;
  std::vector<Vec2> points_;   // reference coordinates
  std::vector<double> weights_;
  std::vector<Vec2> hints_;    // reference centre of the flow cell owning each point
  Eigen::MatrixXd values_;
  Eigen::MatrixXd dx_;
  Eigen::MatrixXd dy_;
};

/// Cells split into four colors so that cells of one color share no dofs.
std::array<std::vector<std::size_t>, 4> color_cells(const Mesh& mesh) {
  std::array<std::vector<std::size_t>, 4> colors;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const auto [i, j] = mesh.cell_ij(c);
    colors[static_cast<std::size_t>((i % 2) + 2 * (j % 2))].push_back(c);
  }
  return colors;
}

template <class Body>
void for_each_cell_colored(const Mesh& mesh, std::size_t threads, Body&& body) {
  for (const auto& cells : color_cells(mesh))
    parallel_for(cells.size(), threads, [&](std::size_t i) { body(cells[i]); });
}

void check_facets(const Mesh& mesh, Geometry geometry, const std::vector<BoundaryFacet>& facets) {
  const std::vector<BoundaryFacet> expected = classify_boundary(mesh, geometry);
  if (expected.size() != facets.size())
    throw InvalidArgument("assemble_affine: facet list does not belong to the space's mesh");
  for (std::size_t i = 0; i < facets.size(); ++i) {
    if (facets[i].cell != expected[i].cell || facets[i].face != expected[i].face || facets[i].tag != expected[i].tag)
      throw InvalidArgument(std::string("assemble_affine: facets were not classified for the ") +
                            to_string(geometry) + " geometry of the flow field");
  }
}

/// Basis values of `cell` at physical point x.
void basis_at(const LagrangeSpace& space, std::size_t cell, const Vec2& x, std::span<double> values,
              std::span<Vec2> grads = {}) {
  const Mesh& mesh = space.mesh();
  space.reference_basis((x - mesh.cell_origin(cell)) / mesh.h(), values, grads);
}

}  // namespace

SparseMatrix AffineSystem::block(int p, int q) const {
  const SparseMatrix& m = blocks[static_cast<std::size_t>(block_index(p, q))];
  if (p <= q) return m;
  return SparseMatrix(m.transpose());
}

SparseMatrix AffineSystem::combined(const Parameter& mu) const {
  const auto theta = symmetric_coefficients(mu);
  std::vector<const SparseMatrix*> terms;
  for (const auto& s : symmetric_terms) terms.push_back(&s);
  return combine_same_pattern(terms, std::vector<double>(theta.begin(), theta.end()));
}

SparseMatrix assemble_h1b_gram(const LagrangeSpace& space, const FlowField& flow, const AssemblyOptions& options) {
  const int qord = options.quadrature_order > 0 ? options.quadrature_order : default_quadrature_order(space.order());
  const CellAssembler assembler(space);
  const CellIntegrator integrator(space, flow, qord);
  SparseMatrix gram = assembler.zero_matrix();
  for_each_cell_colored(space.mesh(), options.threads, [&](std::size_t cell) {
    CellForms forms;
    integrator.compute(cell, forms);
    assembler.add(gram, cell, forms.bb + forms.vv);
  });
  return gram;
}

AffineSystem assemble_affine(std::shared_ptr<const LagrangeSpace> space, const FlowField& flow,
                             std::vector<BoundaryFacet> facets, InflowProfile profile,
                             const AssemblyOptions& options) {
  if (!space) throw InvalidArgument("assemble_affine: null space");
  const Mesh& mesh = space->mesh();
  check_facets(mesh, flow.geometry(), facets);

  AffineSystem sys{space, flow, std::move(facets), profile, 0, {}, {}, {}, {}};
  const int qord = options.quadrature_order > 0 ? options.quadrature_order : default_quadrature_order(space->order());
  sys.quadrature_order = qord;

  const CellAssembler assembler(*space);
  for (auto& b : sys.blocks) b = assembler.zero_matrix();
  sys.gram = assembler.zero_matrix();
  auto& [m11, m12, m13, m22, m23, m33] = sys.blocks;

  const CellIntegrator integrator(*space, flow, qord);
  for_each_cell_colored(mesh, options.threads, [&](std::size_t cell) {
    CellForms forms;
    integrator.compute(cell, forms);
    const Compartment comp = mesh.compartment(cell);
    const double chi_w = comp == Compartment::washcoat ? 1.0 : 0.0;
    const double chi_c = comp == Compartment::coating ? 1.0 : 0.0;
    assembler.add(m11, cell, forms.bb);
    assembler.add(m12, cell, -chi_w * forms.bv);
    assembler.add(m13, cell, -chi_c * forms.bv);
    assembler.add(m22, cell, chi_w * forms.vv);
    assembler.add(m23, cell, (chi_w * chi_c) * forms.vv);
    assembler.add(m33, cell, chi_c * forms.vv);
    assembler.add(sys.gram, cell, forms.bb + forms.vv);
  });

  // boundary terms: outflow trace in M11, inflow data in the rhs
  const std::size_t nb = space->dofs_per_cell();
  const GaussRule1D line = gauss_legendre(qord);
  std::vector<double> phi(nb);
  std::vector<std::size_t> dofs(nb);
  Eigen::MatrixXd local(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(nb));
  sys.rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space->num_dofs()));
  const std::vector<double> breaks = profile_breakpoints(profile);
  const int subdiv = flow_subdivisions(flow, mesh);

  for (const BoundaryFacet& f : sys.facets) {
    if (f.tag == FacetTag::characteristic) continue;
    const Vec2 center = mesh.cell_center(f.cell);
    const Vec2 n = f.outer_normal();
    space->cell_dofs(f.cell, dofs);

    // pieces on which flow and data are smooth
    std::vector<double> cuts;
    for (int i = 0; i <= subdiv; ++i) cuts.push_back(static_cast<double>(i) / subdiv);
    if (f.tag == FacetTag::inflow) {
      for (double s : breaks) {
        const double t = (s - f.s_begin) / (f.s_end - f.s_begin);
        if (t > 1e-14 && t < 1.0 - 1e-14) cuts.push_back(t);
      }
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return b - a < 1e-14; }), cuts.end());
    }

    if (f.tag == FacetTag::outflow) {
      local.setZero();
      for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
        const double t0 = cuts[piece];
        const double t1 = cuts[piece + 1];
        for (std::size_t q = 0; q < line.size(); ++q) {
          const Vec2 x = f.a + (t0 + (t1 - t0) * line.points[q]) * (f.b - f.a);
          const double w = line.weights[q] * (t1 - t0) * f.length() * std::abs(flow.velocity(x, center).dot(n));
          basis_at(*space, f.cell, x, phi);
          const Eigen::Map<const Eigen::VectorXd> v(phi.data(), static_cast<Eigen::Index>(nb));
          local.noalias() += w * v * v.transpose();
        }
      }
      assembler.add(m11, f.cell, local);
      continue;
    }

    for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
      const double t0 = cuts[piece];
      const double t1 = cuts[piece + 1];
      for (std::size_t q = 0; q < line.size(); ++q) {
        const double t = t0 + (t1 - t0) * line.points[q];
        const Vec2 x = f.a + t * (f.b - f.a);
        const double s = f.s_begin + t * (f.s_end - f.s_begin);
        const double w = line.weights[q] * (t1 - t0) * f.length() * std::abs(flow.velocity(x, center).dot(n));
        basis_at(*space, f.cell, x, phi);
        const double g = inflow_profile(profile, s);
        for (std::size_t a = 0; a < nb; ++a) sys.rhs[static_cast<Eigen::Index>(dofs[a])] += w * g * phi[a];
      }
    }
  }

  sys.symmetric_terms[0] = m11;
  sys.symmetric_terms[1] = symmetrize_same_pattern(m12);
  sys.symmetric_terms[2] = symmetrize_same_pattern(m13);
  sys.symmetric_terms[3] = m22;
  sys.symmetric_terms[4] = m33;
  sys.symmetric_terms[5] = symmetrize_same_pattern(m23);
  return sys;
}

FomSolution solve_fom(const AffineSystem& sys, const Parameter& mu, const SolverOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const SparseMatrix a = sys.combined(mu);
  const Eigen::VectorXd f = sys.rhs_for(mu);
  FomSolution sol;
  sol.mu = mu;
  sol.coefficients = solve_spd(a, f, options);
  sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  sol.residual = relative_residual(a, sol.coefficients, f);
  return sol;
}

namespace {

std::shared_ptr<const Mesh> default_layout_mesh(const AffineSystem& sys) {
  const DarcyField* darcy = sys.flow.darcy_field();
  if (darcy && darcy->space->mesh().level() > sys.space->mesh().level()) return darcy->space->mesh_ptr();
  return sys.space->mesh_ptr();
}

}  // namespace

PrimalReconstructor::PrimalReconstructor(const AffineSystem& sys)
    : PrimalReconstructor(sys, default_layout_mesh(sys), sys.quadrature_order) {}

PrimalReconstructor::PrimalReconstructor(const AffineSystem& sys, std::shared_ptr<const Mesh> layout_mesh,
                                         int quadrature_order)
    : num_dofs_(sys.num_dofs()) {
  if (!layout_mesh) throw InvalidArgument("PrimalReconstructor: null layout mesh");
  const LagrangeSpace& space = *sys.space;
  const Mesh& coarse = space.mesh();
  if (layout_mesh->level() < coarse.level())
    throw InvalidArgument("PrimalReconstructor: layout mesh must refine the solution mesh");

  auto layout = std::make_shared<QuadratureLayout>();
  layout->mesh = layout_mesh;
  layout->quadrature_order = quadrature_order;
  const Mesh& fine = *layout_mesh;
  const QuadratureRule rule(quadrature_order);
  const std::size_t nb = space.dofs_per_cell();
  const std::size_t nq = fine.num_cells() * rule.size();

  layout->points.reserve(nq);
  layout->weights.resize(static_cast<Eigen::Index>(nq));
  layout->compartments.reserve(nq);
  washcoat_.resize(static_cast<Eigen::Index>(nq));
  coating_.resize(static_cast<Eigen::Index>(nq));

  std::vector<Eigen::Triplet<double, int>> stream_t;
  std::vector<Eigen::Triplet<double, int>> value_t;
  stream_t.reserve(nq * nb);
  value_t.reserve(nq * nb);
  std::vector<double> phi(nb);
  std::vector<Vec2> grad(nb);
  std::vector<std::size_t> dofs(nb);

  int row = 0;
  for (std::size_t cell = 0; cell < fine.num_cells(); ++cell) {
    const Vec2 origin = fine.cell_origin(cell);
    const Vec2 center = fine.cell_center(cell);
    const Compartment comp = fine.compartment(cell);
    const std::size_t owner = coarse.locate(center);
    space.cell_dofs(owner, dofs);
    for (std::size_t q = 0; q < rule.size(); ++q, ++row) {
      const Vec2 x = origin + fine.h() * rule.point(q);
      layout->points.push_back(x);
      layout->weights[row] = rule.weight(q) * fine.h() * fine.h();
      layout->compartments.push_back(comp);
      washcoat_[row] = comp == Compartment::washcoat ? 1.0 : 0.0;
      coating_[row] = comp == Compartment::coating ? 1.0 : 0.0;
      const Vec2 b = sys.flow.velocity(x, center);
      basis_at(space, owner, x, phi, grad);
      for (std::size_t a = 0; a < nb; ++a) {
        const int col = static_cast<int>(dofs[a]);
        stream_t.emplace_back(row, col, -b.dot(grad[a]) / coarse.h());
        value_t.emplace_back(row, col, phi[a]);
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(num_dofs_);
  streamline_.resize(static_cast<Eigen::Index>(nq), n);
  streamline_.setFromTriplets(stream_t.begin(), stream_t.end());
  values_.resize(static_cast<Eigen::Index>(nq), n);
  values_.setFromTriplets(value_t.begin(), value_t.end());

  const GaussRule1D line = gauss_legendre(quadrature_order);
  std::vector<Eigen::Triplet<double, int>> trace_t;
  std::vector<double> ow;
  std::vector<double> ofw;
  int trow = 0;
  for (const BoundaryFacet& f : classify_boundary(fine, sys.flow.geometry())) {
    if (f.tag != FacetTag::outflow) continue;
    const Vec2 center = fine.cell_center(f.cell);
    const std::size_t owner = coarse.locate(center);
    space.cell_dofs(owner, dofs);
    for (std::size_t q = 0; q < line.size(); ++q, ++trow) {
      const Vec2 x = f.a + line.points[q] * (f.b - f.a);
      layout->outflow_points.push_back(x);
      ow.push_back(line.weights[q] * f.length());
      ofw.push_back(ow.back() * std::abs(sys.flow.velocity(x, center).dot(f.outer_normal())));
      basis_at(space, owner, x, phi);
      for (std::size_t a = 0; a < nb; ++a) trace_t.emplace_back(trow, static_cast<int>(dofs[a]), phi[a]);
    }
  }
  layout->outflow_weights = Eigen::Map<const Eigen::VectorXd>(ow.data(), static_cast<Eigen::Index>(ow.size()));
  layout->outflow_flux_weights = Eigen::Map<const Eigen::VectorXd>(ofw.data(), static_cast<Eigen::Index>(ofw.size()));
  trace_.resize(trow, n);
  trace_.setFromTriplets(trace_t.begin(), trace_t.end());
  layout_ = std::move(layout);
}

PrimalField PrimalReconstructor::operator()(const Eigen::VectorXd& w, const Parameter& mu) const {
  if (static_cast<std::size_t>(w.size()) != num_dofs_)
    throw InvalidArgument("PrimalReconstructor: coefficient vector has wrong size");
  PrimalField out;
  out.layout = layout_;
  out.volume = streamline_ * w;
  if (mu.c_w != 0.0 || mu.c_c != 0.0) {
    const Eigen::VectorXd values = values_ * w;
    out.volume.array() += (mu.c_w * washcoat_.array() + mu.c_c * coating_.array()) * values.array();
  }
  out.outflow_trace = trace_ * w;
  return out;
}

PrimalField reconstruct_primal(const AffineSystem& sys, const Parameter& mu, const Eigen::VectorXd& w) {
  return PrimalReconstructor(sys)(w, mu);
}

double l2_error(const PrimalField& primal, const std::function<double(const Vec2&)>& reference) {
  if (!primal.layout) throw InvalidArgument("l2_error: field without layout");
  const auto& pts = primal.layout->points;
  double sum = 0.0;
  for (std::size_t q = 0; q < pts.size(); ++q) {
    const auto qq = static_cast<Eigen::Index>(q);
    const double d = primal.volume[qq] - reference(pts[q]);
    sum += primal.layout->weights[qq] * d * d;
  }
  return std::sqrt(sum);
}

double l2_error(const PrimalField& primal, const PrimalField& reference) {
  if (!primal.layout || !reference.layout) throw InvalidArgument("l2_error: field without layout");
  if (primal.layout != reference.layout) {
    const auto& a = *primal.layout;
    const auto& b = *reference.layout;
    bool same = a.points.size() == b.points.size();
    for (std::size_t q = 0; same && q < a.points.size(); ++q) same = (a.points[q] - b.points[q]).norm() <= 1e-14;
    if (!same) throw InvalidArgument("l2_error: fields live on different quadrature layouts");
  }
  const Eigen::VectorXd d = primal.volume - reference.volume;
  return std::sqrt(primal.layout->weights.dot(d.cwiseAbs2()));
}

double l2_norm(const PrimalField& primal) {
  return std::sqrt(primal.layout->weights.dot(primal.volume.cwiseAbs2()));
}

double outflow_trace_norm(const PrimalField& primal) {
  return std::sqrt(primal.layout->outflow_weights.dot(primal.outflow_trace.cwiseAbs2()));
}

std::array<double, 2> reaction_path_lengths(double y) {
  const auto overlap = [y](double lo, double hi) { return std::max(0.0, hi - std::max(lo, y)); };
  const double washcoat = overlap(filter::washcoat_lower, filter::washcoat_upper);
  const double coating =
      overlap(filter::coating_lower, filter::washcoat_lower) + overlap(filter::washcoat_upper, filter::coating_upper);
  return {washcoat, coating};
}

double exact_poiseuille(const Vec2& p, double c_w, double c_c, InflowProfile profile,
                        const PoiseuilleParameters& params) {
  const double b0 = poiseuille_speed(p.x(), params);
  if (!(b0 > 0.0))
    throw DegenerateStreamline("exact_poiseuille: zero transport speed at x = " + std::to_string(p.x()));
  const auto [lw, lc] = reaction_path_lengths(p.y());
  return inflow_profile(profile, p.x()) * std::exp(-(c_w * lw + c_c * lc) / b0);
}

}  // namespace uwrb
