#include "uwrb/flow.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

#include "uwrb/csv.hpp"
#include "uwrb/errors.hpp"
#include "uwrb/sparse.hpp"

namespace uwrb {

double poiseuille_speed(double x, const PoiseuilleParameters& params) {
  const double r = std::abs(x - 0.5);
  return (params.radius * params.radius - r * r) / (4.0 * params.viscosity);
}

Vec2 poiseuille_velocity(const Vec2& p, const PoiseuilleParameters& params) {
  return {0.0, -poiseuille_speed(p.x(), params)};
}

double permeability(Compartment c, double k_w, double k_c) {
  switch (c) {
    case Compartment::free: return 1.0;
    case Compartment::washcoat: return k_w;
    case Compartment::coating: return k_c;
  }
  return 1.0;
}

double DarcyDiagnostics::flux_imbalance() const {
  return inflow_flux == 0.0 ? std::numeric_limits<double>::infinity()
                            : std::abs(inflow_flux + outflow_flux) / std::abs(inflow_flux);
}

namespace {

Vec2 darcy_velocity_in_cell(const DarcyField& field, std::size_t cell, const Vec2& p) {
  const FieldSample s = evaluate_in_cell(*field.space, field.pressure, cell, p);
  const double k = permeability(field.space->mesh().compartment(cell), field.k_w, field.k_c);
  return -k * s.gradient;
}

double sampled_max_speed(const DarcyField& field) {
  const Mesh& mesh = field.space->mesh();
  const GaussRule1D line = gauss_legendre(3);
  std::vector<double> ts = {0.0, 1.0};
  ts.insert(ts.end(), line.points.begin(), line.points.end());
  double vmax = 0.0;
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
    const Vec2 o = mesh.cell_origin(c);
    for (double tx : ts)
      for (double ty : ts)
        vmax = std::max(vmax, darcy_velocity_in_cell(field, c, o + mesh.h() * Vec2(tx, ty)).norm());
  }
  return vmax;
}

}  // namespace

FlowField::FlowField(Data data) : data_(std::move(data)) {
  if (const auto* pp = std::get_if<PoiseuilleParameters>(&data_)) {
    max_speed_ = poiseuille_speed(0.5, *pp);
  } else {
    max_speed_ = sampled_max_speed(*std::get<std::shared_ptr<const DarcyField>>(data_));
  }
}

FlowField FlowField::poiseuille(const PoiseuilleParameters& params) {
  if (!(params.viscosity > 0.0)) throw InvalidArgument("poiseuille: viscosity must be positive");
  return FlowField(Data(params));
}

FlowField FlowField::darcy(std::shared_ptr<const DarcyField> field) {
  if (!field || !field->space) throw InvalidArgument("FlowField::darcy: empty field");
  return FlowField(Data(std::move(field)));
}

Geometry FlowField::geometry() const noexcept {
  return is_analytic() ? Geometry::poiseuille : Geometry::darcy;
}

const DarcyField* FlowField::darcy_field() const {
  if (const auto* p = std::get_if<std::shared_ptr<const DarcyField>>(&data_)) return p->get();
  return nullptr;
}

double FlowField::resolution() const noexcept {
  if (const DarcyField* d = darcy_field()) return d->space->mesh().h();
  return 1.0 / 64.0;
}

Vec2 FlowField::velocity(const Vec2& p) const {
  if (const auto* pp = std::get_if<PoiseuilleParameters>(&data_)) return poiseuille_velocity(p, *pp);
  const DarcyField& f = *darcy_field();
  return darcy_velocity_in_cell(f, f.space->mesh().locate(p), p);
}

Vec2 FlowField::velocity(const Vec2& p, const Vec2& interior_hint) const {
  if (const auto* pp = std::get_if<PoiseuilleParameters>(&data_)) return poiseuille_velocity(p, *pp);
  const DarcyField& f = *darcy_field();
  return darcy_velocity_in_cell(f, f.space->mesh().locate(p, interior_hint), p);
}

FlowField solve_darcy(std::shared_ptr<const Mesh> fine_mesh, double k_w, double k_c, int order) {
  if (!fine_mesh) throw InvalidArgument("solve_darcy: null mesh");
  if (!(k_c > 0.0 && k_c <= k_w && k_w < 1.0))
    throw InvalidArgument("solve_darcy: permeabilities must satisfy 0 < k_c <= k_w < 1");

  auto space = std::make_shared<const LagrangeSpace>(fine_mesh, order);
  const Mesh& mesh = *fine_mesh;
  const std::size_t n = space->num_dofs();
  const std::size_t nb = space->dofs_per_cell();

  // stiffness: for square cells the h factors cancel in 2D
  const QuadratureRule rule(order + 1);
  const CellTabulation tab = tabulate(*space, rule);
  const CellAssembler assembler(*space);
  SparseMatrix stiffness = assembler.zero_matrix();
  Eigen::MatrixXd ref(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(nb));
  ref.setZero();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto qq = static_cast<Eigen::Index>(q);
    ref.noalias() += rule.weight(q) * (tab.dx.col(qq) * tab.dx.col(qq).transpose() +
                                       tab.dy.col(qq) * tab.dy.col(qq).transpose());
  }
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    assembler.add(stiffness, c, permeability(mesh.compartment(c), k_w, k_c) * ref);

  // Dirichlet nodes: closed inflow segment {0}x[3/4,1] (p=1), outflow {1}x[0,1/4] (p=0)
  constexpr double eps = 1e-12;
  enum class Kind : unsigned char { free, inflow, outflow };
  std::vector<Kind> kind(n, Kind::free);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 x = space->node(i);
    if (x.x() < eps && x.y() > 0.75 - eps) {
      kind[i] = Kind::inflow;
      p[static_cast<Eigen::Index>(i)] = 1.0;
    } else if (x.x() > 1.0 - eps && x.y() < 0.25 + eps) {
      kind[i] = Kind::outflow;
    }
  }
  std::vector<int> free_index(n, -1);
  int nfree = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (kind[i] == Kind::free) free_index[i] = nfree++;

  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(static_cast<std::size_t>(stiffness.nonZeros()));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
  for (int col = 0; col < stiffness.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(stiffness, col); it; ++it) {
      const int fr = free_index[static_cast<std::size_t>(it.row())];
      if (fr < 0) continue;
      const int fc = free_index[static_cast<std::size_t>(col)];
      if (fc >= 0)
        triplets.emplace_back(fr, fc, it.value());
      else
        rhs[fr] -= it.value() * p[col];
    }
  }
  SparseMatrix reduced(nfree, nfree);
  reduced.setFromTriplets(triplets.begin(), triplets.end());
  const Eigen::VectorXd pf = solve_spd(reduced, rhs);
  for (std::size_t i = 0; i < n; ++i)
    if (free_index[i] >= 0) p[static_cast<Eigen::Index>(i)] = pf[free_index[i]];

  auto field = std::make_shared<DarcyField>();
  field->space = space;
  field->pressure = p;
  field->k_w = k_w;
  field->k_c = k_c;

  DarcyDiagnostics& diag = field->diagnostics;
  diag.solve_residual = relative_residual(reduced, pf, rhs);
  diag.pressure_min = p.minCoeff();
  diag.pressure_max = p.maxCoeff();

  // consistent fluxes: sum_{i in D} (K p)_i = -int_{Gamma_D} b.n
  const Eigen::VectorXd kp = stiffness * p;
  for (std::size_t i = 0; i < n; ++i) {
    if (kind[i] == Kind::inflow) diag.inflow_flux -= kp[static_cast<Eigen::Index>(i)];
    if (kind[i] == Kind::outflow) diag.outflow_flux -= kp[static_cast<Eigen::Index>(i)];
  }

  const GaussRule1D line = gauss_legendre(order + 2);
  for (const BoundaryFacet& f : classify_boundary(mesh, Geometry::darcy)) {
    if (f.tag == FacetTag::characteristic) continue;
    double integral = 0.0;
    for (std::size_t q = 0; q < line.size(); ++q) {
      const Vec2 x = f.a + line.points[q] * (f.b - f.a);
      integral += line.weights[q] * f.length() * darcy_velocity_in_cell(*field, f.cell, x).dot(f.outer_normal());
    }
    (f.tag == FacetTag::inflow ? diag.pointwise_inflow_flux : diag.pointwise_outflow_flux) += integral;
  }

  if (!diag.maximum_principle_holds())
    std::clog << "uwrb: warning: Darcy pressure violates the discrete maximum principle (min "
              << diag.pressure_min << ", max " << diag.pressure_max << ")\n";

  return FlowField::darcy(std::move(field));
}

namespace {

bool darcy_outflow_crossing(const Vec2& next) { return next.x() >= 1.0 && next.y() <= 0.25 + 1e-9; }

Vec2 clamp_to_domain(const Vec2& p) { return p.cwiseMax(0.0).cwiseMin(1.0); }

}  // namespace

double streamline_exit_time(const FlowField& flow, const Vec2& seed, double t_cap, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("streamline_exit_time: step must be positive");
  const bool poiseuille = flow.geometry() == Geometry::poiseuille;
  const auto b = [&](const Vec2& x) { return flow.velocity(clamp_to_domain(x)); };

  Vec2 x = seed;
  double t = 0.0;
  while (t < t_cap) {
    const Vec2 k1 = b(x);
    const Vec2 k2 = b(x + 0.5 * dt * k1);
    const Vec2 k3 = b(x + 0.5 * dt * k2);
    const Vec2 k4 = b(x + dt * k3);
    const Vec2 next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (poiseuille && next.y() <= 0.0) {
      const double frac = x.y() / (x.y() - next.y());
      return t + frac * dt;
    }
    if (!poiseuille && darcy_outflow_crossing(next)) {
      const double frac = (1.0 - x.x()) / (next.x() - x.x());
      return t + frac * dt;
    }
    if ((next - x).squaredNorm() == 0.0) break;  // stagnation point
    x = clamp_to_domain(next);
    t += dt;
  }
  return std::numeric_limits<double>::infinity();
}

TraverseTimes estimate_traverse_times(const FlowField& flow, std::size_t n_seeds, double t_cap, double step_h) {
  if (n_seeds < 2) throw InvalidArgument("estimate_traverse_times: need at least two seeds");
  if (!(t_cap > 0.0)) throw InvalidArgument("estimate_traverse_times: t_cap must be positive");
  const double h = step_h > 0.0 ? step_h : flow.resolution();
  const double dt = h / (2.0 * flow.max_speed());

  TraverseTimes out;
  out.seeds = n_seeds;
  out.t_min = std::numeric_limits<double>::infinity();
  out.t_max = 0.0;
  std::size_t exited = 0;
  for (std::size_t i = 0; i < n_seeds; ++i) {
    const double s = (static_cast<double>(i) + 0.5) / static_cast<double>(n_seeds);
    const double t = streamline_exit_time(flow, inflow_point(flow.geometry(), s), t_cap, dt);
    if (std::isfinite(t)) {
      ++exited;
      out.t_min = std::min(out.t_min, t);
      out.t_max = std::max(out.t_max, t);
    } else {
      ++out.capped_seeds;
    }
  }
  if (exited == 0)
    throw EstimationFailure("estimate_traverse_times: no streamline reached the outflow within t_cap = " +
                            std::to_string(t_cap));
  out.capped = out.capped_seeds > 0;
  return out;
}

void write_velocity_csv(const FlowField& flow, std::ostream& out, int samples_per_axis) {
  if (samples_per_axis < 1) throw InvalidArgument("write_velocity_csv: need at least one sample per axis");
  write_csv_header(out, {"x", "y", "bx", "by"});
  for (int j = 0; j < samples_per_axis; ++j) {
    for (int i = 0; i < samples_per_axis; ++i) {
      const Vec2 p((i + 0.5) / samples_per_axis, (j + 0.5) / samples_per_axis);
      const Vec2 b = flow.velocity(p);
      write_csv_row(out, {p.x(), p.y(), b.x(), b.y()});
    }
  }
}

}  // namespace uwrb
