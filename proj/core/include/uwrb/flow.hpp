#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <variant>

#include <Eigen/Core>

#include "uwrb/lagrange_space.hpp"
#include "uwrb/mesh.hpp"

namespace uwrb {

/// Laminar profile b(x,y) = (0, -(R^2 - r^2)/(4 eta)), r = |x - 1/2|.
struct PoiseuilleParameters {
  double radius = 0.5;
  double viscosity = 0.2;
};

double poiseuille_speed(double x, const PoiseuilleParameters& params = {});
Vec2 poiseuille_velocity(const Vec2& p, const PoiseuilleParameters& params = {});

/// k = 1 in free flow, k_w in the washcoat, k_c in the coating.
double permeability(Compartment c, double k_w, double k_c);

struct DarcyDiagnostics {
  double inflow_flux = 0.0;             ///< int_{Gamma_in} b.n from the discrete (consistent) boundary fluxes
  double outflow_flux = 0.0;
  double pointwise_inflow_flux = 0.0;   ///< same integrals by facet quadrature of -k grad p
  double pointwise_outflow_flux = 0.0;
  double pressure_min = 0.0;
  double pressure_max = 0.0;
  double solve_residual = 0.0;

  double flux_imbalance() const;  ///< |in + out| / |in|
  bool maximum_principle_holds(double tol = 1e-8) const {
    return pressure_min >= -tol && pressure_max <= 1.0 + tol;
  }
};

/// Discrete Darcy velocity b = -k grad p with p in Q^k on a fine mesh.
struct DarcyField {
  std::shared_ptr<const LagrangeSpace> space;
  Eigen::VectorXd pressure;
  double k_w = 0.2;
  double k_c = 0.05;
  DarcyDiagnostics diagnostics;
};

/// Transporting velocity field. Cheap to copy; immutable.
class FlowField {
 public:
  static FlowField poiseuille(const PoiseuilleParameters& params = {});
  static FlowField darcy(std::shared_ptr<const DarcyField> field);

  Geometry geometry() const noexcept;
  bool is_analytic() const noexcept { return std::holds_alternative<PoiseuilleParameters>(data_); }

  Vec2 velocity(const Vec2& p) const;
  /// For discrete fields, points on fine cell edges take the value of the cell
  /// lying towards `interior_hint`.
  Vec2 velocity(const Vec2& p, const Vec2& interior_hint) const;

  /// Upper estimate of max |b| over the domain.
  double max_speed() const noexcept { return max_speed_; }
  /// Natural length scale for streamline steps (fine mesh width for discrete fields).
  double resolution() const noexcept;

  const PoiseuilleParameters* poiseuille_parameters() const { return std::get_if<PoiseuilleParameters>(&data_); }
  const DarcyField* darcy_field() const;

 private:
  using Data = std::variant<PoiseuilleParameters, std::shared_ptr<const DarcyField>>;
  explicit FlowField(Data data);

  Data data_;
  double max_speed_ = 0.0;
};

/// Solves -div(k grad p) = 0 with p = 1 on the inflow, p = 0 on the outflow
/// and zero conormal flux elsewhere, using Q^order on `fine_mesh`.
/// Requires 0 < k_c <= k_w < 1.
FlowField solve_darcy(std::shared_ptr<const Mesh> fine_mesh, double k_w, double k_c, int order);

struct TraverseTimes {
  double t_min = 0.0;
  double t_max = 0.0;
  bool capped = false;          ///< at least one seed did not exit before the cap
  std::size_t seeds = 0;
  std::size_t capped_seeds = 0;
};

/// Exit time through the outflow boundary of the streamline started at `seed`
/// using classical RK4 with step dt; +infinity if t_cap is reached first.
double streamline_exit_time(const FlowField& flow, const Vec2& seed, double t_cap, double dt);

/// Integrates streamlines from n_seeds points spread uniformly on the inflow
/// boundary (half a spacing from the ends) with step h/(2 max|b|).
/// `step_h` <= 0 selects flow.resolution(). Throws EstimationFailure if no seed exits.
TraverseTimes estimate_traverse_times(const FlowField& flow, std::size_t n_seeds, double t_cap, double step_h = 0.0);

/// CSV with header x,y,bx,by sampled at cell centres of a uniform grid.
void write_velocity_csv(const FlowField& flow, std::ostream& out, int samples_per_axis);

}  // namespace uwrb
