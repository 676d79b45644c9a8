#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include <gtest/gtest.h>

#include "uwrb/errors.hpp"
#include "uwrb/flow.hpp"

using namespace uwrb;

namespace {

const FlowField& darcy_flow() {
  static const FlowField flow = solve_darcy(std::make_shared<const Mesh>(build_mesh(3)), 0.2, 0.05, 2);
  return flow;
}

}  // namespace

TEST(Poiseuille, VelocityExamples) {
  EXPECT_TRUE(poiseuille_velocity(Vec2(0.5, 0.3)).isApprox(Vec2(0.0, -0.3125)));
  EXPECT_EQ(poiseuille_velocity(Vec2(0.0, 0.8)).norm(), 0.0);
  EXPECT_EQ(poiseuille_velocity(Vec2(1.0, 0.8)).norm(), 0.0);
  EXPECT_DOUBLE_EQ(poiseuille_velocity(Vec2(0.625, 0.1)).y(), -0.29296875);
  EXPECT_DOUBLE_EQ(poiseuille_velocity(Vec2(0.625, 0.1)).x(), 0.0);
}

TEST(Poiseuille, FlowFieldWrapsProfile) {
  const FlowField f = FlowField::poiseuille();
  EXPECT_TRUE(f.is_analytic());
  EXPECT_EQ(f.geometry(), Geometry::poiseuille);
  EXPECT_DOUBLE_EQ(f.max_speed(), 0.3125);
  EXPECT_EQ(f.darcy_field(), nullptr);
  EXPECT_TRUE(f.velocity(Vec2(0.3, 0.4)).isApprox(poiseuille_velocity(Vec2(0.3, 0.4))));
  EXPECT_THROW(FlowField::poiseuille({0.5, 0.0}), InvalidArgument);
}

TEST(Permeability, CompartmentValues) {
  EXPECT_EQ(permeability(Compartment::free, 0.2, 0.05), 1.0);
  EXPECT_EQ(permeability(Compartment::washcoat, 0.2, 0.05), 0.2);
  EXPECT_EQ(permeability(Compartment::coating, 0.2, 0.05), 0.05);
  EXPECT_EQ(permeability(filter::compartment_at(Vec2(0.5, 0.5)), 0.2, 0.05), 0.2);
}

TEST(Darcy, PressureMatchesBoundaryValues) {
  const DarcyField* d = darcy_flow().darcy_field();
  ASSERT_NE(d, nullptr);
  const std::vector<Vec2> in{{0.0, 0.76}, {0.0, 0.875}, {0.0, 0.99}};
  for (const auto& s : evaluate_field(*d->space, d->pressure, in)) EXPECT_NEAR(s.value, 1.0, 1e-12);
  const std::vector<Vec2> out{{1.0, 0.01}, {1.0, 0.125}, {1.0, 0.24}};
  for (const auto& s : evaluate_field(*d->space, d->pressure, out)) EXPECT_NEAR(s.value, 0.0, 1e-12);
}

TEST(Darcy, FluxBalance) {
  const DarcyDiagnostics& diag = darcy_flow().darcy_field()->diagnostics;
  EXPECT_LT(diag.inflow_flux, 0.0);
  EXPECT_GT(diag.outflow_flux, 0.0);
  EXPECT_LE(diag.flux_imbalance(), 1e-6);
  EXPECT_LE(diag.solve_residual, 1e-10);
}

TEST(Darcy, MaximumPrinciple) {
  const DarcyField* d = darcy_flow().darcy_field();
  EXPECT_TRUE(d->diagnostics.maximum_principle_holds());
  EXPECT_GE(d->pressure.minCoeff(), -1e-8);
  EXPECT_LE(d->pressure.maxCoeff(), 1.0 + 1e-8);
}

TEST(Darcy, VelocityIsMinusKGradP) {
  const FlowField& flow = darcy_flow();
  const DarcyField* d = flow.darcy_field();
  for (const Vec2 p : {Vec2(0.3, 0.5), Vec2(0.7, 0.9), Vec2(0.51, 0.3)}) {
    const std::vector<Vec2> pts{p};
    const auto s = evaluate_field(*d->space, d->pressure, pts);
    const double k = permeability(filter::compartment_at(p), d->k_w, d->k_c);
    EXPECT_TRUE(flow.velocity(p).isApprox(-k * s[0].gradient, 1e-12));
  }
  EXPECT_EQ(flow.geometry(), Geometry::darcy);
  EXPECT_FALSE(flow.is_analytic());
  EXPECT_GT(flow.max_speed(), 0.0);
  EXPECT_DOUBLE_EQ(flow.resolution(), 1.0 / 64.0);
}

TEST(Darcy, InvalidPermeabilitiesThrow) {
  auto mesh = std::make_shared<const Mesh>(build_mesh(0));
  EXPECT_THROW(solve_darcy(mesh, 0.05, 0.2, 1), InvalidArgument);
  EXPECT_THROW(solve_darcy(mesh, 1.0, 0.05, 1), InvalidArgument);
  EXPECT_THROW(solve_darcy(mesh, 0.2, 0.0, 1), InvalidArgument);
  EXPECT_THROW(solve_darcy(nullptr, 0.2, 0.05, 1), InvalidArgument);
}

TEST(Streamlines, PoiseuilleCentreExitTime) {
  const FlowField f = FlowField::poiseuille();
  const double dt = (1.0 / 32.0) / (2.0 * f.max_speed());
  EXPECT_NEAR(streamline_exit_time(f, Vec2(0.5, 1.0), 100.0, dt), 3.2, 3.2e-6);
}

TEST(Streamlines, PoiseuilleExitTimeIsInverseSpeed) {
  const FlowField f = FlowField::poiseuille();
  const double dt = (1.0 / 32.0) / (2.0 * f.max_speed());
  for (double x : {0.1, 0.27, 0.5, 0.81, 0.95}) {
    const double expected = 1.0 / poiseuille_speed(x);
    EXPECT_NEAR(streamline_exit_time(f, Vec2(x, 1.0), 1e3, dt) / expected, 1.0, 1e-6) << "x=" << x;
  }
  EXPECT_EQ(streamline_exit_time(f, Vec2(0.0, 1.0), 50.0, dt), std::numeric_limits<double>::infinity());
  EXPECT_THROW(streamline_exit_time(f, Vec2(0.5, 1.0), 50.0, 0.0), InvalidArgument);
}

TEST(TraverseTimes, PoiseuilleSeedsNearWallsAreCapped) {
  const TraverseTimes t = estimate_traverse_times(FlowField::poiseuille(), 64, 100.0, 1.0 / 32.0);
  EXPECT_TRUE(t.capped);
  EXPECT_GT(t.capped_seeds, 0u);
  EXPECT_EQ(t.seeds, 64u);
  EXPECT_LE(t.t_min, t.t_max);
  EXPECT_GE(t.t_min, 3.2 - 1e-6);
  EXPECT_LT(t.t_min, 3.3);
  EXPECT_LE(t.t_max, 100.0);
}

TEST(TraverseTimes, DarcyFieldIsOrdered) {
  const TraverseTimes t = estimate_traverse_times(darcy_flow(), 16, 100.0);
  EXPECT_GT(t.t_min, 0.0);
  EXPECT_LE(t.t_min, t.t_max);
}

TEST(TraverseTimes, ErrorPaths) {
  const FlowField f = FlowField::poiseuille();
  EXPECT_THROW(estimate_traverse_times(f, 64, 0.5, 1.0 / 32.0), EstimationFailure);
  EXPECT_THROW(estimate_traverse_times(f, 1, 100.0), InvalidArgument);
  EXPECT_THROW(estimate_traverse_times(f, 8, 0.0), InvalidArgument);
}

TEST(VelocityCsv, HeaderAndRows) {
  std::ostringstream out;
  write_velocity_csv(FlowField::poiseuille(), out, 4);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,y,bx,by");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 16);
  std::ostringstream bad;
  EXPECT_THROW(write_velocity_csv(FlowField::poiseuille(), bad, 0), InvalidArgument);
}
