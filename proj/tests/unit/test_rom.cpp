#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "uwrb/errors.hpp"
#include "uwrb/persistence.hpp"
#include "uwrb/rom.hpp"
#include "uwrb/study.hpp"

using namespace uwrb;

namespace {

const FlowField& darcy_flow() {
  static const FlowField flow = solve_darcy(std::make_shared<const Mesh>(build_mesh(2)), 0.2, 0.05, 2);
  return flow;
}

const AffineSystem& small_system() {
  static const AffineSystem sys = [] {
    auto mesh = std::make_shared<const Mesh>(build_mesh(0));
    auto space = std::make_shared<const LagrangeSpace>(mesh, 1);
    return assemble_affine(space, darcy_flow(), classify_boundary(*mesh, Geometry::darcy), InflowProfile::sin_pi_sq);
  }();
  return sys;
}

const AffineSystem& medium_system() {
  static const AffineSystem sys = [] {
    auto mesh = std::make_shared<const Mesh>(build_mesh(1));
    auto space = std::make_shared<const LagrangeSpace>(mesh, 1);
    return assemble_affine(space, darcy_flow(), classify_boundary(*mesh, Geometry::darcy), InflowProfile::sin_pi_sq);
  }();
  return sys;
}

EstimatorConstants test_constants() { return constants_from_override(20.0); }

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

double dual_norm(const AffineSystem& sys, const Parameter& mu, const Eigen::VectorXd& u) {
  const Eigen::VectorXd r = sys.rhs_for(mu) - sys.combined(mu) * u;
  const Eigen::MatrixXd g = sys.gram;
  return std::sqrt(r.dot(oracle::cholesky_solve(g, r)));
}

GreedyResult train(const AffineSystem& sys, const std::vector<Parameter>& training, std::size_t n_max,
                   GreedyMode mode = GreedyMode::weak) {
  GreedyOptions o;
  o.mode = mode;
  o.max_basis_size = n_max;
  o.constants = test_constants();
  return greedy_train(sys, training, o);
}

}  // namespace

TEST(Constants, CoercivityLowerBound) {
  EXPECT_DOUBLE_EQ(coercivity_lower_bound({0.0, 0.0, 1.0}, 1.0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(coercivity_lower_bound({0.5, 0.2, 1.0}, 2.0), 1.0 / (2.0 + 4.0 * (2.0 * 0.25 + 1.0)));
  double previous = 1.0;
  for (double cw = 0.0; cw <= 1.0; cw += 0.1) {
    const double a = coercivity_lower_bound({cw, 0.0, 1.0}, 3.0);
    EXPECT_LE(a, previous);
    previous = a;
  }
}

TEST(Constants, PoincareBound) {
  EXPECT_DOUBLE_EQ(poincare_bound(1.0, 2.0), 4.0);
  EXPECT_DOUBLE_EQ(poincare_bound(0.25, 2.0), 4.75);
  TraverseTimes t;
  t.t_min = 0.5;
  t.t_max = 3.0;
  t.capped = true;
  const EstimatorConstants c = constants_from_traverse_times(t);
  EXPECT_DOUBLE_EQ(c.poincare, 6.5);
  EXPECT_TRUE(c.capped);
  EXPECT_FALSE(c.overridden);
  EXPECT_TRUE(constants_from_override(7.0).overridden);
  EXPECT_DOUBLE_EQ(constants_from_override(7.0).poincare, 7.0);
}

TEST(GramSchmidt, SingleVectorIsNormalized) {
  const AffineSystem& sys = small_system();
  const Eigen::VectorXd v = random_matrix(static_cast<Eigen::Index>(sys.num_dofs()), 1, 1).col(0);
  const ReducedBasis b = gram_schmidt(v, sys.gram);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_LE((b.vectors.col(0) - v / gram_norm(sys.gram, v)).norm(), 1e-13 * b.vectors.col(0).norm());
}

TEST(GramSchmidt, DuplicateVectorIsDropped) {
  const AffineSystem& sys = small_system();
  const Eigen::VectorXd v = random_matrix(static_cast<Eigen::Index>(sys.num_dofs()), 1, 2).col(0);
  Eigen::MatrixXd twice(v.size(), 2);
  twice << v, v;
  EXPECT_EQ(gram_schmidt(twice, sys.gram).size(), 1u);
  ReducedBasis b = gram_schmidt(v, sys.gram);
  EXPECT_FALSE(extend_basis(b, 3.0 * v, sys.gram));
  EXPECT_EQ(b.size(), 1u);
}

TEST(GramSchmidt, RandomVectorsBecomeOrthonormal) {
  const AffineSystem& sys = small_system();
  const Eigen::MatrixXd v = random_matrix(static_cast<Eigen::Index>(sys.num_dofs()), 5, 3);
  const ReducedBasis b = gram_schmidt(v, sys.gram);
  ASSERT_EQ(b.size(), 5u);
  const Eigen::MatrixXd g = sys.gram;
  // G^{1/2} B must have orthonormal columns
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const Eigen::MatrixXd root = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  const Eigen::MatrixXd q = root * b.vectors;
  EXPECT_LE((q.transpose() * q - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-10);
  // same span as the input
  const Eigen::MatrixXd coeffs = b.vectors.colPivHouseholderQr().solve(v);
  EXPECT_LE((b.vectors * coeffs - v).norm(), 1e-10 * v.norm());
}

TEST(GramSchmidt, AllZeroThrows) {
  const AffineSystem& sys = small_system();
  EXPECT_THROW(gram_schmidt(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sys.num_dofs()), 2), sys.gram), EmptyBasis);
}

TEST(ReducedModel, BlocksAreProjections) {
  const AffineSystem& sys = small_system();
  const ReducedBasis b = gram_schmidt(random_matrix(static_cast<Eigen::Index>(sys.num_dofs()), 4, 4), sys.gram);
  const SpdFactorization g(sys.gram);
  const ReducedModel m = build_reduced_model(sys, g, b, test_constants());
  ASSERT_EQ(m.size(), 4u);
  for (int p = 1; p <= 3; ++p)
    for (int q = 1; q <= 3; ++q) {
      const Eigen::MatrixXd y = b.vectors.transpose() * (sys.block(p, q) * b.vectors);
      EXPECT_LE((m.blocks[p - 1][q - 1] - y).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + y.cwiseAbs().maxCoeff()));
      EXPECT_LE((m.blocks[p - 1][q - 1] - m.blocks[q - 1][p - 1].transpose()).cwiseAbs().maxCoeff(), 1e-12);
    }
  EXPECT_LE((m.rhs - b.vectors.transpose() * sys.rhs).norm(), 1e-13);
  const Parameter mu{0.4, 0.3, 1.0};
  const Eigen::MatrixXd online = b.vectors.transpose() * (sys.combined(mu) * b.vectors);
  EXPECT_LE((m.online_matrix(mu) - online).cwiseAbs().maxCoeff(), 1e-12 * online.cwiseAbs().maxCoeff());
  const ReducedModel p2 = m.prefix(2);
  EXPECT_EQ(p2.size(), 2u);
  EXPECT_EQ(p2.blocks[0][1], m.blocks[0][1].topLeftCorner(2, 2));
  EXPECT_EQ(p2.residual_gram.rows(), 1 + 6 * 2);
}

TEST(RomSolve, ResidualNormMatchesDirectComputation) {
  const AffineSystem& sys = medium_system();
  const ReducedBasis b = gram_schmidt(random_matrix(static_cast<Eigen::Index>(sys.num_dofs()), 3, 5), sys.gram);
  const SpdFactorization g(sys.gram);
  const ReducedModel m = build_reduced_model(sys, g, b, test_constants());
  for (const Parameter& mu : random_parameters(ParameterDomain::p3, 5, 11)) {
    const RomSolution s = rom_solve(m, mu);
    const double direct = dual_norm(sys, mu, lift(b, s.coefficients));
    EXPECT_NEAR(s.certificate.residual_norm / direct, 1.0, 1e-8);
    const RomSolution sg = rom_solve(m, mu, ResidualNormMode::gram);
    EXPECT_NEAR(sg.certificate.residual_norm / direct, 1.0, 1e-8);
    EXPECT_DOUBLE_EQ(s.certificate.alpha_lb, coercivity_lower_bound(mu, 20.0));
    EXPECT_DOUBLE_EQ(s.certificate.estimate, s.certificate.residual_norm / std::sqrt(s.certificate.alpha_lb));
    // Galerkin: reduced solve satisfies the projected equation
    EXPECT_LE((m.online_matrix(mu) * s.coefficients - mu.g_0 * m.rhs).norm(), 1e-10 * mu.g_0 * m.rhs.norm());
  }
}

TEST(RomSolve, FullBasisHasZeroResidual) {
  const AffineSystem& sys = small_system();
  const auto n = static_cast<Eigen::Index>(sys.num_dofs());
  const ReducedBasis b = gram_schmidt(Eigen::MatrixXd::Identity(n, n), sys.gram);
  ASSERT_EQ(b.size(), sys.num_dofs());
  const SpdFactorization g(sys.gram);
  const ReducedModel m = build_reduced_model(sys, g, b, test_constants());
  const RomSolution s = rom_solve(m, {0.6, 0.2, 1.0});
  EXPECT_LE(s.certificate.estimate, 1e-8);
}

TEST(RomSolve, EmptyModelThrows) {
  ReducedModel m;
  EXPECT_THROW(rom_solve(m, {0.1, 0.0, 1.0}), EmptyBasis);
}

TEST(RomSolve, ZeroDataGivesZeroSolution) {
  const AffineSystem& sys = small_system();
  const GreedyResult r = train(sys, training_set(ParameterDomain::p2, 10), 3);
  const RomSolution s = rom_solve(r.model, {0.5, 0.1, 0.0});
  EXPECT_EQ(s.coefficients.norm(), 0.0);
  EXPECT_EQ(s.certificate.estimate, 0.0);
}

TEST(Greedy, SingleTrainingParameterIsReproduced) {
  const AffineSystem& sys = medium_system();
  const Parameter mu{0.7, 0.2, 1.0};
  const GreedyResult r = train(sys, {mu}, 5);
  EXPECT_EQ(r.basis.size(), 1u);
  EXPECT_EQ(r.reason, StopReason::repeated_parameter);
  EXPECT_EQ(r.fom_solves, 1u);
  EXPECT_LE(rom_solve(r.model, mu).certificate.estimate, 1e-8);
  ASSERT_EQ(r.log.size(), 2u);
  EXPECT_EQ(r.log[0].basis_size, 0u);
  EXPECT_LE(r.log[1].max_indicator, 1e-8);
}

TEST(Greedy, SnapshotsAreReproduced) {
  const AffineSystem& sys = medium_system();
  const GreedyResult r = train(sys, training_set(ParameterDomain::p2, 36), 6);
  ASSERT_EQ(r.basis.size(), 6u);
  const Eigen::MatrixXd gram = r.basis.vectors.transpose() * (sys.gram * r.basis.vectors);
  EXPECT_LE((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-8);
  for (std::size_t i = 0; i < r.basis.parameters.size(); ++i) {
    const Parameter& mu = r.basis.parameters[i];
    for (std::size_t j = 0; j < i; ++j) EXPECT_FALSE(r.basis.parameters[j] == mu);
    const Eigen::VectorXd fom = solve_fom(sys, mu).coefficients;
    const RomSolution s = rom_solve(r.model, mu);
    EXPECT_LE(gram_norm(sys.gram, fom - lift(r.basis, s.coefficients)), 1e-8);
  }
  EXPECT_EQ(r.model.parameters, r.basis.parameters);
}

TEST(Greedy, IndicatorDecaysAndTolStops) {
  const AffineSystem& sys = medium_system();
  const auto training = training_set(ParameterDomain::p1, 40);
  const GreedyResult r = train(sys, training, 8);
  EXPECT_EQ(r.reason, StopReason::max_size);
  EXPECT_EQ(r.log.size(), 9u);
  EXPECT_LT(r.log.back().max_indicator, 1e-2 * r.log.front().max_indicator);
  GreedyOptions o;
  o.max_basis_size = 20;
  o.tolerance = r.log[4].max_indicator * 1.0000001;
  o.constants = test_constants();
  const GreedyResult t = greedy_train(sys, training, o);
  EXPECT_EQ(t.reason, StopReason::tolerance);
  EXPECT_LE(t.basis.size(), 4u);
}

TEST(Greedy, WeakNeedsAtMostTwoMoreVectorsThanStrong) {
  const AffineSystem& sys = medium_system();
  const auto training = training_set(ParameterDomain::p1, 40);
  std::vector<Eigen::VectorXd> snapshots;
  for (const auto& mu : training) snapshots.push_back(solve_fom(sys, mu).coefficients);
  GreedyOptions o;
  o.max_basis_size = 10;
  o.constants = test_constants();
  o.snapshots = &snapshots;
  o.mode = GreedyMode::strong;
  const GreedyResult strong = greedy_train(sys, training, o);
  o.mode = GreedyMode::weak;
  const GreedyResult weak = greedy_train(sys, training, o);
  EXPECT_EQ(strong.fom_solves, 0u);
  for (std::size_t n = 1; n < strong.log.size(); ++n) {
    const double threshold = strong.log[n].max_true_error;
    std::size_t needed = weak.log.size();
    for (std::size_t m = 0; m < weak.log.size(); ++m)
      if (weak.log[m].max_true_error <= threshold) {
        needed = m;
        break;
      }
    if (needed == weak.log.size()) continue;  // weak run stopped before reaching it
    EXPECT_LE(needed, n + 2) << "threshold at N=" << n;
  }
}

TEST(Greedy, EstimatorIsReliable) {
  const AffineSystem& sys = medium_system();
  GreedyOptions o;
  o.max_basis_size = 8;
  o.constants = make_constants(StudyConfig{}, darcy_flow());
  const GreedyResult r = greedy_train(sys, training_set(ParameterDomain::p2, 66), o);
  for (std::size_t n : {2u, 5u, 8u}) {
    const ReducedModel m = r.model.prefix(n);
    for (const Parameter& mu : random_parameters(ParameterDomain::p2, 20, 99)) {
      const RomSolution s = rom_solve(m, mu);
      const Eigen::VectorXd e = solve_fom(sys, mu).coefficients - lift(r.basis, s.coefficients);
      EXPECT_GE(s.certificate.estimate, energy_norm(sys, mu, e)) << "N=" << n;
    }
  }
}

TEST(Greedy, FomFailureAbortsWithPartialResult) {
  const AffineSystem& sys = medium_system();
  GreedyOptions o;
  o.max_basis_size = 4;
  o.constants = test_constants();
  o.solver.method = SolverMethod::conjugate_gradient;
  o.solver.max_iterations = 1;
  try {
    greedy_train(sys, training_set(ParameterDomain::p1, 10), o);
    FAIL() << "expected TrainingAborted";
  } catch (const TrainingAborted& e) {
    EXPECT_EQ(e.partial().basis.size(), 0u);
    EXPECT_FALSE(e.partial().log.empty());
  }
  EXPECT_THROW(greedy_train(sys, {}, GreedyOptions{}), InvalidArgument);
}

TEST(Greedy, ReducedConditioningIsModerate) {
  const AffineSystem& sys = medium_system();
  const GreedyResult r = train(sys, training_set(ParameterDomain::p2, 36), 8);
  for (const Parameter& mu : random_parameters(ParameterDomain::p2, 10, 1)) EXPECT_LT(online_condition(r.model, mu), 1e4);
}

TEST(Persistence, RoundTripIsExact) {
  const AffineSystem& sys = medium_system();
  GreedyResult r = train(sys, training_set(ParameterDomain::p3, 30), 4);
  r.model.provenance = {"P.3", "darcy", "sin_pi_sq", "P.3", 1, 1, 1234};
  std::stringstream buffer;
  save_model(r.model, buffer);
  const ReducedModel back = load_model(buffer);
  EXPECT_EQ(back.size(), r.model.size());
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q) EXPECT_EQ(back.blocks[p][q], r.model.blocks[p][q]);
  EXPECT_EQ(back.rhs, r.model.rhs);
  EXPECT_EQ(back.residual_factor, r.model.residual_factor);
  EXPECT_EQ(back.residual_gram, r.model.residual_gram);
  EXPECT_EQ(back.outflow_gram, r.model.outflow_gram);
  EXPECT_EQ(back.parameters, r.model.parameters);
  EXPECT_EQ(back.constants.poincare, r.model.constants.poincare);
  EXPECT_EQ(back.provenance.testcase, "P.3");
  EXPECT_EQ(back.provenance.seed, 1234u);
  const Parameter mu{0.3, 0.1, 4.0};
  EXPECT_EQ(rom_solve(back, mu).certificate.estimate, rom_solve(r.model, mu).certificate.estimate);
}

TEST(Persistence, CorruptInputThrows) {
  std::stringstream garbage("{ not json");
  EXPECT_THROW(load_model(garbage), ModelLoadError);
  std::stringstream wrong(R"({"format": "something-else", "version": 1})");
  EXPECT_THROW(load_model(wrong), ModelLoadError);

  const GreedyResult r = train(small_system(), training_set(ParameterDomain::p1, 5), 2);
  std::stringstream buffer;
  save_model(r.model, buffer);
  std::string text = buffer.str();
  const auto pos = text.find("\"rows\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 6, "\"rowz\"");
  std::stringstream broken(text);
  EXPECT_THROW(load_model(broken), ModelLoadError);
  EXPECT_THROW(load_model(std::filesystem::path("/nonexistent/model.json")), ModelLoadError);
}
