#include "uwrb/rom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "uwrb/errors.hpp"
#include "uwrb/parallel.hpp"
#include "uwrb/quadrature.hpp"

namespace uwrb {

namespace {

constexpr double kGramClamp = 1e-12;
constexpr double kFactorDrop = 1e-13;

double g_inner(const SparseMatrix& gram, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.dot(gram * b);
}

/// Projects v against the first `count` columns of q in two MGS sweeps and
/// returns the projection coefficients.
Eigen::VectorXd orthogonalize(const SparseMatrix& gram, const Eigen::MatrixXd& q, Eigen::Index count,
                              Eigen::VectorXd& v) {
  Eigen::VectorXd coeff = Eigen::VectorXd::Zero(count);
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index k = 0; k < count; ++k) {
      const double c = g_inner(gram, q.col(k), v);
      v -= c * q.col(k);
      coeff(k) += c;
    }
  }
  return coeff;
}

/// Unweighted L2(Gamma_out) mass matrix restricted to the basis.
Eigen::MatrixXd outflow_gram(const AffineSystem& sys, const Eigen::MatrixXd& basis) {
  const LagrangeSpace& space = *sys.space;
  const Mesh& mesh = space.mesh();
  const GaussRule1D line = gauss_legendre(std::max(sys.quadrature_order, space.order() + 1));
  const std::size_t nloc = space.dofs_per_cell();
  std::vector<double> values(nloc);
  std::vector<Vec2> grads(nloc);
  std::vector<std::size_t> dofs(nloc);
  const Eigen::Index n = basis.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd traces(n);
  for (const auto& facet : sys.facets) {
    if (facet.tag != FacetTag::outflow) continue;
    space.cell_dofs(facet.cell, dofs);
    const Vec2 origin = mesh.cell_origin(facet.cell);
    for (std::size_t q = 0; q < line.size(); ++q) {
      const Vec2 p = facet.a + line.points[q] * (facet.b - facet.a);
      const Vec2 xi = (p - origin) / mesh.h();
      space.reference_basis(xi, values, grads);
      traces.setZero();
      for (std::size_t i = 0; i < nloc; ++i) traces += values[i] * basis.row(static_cast<Eigen::Index>(dofs[i])).transpose();
      out.noalias() += (line.weights[q] * facet.length()) * traces * traces.transpose();
    }
  }
  return out;
}

struct Sweep {
  std::vector<double> indicator;
  std::vector<double> error;
};

}  // namespace

double poincare_bound(double t_min, double t_max) {
  if (!(t_min >= 0.0) || !(t_max >= t_min)) throw InvalidArgument("poincare_bound: need 0 <= t_min <= t_max");
  return 2.0 * t_max + std::max(1.0 - t_min, 0.0);
}

EstimatorConstants constants_from_traverse_times(const TraverseTimes& times) {
  EstimatorConstants c;
  c.t_min = times.t_min;
  c.t_max = times.t_max;
  c.capped = times.capped;
  c.poincare = poincare_bound(times.t_min, times.t_max);
  return c;
}

EstimatorConstants constants_from_override(double poincare) {
  if (!(poincare > 0.0) || !std::isfinite(poincare)) throw InvalidArgument("Poincare constant must be positive");
  EstimatorConstants c;
  c.poincare = poincare;
  c.overridden = true;
  return c;
}

double coercivity_lower_bound(const Parameter& mu, double poincare) {
  if (!(poincare > 0.0)) throw InvalidArgument("coercivity_lower_bound: C_p must be positive");
  const double c = mu.max_reaction();
  return 1.0 / (2.0 + poincare * poincare * (2.0 * c * c + 1.0));
}

ReducedBasis gram_schmidt(const Eigen::MatrixXd& vectors, const SparseMatrix& gram, double drop_tol) {
  ReducedBasis basis;
  basis.vectors.resize(vectors.rows(), 0);
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) extend_basis(basis, vectors.col(j), gram, drop_tol);
  if (basis.size() == 0) throw EmptyBasis("gram_schmidt: all vectors are numerically zero or dependent");
  return basis;
}

bool extend_basis(ReducedBasis& basis, const Eigen::VectorXd& v, const SparseMatrix& gram, double drop_tol) {
  if (v.size() != gram.rows()) throw InvalidArgument("extend_basis: vector size does not match Gram matrix");
  if (basis.vectors.cols() == 0) basis.vectors.resize(v.size(), 0);
  if (basis.vectors.rows() != v.size()) throw InvalidArgument("extend_basis: vector size does not match basis");
  const double initial = std::sqrt(std::max(g_inner(gram, v, v), 0.0));
  if (!(initial > 0.0)) return false;
  Eigen::VectorXd w = v;
  orthogonalize(gram, basis.vectors, basis.vectors.cols(), w);
  const double norm = std::sqrt(std::max(g_inner(gram, w, w), 0.0));
  if (!(norm > drop_tol * initial)) return false;
  const Eigen::Index n = basis.vectors.cols();
  basis.vectors.conservativeResize(Eigen::NoChange, n + 1);
  basis.vectors.col(n) = w / norm;
  return true;
}

ReducedModel ReducedModel::prefix(std::size_t n) const {
  if (n > size()) throw InvalidArgument("ReducedModel::prefix: n exceeds basis size");
  const auto m = static_cast<Eigen::Index>(n);
  ReducedModel out;
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q) out.blocks[p][q] = blocks[p][q].topLeftCorner(m, m);
  out.rhs = rhs.head(m);
  const Eigen::Index cols = 1 + 6 * m;
  Eigen::Index rows = 0;
  for (Eigen::Index r = 0; r < residual_factor.rows(); ++r)
    if (residual_factor.row(r).head(cols).cwiseAbs().maxCoeff() > 0.0) rows = r + 1;
  out.residual_factor = residual_factor.topLeftCorner(rows, cols);
  out.residual_gram = residual_gram.topLeftCorner(cols, cols);
  out.outflow_gram = outflow_gram.topLeftCorner(m, m);
  out.constants = constants;
  out.provenance = provenance;
  out.parameters.assign(parameters.begin(), parameters.begin() + std::min(parameters.size(), n));
  return out;
}

Eigen::MatrixXd ReducedModel::online_matrix(const Parameter& mu) const {
  const auto theta = operator_coefficients(mu);
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 3; ++q) a.noalias() += (theta[p] * theta[q]) * blocks[p][q];
  return a;
}

Eigen::VectorXd ReducedModel::residual_weights(const Parameter& mu, const Eigen::VectorXd& w) const {
  if (static_cast<std::size_t>(w.size()) > size()) throw InvalidArgument("residual_weights: too many coefficients");
  const auto theta = symmetric_coefficients(mu);
  Eigen::VectorXd rho(1 + 6 * w.size());
  rho(0) = mu.g_0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    for (Eigen::Index j = 0; j < 6; ++j) rho(1 + 6 * i + j) = -theta[static_cast<std::size_t>(j)] * w(i);
  return rho;
}

ReducedModel build_reduced_model(const AffineSystem& sys, const SpdFactorization& gram_factor,
                                 const ReducedBasis& basis, const EstimatorConstants& constants) {
  const auto n = static_cast<Eigen::Index>(sys.num_dofs());
  const Eigen::MatrixXd& b = basis.vectors;
  if (b.cols() > 0 && b.rows() != n) throw InvalidArgument("build_reduced_model: basis size does not match system");
  if (gram_factor.size() != sys.num_dofs()) throw InvalidArgument("build_reduced_model: factorization size mismatch");
  const Eigen::Index nb = b.cols();

  ReducedModel model;
  model.constants = constants;
  model.parameters = basis.parameters;
  for (int p = 1; p <= 3; ++p)
    for (int q = p; q <= 3; ++q) {
      const Eigen::MatrixXd y = nb > 0 ? Eigen::MatrixXd(b.transpose() * (sys.block(p, q) * b)) : Eigen::MatrixXd(0, 0);
      model.blocks[p - 1][q - 1] = y;
      if (p != q) model.blocks[q - 1][p - 1] = y.transpose();
    }
  model.rhs = nb > 0 ? Eigen::VectorXd(b.transpose() * sys.rhs) : Eigen::VectorXd(0);
  model.outflow_gram = outflow_gram(sys, b);

  const Eigen::Index m = 1 + 6 * nb;
  Eigen::MatrixXd v(n, m);
  v.col(0) = sys.rhs;
  for (Eigen::Index i = 0; i < nb; ++i)
    for (Eigen::Index j = 0; j < 6; ++j) v.col(1 + 6 * i + j) = sys.symmetric_terms[static_cast<std::size_t>(j)] * b.col(i);
  const Eigen::MatrixXd z = gram_factor.solve(v);

  Eigen::MatrixXd k = v.transpose() * z;
  model.residual_gram = 0.5 * (k + k.transpose());

  Eigen::MatrixXd q(n, 0);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, m);
  Eigen::Index rank = 0;
  for (Eigen::Index c = 0; c < m; ++c) {
    Eigen::VectorXd col = z.col(c);
    const double initial = std::sqrt(std::max(g_inner(sys.gram, col, col), 0.0));
    r.col(c).head(rank) = orthogonalize(sys.gram, q, rank, col);
    const double norm = std::sqrt(std::max(g_inner(sys.gram, col, col), 0.0));
    if (initial > 0.0 && norm > kFactorDrop * initial) {
      q.conservativeResize(Eigen::NoChange, rank + 1);
      q.col(rank) = col / norm;
      r(rank, c) = norm;
      ++rank;
    }
  }
  model.residual_factor = r.topRows(rank);
  return model;
}

double residual_dual_norm(const ReducedModel& model, const Parameter& mu, const Eigen::VectorXd& w,
                          ResidualNormMode mode) {
  const Eigen::VectorXd rho = model.residual_weights(mu, w);
  const Eigen::Index cols = rho.size();
  if (mode == ResidualNormMode::factor) return (model.residual_factor.leftCols(cols) * rho).norm();
  double sq = rho.dot(model.residual_gram.topLeftCorner(cols, cols) * rho);
  if (sq < 0.0) {
    const double scale = std::max(1.0, std::abs(rho(0)) * std::abs(rho(0)) * model.residual_gram(0, 0));
    if (sq < -kGramClamp * scale)
      throw NumericalInconsistency("residual norm square is negative: " + std::to_string(sq));
    sq = 0.0;
  }
  return std::sqrt(sq);
}

RomSolution rom_solve(const ReducedModel& model, const Parameter& mu, ResidualNormMode mode) {
  if (model.size() == 0) throw EmptyBasis("rom_solve: reduced model has no basis vectors");
  const Eigen::MatrixXd a = model.online_matrix(mu);
  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalInconsistency("rom_solve: reduced matrix is not positive definite");
  RomSolution out;
  out.coefficients = llt.solve(mu.g_0 * model.rhs);
  out.certificate.mu = mu;
  out.certificate.residual_norm = residual_dual_norm(model, mu, out.coefficients, mode);
  out.certificate.alpha_lb = coercivity_lower_bound(mu, model.constants.poincare);
  out.certificate.estimate = out.certificate.residual_norm / std::sqrt(out.certificate.alpha_lb);
  return out;
}

double online_condition(const ReducedModel& model, const Parameter& mu) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.online_matrix(mu), Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  if (ev.size() == 0) return 1.0;
  if (!(ev(0) > 0.0)) return std::numeric_limits<double>::infinity();
  return ev(ev.size() - 1) / ev(0);
}

double energy_norm(const AffineSystem& sys, const Parameter& mu, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(v.dot(sys.combined(mu) * v), 0.0));
}

double gram_norm(const SparseMatrix& gram, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(v.dot(gram * v), 0.0));
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::tolerance: return "tolerance";
    case StopReason::max_size: return "max_size";
    case StopReason::repeated_parameter: return "repeated_parameter";
    case StopReason::dependent_snapshot: return "dependent_snapshot";
  }
  return "unknown";
}

GreedyResult greedy_train(const AffineSystem& sys, const std::vector<Parameter>& training,
                          const GreedyOptions& options) {
  const SpdFactorization factor(sys.gram);
  return greedy_train(sys, factor, training, options);
}

GreedyResult greedy_train(const AffineSystem& sys, const SpdFactorization& gram_factor,
                          const std::vector<Parameter>& training, const GreedyOptions& options) {
  if (training.empty()) throw InvalidArgument("greedy_train: empty training set");
  if (options.max_basis_size == 0) throw InvalidArgument("greedy_train: N_max must be positive");
  if (!(options.tolerance >= 0.0)) throw InvalidArgument("greedy_train: tolerance must be non-negative");
  if (options.snapshots && options.snapshots->size() != training.size())
    throw InvalidArgument("greedy_train: snapshot count does not match training set");

  auto result = std::make_shared<GreedyResult>();
  result->basis.vectors.resize(static_cast<Eigen::Index>(sys.num_dofs()), 0);

  std::vector<Eigen::VectorXd> own;
  const std::vector<Eigen::VectorXd>* snapshots = options.snapshots;
  auto fom = [&](const Parameter& mu) {
    try {
      ++result->fom_solves;
      return solve_fom(sys, mu, options.solver).coefficients;
    } catch (const SolverFailure& e) {
      throw TrainingAborted(std::string("greedy_train: full-order solve failed: ") + e.what(), result);
    }
  };
  if (options.mode == GreedyMode::strong && !snapshots) {
    own.resize(training.size());
    for (std::size_t i = 0; i < training.size(); ++i) own[i] = fom(training[i]);
    snapshots = &own;
  }

  std::vector<bool> selected(training.size(), false);
  result->model = build_reduced_model(sys, gram_factor, result->basis, options.constants);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  while (true) {
    const ReducedModel& model = result->model;
    const std::size_t nb = model.size();
    Sweep sweep{std::vector<double>(training.size(), 0.0), std::vector<double>(training.size(), nan)};
    parallel_for(training.size(), options.threads, [&](std::size_t i) {
      const Parameter& mu = training[i];
      Eigen::VectorXd w(0);
      double delta = 0.0;
      if (nb == 0) {
        const double res = residual_dual_norm(model, mu, w, options.residual_mode);
        delta = res / std::sqrt(coercivity_lower_bound(mu, model.constants.poincare));
      } else {
        RomSolution sol = rom_solve(model, mu, options.residual_mode);
        w = std::move(sol.coefficients);
        delta = sol.certificate.estimate;
      }
      if (snapshots) {
        const Eigen::VectorXd e = (*snapshots)[i] - lift(result->basis, w);
        sweep.error[i] = gram_norm(sys.gram, e);
      }
      sweep.indicator[i] = options.mode == GreedyMode::strong ? sweep.error[i] : delta;
    });

    DecayRecord rec;
    rec.basis_size = nb;
    rec.argmax = static_cast<std::size_t>(
        std::distance(sweep.indicator.begin(), std::max_element(sweep.indicator.begin(), sweep.indicator.end())));
    rec.max_indicator = sweep.indicator[rec.argmax];
    rec.max_true_error = snapshots ? *std::max_element(sweep.error.begin(), sweep.error.end()) : nan;
    result->log.push_back(rec);

    if (rec.max_indicator <= options.tolerance) {
      result->reason = StopReason::tolerance;
      break;
    }
    if (nb >= options.max_basis_size) {
      result->reason = StopReason::max_size;
      break;
    }
    if (selected[rec.argmax]) {
      result->reason = StopReason::repeated_parameter;
      break;
    }
    selected[rec.argmax] = true;
    const Parameter& mu = training[rec.argmax];
    const Eigen::VectorXd snap = snapshots ? (*snapshots)[rec.argmax] : fom(mu);
    if (!extend_basis(result->basis, snap, sys.gram)) {
      result->reason = StopReason::dependent_snapshot;
      break;
    }
    result->basis.parameters.push_back(mu);
    result->model = build_reduced_model(sys, gram_factor, result->basis, options.constants);
  }
  return std::move(*result);
}

}  // namespace uwrb
