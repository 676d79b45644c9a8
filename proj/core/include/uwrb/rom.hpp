#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uwrb/flow.hpp"
#include "uwrb/sparse.hpp"
#include "uwrb/transport.hpp"

namespace uwrb {

/// Constants entering the coercivity lower bound.
struct EstimatorConstants {
  double poincare = 1.0;  ///< C_p
  double t_min = 0.0;
  double t_max = 0.0;
  bool capped = false;      ///< t_max came from a capped streamline estimate
  bool overridden = false;  ///< poincare was set by hand
};

/// C_p <= 2 T_max + max(1 - T_min, 0) for Omega-filling flows.
double poincare_bound(double t_min, double t_max);
EstimatorConstants constants_from_traverse_times(const TraverseTimes& times);
EstimatorConstants constants_from_override(double poincare);

/// alpha_LB(mu) = 1 / (2 + C_p^2 (2 |c_mu|_inf^2 + 1)).
double coercivity_lower_bound(const Parameter& mu, double poincare);

/// Columns are orthonormal with respect to `gram`.
struct ReducedBasis {
  Eigen::MatrixXd vectors;
  std::vector<Parameter> parameters;  ///< generating parameters (empty if built from raw vectors)

  std::size_t size() const noexcept { return static_cast<std::size_t>(vectors.cols()); }
};

/// Modified Gram-Schmidt with one re-orthogonalization pass. A vector whose
/// G-norm after projection falls below drop_tol times its initial G-norm is
/// dropped. Throws EmptyBasis if every vector is dropped.
ReducedBasis gram_schmidt(const Eigen::MatrixXd& vectors, const SparseMatrix& gram, double drop_tol = 1e-10);

/// Appends v to an orthonormal basis; returns false (and leaves the basis
/// unchanged) if v is numerically contained in its span.
bool extend_basis(ReducedBasis& basis, const Eigen::VectorXd& v, const SparseMatrix& gram, double drop_tol = 1e-10);

/// How the residual dual norm is evaluated online.
enum class ResidualNormMode {
  factor,  ///< |R rho| with R from a G-orthonormalized set of Riesz representatives
  gram,    ///< sqrt(rho^T K rho) with K the Gram matrix of Riesz representatives
};

struct Certificate {
  double estimate = 0.0;       ///< Delta_N = residual_norm / sqrt(alpha_lb)
  double residual_norm = 0.0;  ///< dual H^1(b) norm of the residual
  double alpha_lb = 0.0;
  Parameter mu;
};

struct RomSolution {
  Eigen::VectorXd coefficients;
  Certificate certificate;
};

struct ModelProvenance {
  std::string testcase;
  std::string geometry;
  std::string profile;
  std::string domain;  ///< parameter domain name, empty if unconstrained
  int level = 0;
  int order = 0;
  std::uint64_t seed = 0;
};

/// Online data of the reduced normal equation and its residual estimator.
///
/// The residual r_mu = g_0 f - sum_j Theta_j(mu) sum_i w_i S_j b_i is expanded over
/// the 1 + 6N vectors {f} u {S_j b_i}; column 0 holds f and column 1 + 6 i + j holds
/// S_j b_i, so the leading 1 + 6n columns describe the first n basis vectors.
struct ReducedModel {
  std::array<std::array<Eigen::MatrixXd, 3>, 3> blocks;  ///< Y^{p,q} = B^T M^{p,q} B
  Eigen::VectorXd rhs;                                   ///< B^T f
  Eigen::MatrixXd residual_factor;                       ///< R with |sum rho_k z_k|_G = |R rho|
  Eigen::MatrixXd residual_gram;                         ///< (z_k, z_l)_G with z_k = G^{-1} v_k
  Eigen::MatrixXd outflow_gram;                          ///< int_{Gamma_out} b_i b_j ds
  EstimatorConstants constants;
  ModelProvenance provenance;
  std::vector<Parameter> parameters;                     ///< snapshot parameters

  std::size_t size() const noexcept { return static_cast<std::size_t>(rhs.size()); }
  /// Model for the first n basis vectors.
  ReducedModel prefix(std::size_t n) const;
  /// sum_{p,q} theta_p theta_q Y^{p,q}.
  Eigen::MatrixXd online_matrix(const Parameter& mu) const;
  /// Column weights rho(mu, w) of the residual expansion.
  Eigen::VectorXd residual_weights(const Parameter& mu, const Eigen::VectorXd& w) const;
};

/// Builds the reduced model for `basis`; the Riesz representatives reuse `gram_factor`.
ReducedModel build_reduced_model(const AffineSystem& sys, const SpdFactorization& gram_factor,
                                 const ReducedBasis& basis, const EstimatorConstants& constants);

/// Dense reduced solve plus residual certificate. Online cost is independent of
/// the full-order dimension. Requires N >= 1.
RomSolution rom_solve(const ReducedModel& model, const Parameter& mu,
                      ResidualNormMode mode = ResidualNormMode::factor);

/// Residual dual norm for coefficients w (w may be empty when N = 0).
double residual_dual_norm(const ReducedModel& model, const Parameter& mu, const Eigen::VectorXd& w,
                          ResidualNormMode mode = ResidualNormMode::factor);

/// 2-norm condition number of the online matrix.
double online_condition(const ReducedModel& model, const Parameter& mu);

/// Lifts reduced coefficients to the full-order space.
inline Eigen::VectorXd lift(const ReducedBasis& basis, const Eigen::VectorXd& w) {
  return basis.vectors.leftCols(w.size()) * w;
}

enum class GreedyMode { strong, weak };

struct GreedyOptions {
  GreedyMode mode = GreedyMode::weak;
  double tolerance = 0.0;
  std::size_t max_basis_size = 14;
  std::size_t threads = 1;
  EstimatorConstants constants;
  SolverOptions solver;
  ResidualNormMode residual_mode = ResidualNormMode::factor;
  /// Optional FOM snapshots for every training parameter; weak mode then logs
  /// the true training error as well. Strong mode computes them itself if absent.
  const std::vector<Eigen::VectorXd>* snapshots = nullptr;
};

struct DecayRecord {
  std::size_t basis_size = 0;
  double max_indicator = 0.0;
  double max_true_error = 0.0;  ///< NaN when no snapshots are available
  std::size_t argmax = 0;
};

enum class StopReason { tolerance, max_size, repeated_parameter, dependent_snapshot };
const char* to_string(StopReason r);

struct GreedyResult {
  ReducedBasis basis;
  ReducedModel model;
  std::vector<DecayRecord> log;
  StopReason reason = StopReason::max_size;
  std::size_t fom_solves = 0;
};

/// A full-order solve failed during training; the partial result is attached.
class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(const std::string& what, std::shared_ptr<const GreedyResult> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const GreedyResult& partial() const { return *partial_; }

 private:
  std::shared_ptr<const GreedyResult> partial_;
};

/// Greedy basis generation in the H^1(b) norm. Strong mode selects the
/// training parameter with the largest true error |w - B w_N|_G, weak mode the
/// largest certificate Delta_N and solves the full model only for selected
/// parameters. Ties go to the lowest training index.
GreedyResult greedy_train(const AffineSystem& sys, const std::vector<Parameter>& training,
                          const GreedyOptions& options);
GreedyResult greedy_train(const AffineSystem& sys, const SpdFactorization& gram_factor,
                          const std::vector<Parameter>& training, const GreedyOptions& options);

/// Energy norm |v|_mu = sqrt(v^T A(mu) v) with the combined full-order matrix.
double energy_norm(const AffineSystem& sys, const Parameter& mu, const Eigen::VectorXd& v);
double gram_norm(const SparseMatrix& gram, const Eigen::VectorXd& v);

}  // namespace uwrb
