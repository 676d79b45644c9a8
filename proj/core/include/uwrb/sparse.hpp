#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "uwrb/lagrange_space.hpp"

namespace uwrb {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
/// Symmetric positive definite sparse matrix (full storage, both triangles).
using SparseSpd = SparseMatrix;

/// max|M - M^T| / max|M|.
double symmetry_defect(const SparseMatrix& m);

/// Scatters dense cell matrices into a global matrix with the Q^k cell
/// coupling pattern. Every matrix produced by zero_matrix() shares the same
/// pattern, so linear combinations can work directly on the value arrays.
class CellAssembler {
 public:
  explicit CellAssembler(const LagrangeSpace& space);

  SparseMatrix zero_matrix() const { return pattern_; }
  void add(SparseMatrix& target, std::size_t cell, const Eigen::MatrixXd& local) const;
  std::size_t num_cells() const noexcept { return num_cells_; }

 private:
  SparseMatrix pattern_;
  std::size_t local_size_;
  std::size_t num_cells_;
  std::vector<int> positions_;  // per cell, column-major (a, b) -> index into valuePtr
};

/// sum_i coeffs[i] * terms[i] for matrices with identical sparsity pattern.
SparseMatrix combine_same_pattern(const std::vector<const SparseMatrix*>& terms, const std::vector<double>& coeffs);

enum class SolverMethod { direct, conjugate_gradient };

struct SolverOptions {
  SolverMethod method = SolverMethod::direct;
  double tolerance = 1e-10;            ///< relative residual target for conjugate gradients
  std::size_t max_iterations = 0;      ///< 0 selects 20*sqrt(n)
};

/// |Mx - rhs| / |rhs| (absolute residual if rhs vanishes).
double relative_residual(const SparseMatrix& m, const Eigen::VectorXd& x, const Eigen::VectorXd& rhs);

/// Sparse Cholesky factorization, reusable for many right-hand sides.
/// Backed by CHOLMOD (supernodal) when available, Eigen's simplicial LLT otherwise.
class SpdFactorization {
 public:
  explicit SpdFactorization(const SparseMatrix& m);
  ~SpdFactorization();
  SpdFactorization(SpdFactorization&&) noexcept;
  SpdFactorization& operator=(SpdFactorization&&) noexcept;

  std::size_t size() const noexcept;
  /// Solves with up to two steps of iterative refinement.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Solves M x = rhs for SPD M. Throws SolverFailure on breakdown or when the
/// iteration cap is hit before the tolerance.
Eigen::VectorXd solve_spd(const SparseMatrix& m, const Eigen::VectorXd& rhs, const SolverOptions& options = {});

}  // namespace uwrb
