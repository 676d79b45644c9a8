#include "uwrb/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#ifdef UWRB_HAS_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

#include "uwrb/errors.hpp"

namespace uwrb {

double symmetry_defect(const SparseMatrix& m) {
  const SparseMatrix t = m.transpose();
  const SparseMatrix d = m - t;
  double dmax = 0.0;
  double mmax = 0.0;
  for (Eigen::Index i = 0; i < d.nonZeros(); ++i) dmax = std::max(dmax, std::abs(d.valuePtr()[i]));
  for (Eigen::Index i = 0; i < m.nonZeros(); ++i) mmax = std::max(mmax, std::abs(m.valuePtr()[i]));
  return mmax == 0.0 ? dmax : dmax / mmax;
}

CellAssembler::CellAssembler(const LagrangeSpace& space)
    : local_size_(space.dofs_per_cell()), num_cells_(space.mesh().num_cells()) {
  const auto n = static_cast<Eigen::Index>(space.num_dofs());
  std::vector<Eigen::Triplet<double, int>> triplets;
  triplets.reserve(num_cells_ * local_size_ * local_size_);
  std::vector<std::size_t> dofs(local_size_);
  for (std::size_t c = 0; c < num_cells_; ++c) {
    space.cell_dofs(c, dofs);
    for (std::size_t b = 0; b < local_size_; ++b)
      for (std::size_t a = 0; a < local_size_; ++a)
        triplets.emplace_back(static_cast<int>(dofs[a]), static_cast<int>(dofs[b]), 0.0);
  }
  pattern_.resize(n, n);
  pattern_.setFromTriplets(triplets.begin(), triplets.end());
  pattern_.makeCompressed();
  triplets.clear();
  triplets.shrink_to_fit();

  positions_.resize(num_cells_ * local_size_ * local_size_);
  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  for (std::size_t c = 0; c < num_cells_; ++c) {
    space.cell_dofs(c, dofs);
    int* pos = positions_.data() + c * local_size_ * local_size_;
    for (std::size_t b = 0; b < local_size_; ++b) {
      const int col = static_cast<int>(dofs[b]);
      const int* begin = inner + outer[col];
      const int* end = inner + outer[col + 1];
      for (std::size_t a = 0; a < local_size_; ++a) {
        const int* it = std::lower_bound(begin, end, static_cast<int>(dofs[a]));
        pos[b * local_size_ + a] = static_cast<int>(it - inner);
      }
    }
  }
}

void CellAssembler::add(SparseMatrix& target, std::size_t cell, const Eigen::MatrixXd& local) const {
  const int* pos = positions_.data() + cell * local_size_ * local_size_;
  double* values = target.valuePtr();
  const double* src = local.data();  // column-major, matches the (a, b) layout above
  for (std::size_t i = 0; i < local_size_ * local_size_; ++i) values[pos[i]] += src[i];
}

SparseMatrix combine_same_pattern(const std::vector<const SparseMatrix*>& terms, const std::vector<double>& coeffs) {
  if (terms.empty() || terms.size() != coeffs.size())
    throw InvalidArgument("combine_same_pattern: need one coefficient per term");
  SparseMatrix out = *terms.front();
  const Eigen::Index nnz = out.nonZeros();
  Eigen::Map<Eigen::VectorXd> acc(out.valuePtr(), nnz);
  acc *= coeffs.front();
  for (std::size_t t = 1; t < terms.size(); ++t) {
    if (terms[t]->nonZeros() != nnz) throw InvalidArgument("combine_same_pattern: sparsity patterns differ");
    if (coeffs[t] == 0.0) continue;
    acc += coeffs[t] * Eigen::Map<const Eigen::VectorXd>(terms[t]->valuePtr(), nnz);
  }
  return out;
}

double relative_residual(const SparseMatrix& m, const Eigen::VectorXd& x, const Eigen::VectorXd& rhs) {
  const double r = (rhs - m * x).norm();
  const double b = rhs.norm();
  return b > 0.0 ? r / b : r;
}

struct SpdFactorization::Impl {
  SparseMatrix matrix;
#ifdef UWRB_HAS_CHOLMOD
  Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower> llt;
  mutable std::mutex mutex;  // CHOLMOD keeps workspace in its common object
#else
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower> llt;
#endif

  Eigen::VectorXd raw_solve(const Eigen::VectorXd& rhs) const {
#ifdef UWRB_HAS_CHOLMOD
    std::lock_guard<std::mutex> lock(mutex);
#endif
    return llt.solve(rhs);
  }
};

SpdFactorization::SpdFactorization(const SparseMatrix& m) : impl_(std::make_unique<Impl>()) {
  if (m.rows() != m.cols()) throw InvalidArgument("SpdFactorization: matrix is not square");
  impl_->matrix = m;
  impl_->matrix.makeCompressed();
  impl_->llt.compute(impl_->matrix);
  if (impl_->llt.info() != Eigen::Success)
    throw SolverFailure("sparse Cholesky factorization failed (matrix not positive definite)",
                        std::numeric_limits<double>::quiet_NaN());
}

SpdFactorization::~SpdFactorization() = default;
SpdFactorization::SpdFactorization(SpdFactorization&&) noexcept = default;
SpdFactorization& SpdFactorization::operator=(SpdFactorization&&) noexcept = default;

std::size_t SpdFactorization::size() const noexcept { return static_cast<std::size_t>(impl_->matrix.rows()); }

Eigen::VectorXd SpdFactorization::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != impl_->matrix.rows()) throw InvalidArgument("SpdFactorization::solve: size mismatch");
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) return Eigen::VectorXd::Zero(rhs.size());
  Eigen::VectorXd x = impl_->raw_solve(rhs);
  double res = relative_residual(impl_->matrix, x, rhs);
  for (int step = 0; step < 2 && res > 1e-14; ++step) {
    const Eigen::VectorXd r = rhs - impl_->matrix * x;
    const Eigen::VectorXd candidate = x + impl_->raw_solve(r);
    const double cres = relative_residual(impl_->matrix, candidate, rhs);
    if (!(cres < res)) break;
    x = candidate;
    res = cres;
  }
  if (!std::isfinite(res) || res > 1e-6)
    throw SolverFailure("sparse Cholesky solve did not produce an accurate solution", res);
  return x;
}

Eigen::MatrixXd SpdFactorization::solve(const Eigen::MatrixXd& rhs) const {
  Eigen::MatrixXd out(rhs.rows(), rhs.cols());
  for (Eigen::Index c = 0; c < rhs.cols(); ++c) out.col(c) = solve(Eigen::VectorXd(rhs.col(c)));
  return out;
}

Eigen::VectorXd solve_spd(const SparseMatrix& m, const Eigen::VectorXd& rhs, const SolverOptions& options) {
  if (m.rows() != m.cols() || m.rows() != rhs.size()) throw InvalidArgument("solve_spd: size mismatch");
  if (options.method == SolverMethod::direct) return SpdFactorization(m).solve(rhs);

  const auto n = static_cast<double>(m.rows());
  const std::size_t cap =
      options.max_iterations > 0 ? options.max_iterations : static_cast<std::size_t>(std::ceil(20.0 * std::sqrt(n)));
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(options.tolerance);
  cg.setMaxIterations(static_cast<Eigen::Index>(cap));
  cg.compute(m);
  if (cg.info() != Eigen::Success)
    throw SolverFailure("conjugate gradient setup failed", std::numeric_limits<double>::quiet_NaN());
  Eigen::VectorXd x = cg.solve(rhs);
  const double res = relative_residual(m, x, rhs);
  if (cg.info() != Eigen::Success || !std::isfinite(res) || res > options.tolerance * 10.0)
    throw SolverFailure("conjugate gradients did not converge within " + std::to_string(cap) + " iterations", res);
  return x;
}

}  // namespace uwrb
