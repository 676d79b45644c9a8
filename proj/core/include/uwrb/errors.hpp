#pragma once

#include <stdexcept>
#include <string>

namespace uwrb {

/// Precondition violations: bad sizes, out-of-domain points, negative levels.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear solve broke down or did not reach its tolerance.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double achieved_residual);
  double achieved_residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// No streamline seed reached the outflow boundary within the time cap.
class EstimationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation on a streamline with zero speed (Poiseuille walls).
class DegenerateStreamline : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class EmptyBasis : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precomputed quantities disagree beyond roundoff (e.g. a negative residual norm square).
class NumericalInconsistency : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter outside the admissible set of its testcase.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ModelLoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wraps a failure of an experiment driver with the stage it happened in.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace uwrb
