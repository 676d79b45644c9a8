#include "uwrb/errors.hpp"

#include <utility>

namespace uwrb {

SolverFailure::SolverFailure(const std::string& what, double achieved_residual)
    : std::runtime_error(what), residual_(achieved_residual) {}

StageError::StageError(std::string stage, const std::string& what)
    : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}

}  // namespace uwrb
