#pragma once

#include <filesystem>
#include <iosfwd>

#include "uwrb/rom.hpp"

namespace uwrb {

/// Writes a reduced model as self-describing JSON. Doubles round-trip exactly.
void save_model(const ReducedModel& model, std::ostream& out);
void save_model(const ReducedModel& model, const std::filesystem::path& path);

/// Throws ModelLoadError on unreadable, malformed or inconsistent input.
ReducedModel load_model(std::istream& in);
ReducedModel load_model(const std::filesystem::path& path);

}  // namespace uwrb
