#pragma once

#include <filesystem>
#include <string>

#include "qbench/problem.hpp"

namespace qbench {

inline constexpr const char* kInstanceSchema = "qbench-instance-v1";

// JSON text of an instance; matrices are row-major arrays and numbers use the
// shortest round-trip decimal form.
std::string instanceToJson(const Instance& inst, int indent = 2);

// Parses and finalizes an instance. Derived quantities (H_i, delta,
// g_weight) are recomputed from the stored parameters; the class is taken
// from class_name/dimension/kappa without running the generator.
Instance instanceFromJson(const std::string& text);

void saveInstance(const Instance& inst, const std::filesystem::path& path);
Instance loadInstance(const std::filesystem::path& path);

}  // namespace qbench
