#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace smoothfair {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Runs one `smoothfair` invocation; args[0] is the program name.
/// Reports go to `out`, diagnostics and usage to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Checks an experiment config document (train, data, probes, sweep,
/// sigma_grid, sigma_tolerance) and throws SchemaError on unknown keys or
/// wrong types.
void validate_experiment_config(const nlohmann::json& config);

}  // namespace smoothfair
