#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "smoothfair/numkit/network.hpp"

namespace smoothfair {

/// {"layer_dims": [...], "activations": [...], "weights": [[row-major]...], "biases": [[...]...]}
nlohmann::json network_to_json(const NetworkParams& net);
NetworkParams network_from_json(const nlohmann::json& j);

/// Writes via a temporary file and rename so readers never see partial output.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace smoothfair
