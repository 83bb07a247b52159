#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "smoothfair/data/dataset.hpp"

namespace smoothfair {

struct SplitSpec {
    std::vector<double> fractions;
    std::uint64_t seed = 0;
};

struct SplitResult {
    std::vector<Dataset> parts;
    /// Source row indices of each part, ascending.
    std::vector<std::vector<std::size_t>> row_indices;
};

/// Disjoint, exhaustive, seed-deterministic partition. Part sizes follow the
/// fractions by largest remainder; rows are assigned group by group so each
/// part keeps the sensitive-group proportions.
SplitResult split(const Dataset& ds, const SplitSpec& spec);

/// {"seed", "fractions", "row_indices"}
nlohmann::json split_manifest(const SplitSpec& spec, const SplitResult& result);

}  // namespace smoothfair
