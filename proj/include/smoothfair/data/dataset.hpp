#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smoothfair/numkit/matrix.hpp"

namespace smoothfair {

/// A sample from the joint law of features X, sensitive attribute S and an
/// optional task label Y. Rows of `features` align with `sensitive`.
struct Dataset {
    Matrix features;
    Labels sensitive;
    std::optional<Labels> task_label;
    std::vector<std::string> column_names;
    /// Rows discarded during ingestion because of missing values.
    std::size_t dropped_rows = 0;

    std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }
    std::size_t group_size(int group) const;
    bool has_both_groups() const { return group_size(0) > 0 && group_size(1) > 0; }

    /// Throws SchemaError when the invariants do not hold.
    void validate() const;
};

Dataset subset(const Dataset& ds, std::span<const std::size_t> rows);

/// Feature columns, then `__sensitive`, then `__label` when present.
/// Values are written in shortest round-trip form.
void write_csv(const std::filesystem::path& path, const Dataset& ds);
std::string to_csv(const Dataset& ds);
/// Inverse of write_csv: features as written (no rescaling), `__sensitive`
/// and, when present, `__label`.
Dataset read_dataset_csv(const std::filesystem::path& path);

inline constexpr const char* kSensitiveColumn = "__sensitive";
inline constexpr const char* kLabelColumn = "__label";

}  // namespace smoothfair
