#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smoothfair/data/dataset.hpp"

namespace smoothfair {

struct CsvOptions {
    std::string sensitive_column;
    std::optional<std::string> label_column;
    /// Min-max scale numeric columns into [0, 1].
    bool normalize = true;
    /// Declared value -> code mappings; when empty, a binary coding is
    /// inferred (numeric 0/1 kept, otherwise the two sorted values map to 0, 1).
    std::map<std::string, int> sensitive_mapping;
    std::map<std::string, int> label_mapping;
    /// Columns excluded from the features (e.g. a leaked target).
    std::vector<std::string> drop_columns;
    std::vector<std::string> missing_tokens{"", "?", "NA", "NaN", "nan", "null"};
};

/// Reads a headed, comma-separated file. Numeric columns become one feature
/// each; any other column is one-hot expanded into `name=value` columns in
/// sorted value order. Rows with a missing value in any used column are
/// dropped and counted in Dataset::dropped_rows.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options);
Dataset load_csv(const std::filesystem::path& path, const std::string& sensitive_column,
                 const std::optional<std::string>& label_column, bool normalize);
Dataset parse_csv(std::string_view text, const CsvOptions& options);

/// Splits one CSV record; supports double-quoted fields with "" escapes.
std::vector<std::string> parse_csv_line(std::string_view line);
std::string format_csv_row(const std::vector<std::string>& fields);
/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

}  // namespace smoothfair
