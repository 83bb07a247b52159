#include "smoothfair/data/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "smoothfair/data/csv.hpp"
#include "smoothfair/errors.hpp"
#include "smoothfair/numkit/serialize.hpp"

namespace smoothfair {

std::size_t Dataset::group_size(int group) const {
    return static_cast<std::size_t>(std::count(sensitive.begin(), sensitive.end(), static_cast<std::uint8_t>(group)));
}

void Dataset::validate() const {
    if (rows() == 0) throw SchemaError("dataset has no rows");
    if (sensitive.size() != rows()) throw SchemaError("sensitive column length differs from feature rows");
    if (task_label && task_label->size() != rows()) throw SchemaError("label column length differs from feature rows");
    if (!column_names.empty() && column_names.size() != cols()) throw SchemaError("column name count differs from feature columns");
    for (auto s : sensitive) {
        if (s > 1) throw SchemaError("sensitive values must be 0 or 1");
    }
    if (task_label) {
        for (auto y : *task_label) {
            if (y > 1) throw SchemaError("task labels must be 0 or 1");
        }
    }
    if (!features.allFinite()) throw SchemaError("dataset features contain non-finite values");
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> rows) {
    Dataset out;
    out.features = take_rows(ds.features, rows);
    out.sensitive = take(ds.sensitive, rows);
    if (ds.task_label) out.task_label = take(*ds.task_label, rows);
    out.column_names = ds.column_names;
    return out;
}

std::string to_csv(const Dataset& ds) {
    std::vector<std::string> header = ds.column_names;
    if (header.empty()) {
        for (std::size_t j = 0; j < ds.cols(); ++j) header.push_back("f" + std::to_string(j));
    }
    header.emplace_back(kSensitiveColumn);
    if (ds.task_label) header.emplace_back(kLabelColumn);
    std::string out = format_csv_row(header);
    out += '\n';
    std::vector<std::string> fields;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        fields.clear();
        for (std::size_t j = 0; j < ds.cols(); ++j) {
            fields.push_back(format_double(ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
        }
        fields.push_back(std::to_string(ds.sensitive[i]));
        if (ds.task_label) fields.push_back(std::to_string((*ds.task_label)[i]));
        out += format_csv_row(fields);
        out += '\n';
    }
    return out;
}

void write_csv(const std::filesystem::path& path, const Dataset& ds) { write_text_atomic(path, to_csv(ds)); }

Dataset read_dataset_csv(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    const auto header = parse_csv_line(std::string_view(text).substr(0, text.find('\n')));
    CsvOptions o;
    o.sensitive_column = kSensitiveColumn;
    if (std::find(header.begin(), header.end(), kLabelColumn) != header.end()) o.label_column = kLabelColumn;
    o.normalize = false;
    o.sensitive_mapping = {{"0", 0}, {"1", 1}};
    if (o.label_column) o.label_mapping = {{"0", 0}, {"1", 1}};
    auto ds = parse_csv(text, o);
    if (ds.dropped_rows > 0) throw SchemaError(path.string() + ": " + std::to_string(ds.dropped_rows) + " rows with missing values");
    return ds;
}

}  // namespace smoothfair
