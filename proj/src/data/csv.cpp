#include "smoothfair/data/csv.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <set>

#include "smoothfair/errors.hpp"
#include "smoothfair/numkit/serialize.hpp"

namespace smoothfair {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double value = 0.0;
    const char* begin = s.data();
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::string current;
    bool in_quotes = false;
    for (char c : text) {
        if (c == '"') in_quotes = !in_quotes;
        if (c == '\n' && !in_quotes) {
            lines.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) lines.push_back(std::move(current));
    // Drop trailing blank lines and a UTF-8 byte-order mark.
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (!lines.empty() && lines.front().rfind("\xEF\xBB\xBF", 0) == 0) lines.front().erase(0, 3);
    return lines;
}

Labels code_binary(const std::vector<std::string>& values, const std::map<std::string, int>& mapping,
                   const std::string& column) {
    Labels out;
    out.reserve(values.size());
    if (!mapping.empty()) {
        for (const auto& v : values) {
            auto it = mapping.find(v);
            if (it == mapping.end()) throw SchemaError("column '" + column + "': value '" + v + "' has no declared code");
            if (it->second != 0 && it->second != 1) throw SchemaError("column '" + column + "': declared codes must be 0 or 1");
            out.push_back(static_cast<std::uint8_t>(it->second));
        }
        return out;
    }
    std::set<std::string> distinct(values.begin(), values.end());
    bool numeric01 = true;
    for (const auto& v : distinct) {
        auto num = parse_number(v);
        if (!num || (*num != 0.0 && *num != 1.0)) numeric01 = false;
    }
    if (numeric01) {
        for (const auto& v : values) out.push_back(*parse_number(v) == 1.0 ? 1 : 0);
        return out;
    }
    if (distinct.size() != 2) {
        throw SchemaError("column '" + column + "' is not binary (" + std::to_string(distinct.size()) +
                          " distinct values); declare a mapping");
    }
    const std::string& zero = *distinct.begin();
    for (const auto& v : values) out.push_back(v == zero ? 0 : 1);
    return out;
}

}  // namespace

std::vector<std::string> parse_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            if (!was_quoted) field = trim(field);
            in_quotes = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(was_quoted ? field : trim(field));
            field.clear();
            was_quoted = false;
        } else if (!was_quoted || (c != ' ' && c != '\t')) {
            field.push_back(c);
        }
    }
    if (in_quotes) throw SchemaError("unterminated quoted field");
    fields.push_back(was_quoted ? field : trim(field));
    return fields;
}

std::string format_csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        const auto& f = fields[i];
        if (f.find_first_of(",\"\n") != std::string::npos || (!f.empty() && (f.front() == ' ' || f.back() == ' '))) {
            out.push_back('"');
            for (char c : f) {
                if (c == '"') out.push_back('"');
                out.push_back(c);
            }
            out.push_back('"');
        } else {
            out += f;
        }
    }
    return out;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw NumericError("cannot format value");
    return std::string(buf, ptr);
}

Dataset parse_csv(std::string_view text, const CsvOptions& options) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw SchemaError("csv: missing header row");
    const auto header = parse_csv_line(lines.front());
    auto find_column = [&](const std::string& name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw SchemaError("csv: missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t s_col = find_column(options.sensitive_column);
    std::optional<std::size_t> y_col;
    if (options.label_column) y_col = find_column(*options.label_column);
    for (const auto& d : options.drop_columns) find_column(d);

    std::vector<std::size_t> feature_cols;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j == s_col || (y_col && j == *y_col)) continue;
        if (std::find(options.drop_columns.begin(), options.drop_columns.end(), header[j]) != options.drop_columns.end()) continue;
        feature_cols.push_back(j);
    }

    auto is_missing = [&](const std::string& v) {
        return std::find(options.missing_tokens.begin(), options.missing_tokens.end(), v) != options.missing_tokens.end();
    };

    std::vector<std::vector<std::string>> rows;
    std::size_t dropped = 0;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (trim(lines[li]).empty()) continue;
        auto fields = parse_csv_line(lines[li]);
        if (fields.size() != header.size()) {
            throw SchemaError("csv: line " + std::to_string(li + 1) + " has " + std::to_string(fields.size()) +
                              " fields, header has " + std::to_string(header.size()));
        }
        bool missing = is_missing(fields[s_col]) || (y_col && is_missing(fields[*y_col]));
        for (auto j : feature_cols) missing = missing || is_missing(fields[j]);
        if (missing) {
            ++dropped;
            continue;
        }
        rows.push_back(std::move(fields));
    }
    if (rows.empty()) throw SchemaError("csv: no complete rows");

    Dataset ds;
    ds.dropped_rows = dropped;
    {
        std::vector<std::string> svals;
        for (const auto& r : rows) svals.push_back(r[s_col]);
        ds.sensitive = code_binary(svals, options.sensitive_mapping, options.sensitive_column);
    }
    if (y_col) {
        std::vector<std::string> yvals;
        for (const auto& r : rows) yvals.push_back(r[*y_col]);
        ds.task_label = code_binary(yvals, options.label_mapping, *options.label_column);
    }

    // Column expansion: numeric -> 1 column, categorical -> one per category.
    struct Expansion {
        std::size_t source;
        bool numeric;
        std::vector<std::string> categories;
    };
    std::vector<Expansion> expansions;
    std::size_t width = 0;
    for (auto j : feature_cols) {
        Expansion e{j, true, {}};
        for (const auto& r : rows) {
            if (!parse_number(r[j])) {
                e.numeric = false;
                break;
            }
        }
        if (e.numeric) {
            ds.column_names.push_back(header[j]);
            ++width;
        } else {
            std::set<std::string> cats;
            for (const auto& r : rows) cats.insert(r[j]);
            e.categories.assign(cats.begin(), cats.end());
            for (const auto& c : e.categories) ds.column_names.push_back(header[j] + "=" + c);
            width += e.categories.size();
        }
        expansions.push_back(std::move(e));
    }

    ds.features = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    Eigen::Index col = 0;
    for (const auto& e : expansions) {
        if (e.numeric) {
            for (std::size_t i = 0; i < rows.size(); ++i) ds.features(static_cast<Eigen::Index>(i), col) = *parse_number(rows[i][e.source]);
            if (options.normalize) {
                auto c = ds.features.col(col);
                const double lo = c.minCoeff();
                const double hi = c.maxCoeff();
                if (hi > lo) {
                    c = (c.array() - lo) / (hi - lo);
                } else {
                    c.setZero();
                }
            }
            ++col;
        } else {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                auto it = std::lower_bound(e.categories.begin(), e.categories.end(), rows[i][e.source]);
                ds.features(static_cast<Eigen::Index>(i), col + (it - e.categories.begin())) = 1.0;
            }
            col += static_cast<Eigen::Index>(e.categories.size());
        }
    }
    ds.validate();
    return ds;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    if (!std::filesystem::exists(path)) throw ArgumentError("csv: file not found: " + path.string());
    return parse_csv(read_text(path), options);
}

Dataset load_csv(const std::filesystem::path& path, const std::string& sensitive_column,
                 const std::optional<std::string>& label_column, bool normalize) {
    CsvOptions options;
    options.sensitive_column = sensitive_column;
    options.label_column = label_column;
    options.normalize = normalize;
    return load_csv(path, options);
}

}  // namespace smoothfair
