#include "smoothfair/numkit/matrix.hpp"

#include "smoothfair/errors.hpp"

namespace smoothfair {

bool all_finite(const Matrix& m) { return m.allFinite(); }

Matrix take_rows(const Matrix& m, std::span<const std::size_t> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= static_cast<std::size_t>(m.rows())) throw ShapeError("take_rows: row index out of range");
        out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

Labels take(const Labels& labels, std::span<const std::size_t> rows) {
    Labels out;
    out.reserve(rows.size());
    for (auto r : rows) {
        if (r >= labels.size()) throw ShapeError("take: row index out of range");
        out.push_back(labels[r]);
    }
    return out;
}

}  // namespace smoothfair
