#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace smoothfair {

/// Dense row-major matrix; rows are samples throughout the library.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Binary group / label codes (0 or 1) stored one byte per row.
using Labels = std::vector<std::uint8_t>;

bool all_finite(const Matrix& m);

/// Copies the listed rows, in order.
Matrix take_rows(const Matrix& m, std::span<const std::size_t> rows);
Labels take(const Labels& labels, std::span<const std::size_t> rows);

}  // namespace smoothfair
