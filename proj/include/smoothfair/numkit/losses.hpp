#pragma once

#include "smoothfair/numkit/matrix.hpp"

namespace smoothfair {

struct LossResult {
    double value = 0.0;
    Matrix grad;  // d(value)/d(prediction), same shape as the prediction
};

/// Mean over all entries of (pred - target)^2.
LossResult mse_loss(const Matrix& pred, const Matrix& target);

/// Mean binary cross-entropy of a single-column probability output.
/// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before the log.
LossResult bce_loss(const Matrix& prob, const Labels& targets);

inline constexpr double kProbClamp = 1e-7;

}  // namespace smoothfair
