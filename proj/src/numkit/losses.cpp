#include "smoothfair/numkit/losses.hpp"

#include <algorithm>
#include <cmath>

#include "smoothfair/errors.hpp"

namespace smoothfair {

LossResult mse_loss(const Matrix& pred, const Matrix& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) throw ShapeError("mse_loss: shape mismatch");
    if (pred.size() == 0) throw ArgumentError("mse_loss: empty input");
    const double count = static_cast<double>(pred.size());
    LossResult r;
    Matrix diff = pred - target;
    r.value = diff.squaredNorm() / count;
    r.grad = (2.0 / count) * diff;
    return r;
}

LossResult bce_loss(const Matrix& prob, const Labels& targets) {
    if (prob.cols() != 1 || static_cast<std::size_t>(prob.rows()) != targets.size()) {
        throw ShapeError("bce_loss: expected one probability column per target");
    }
    if (targets.empty()) throw ArgumentError("bce_loss: empty input");
    const double n = static_cast<double>(targets.size());
    LossResult r;
    r.grad.resize(prob.rows(), 1);
    double total = 0.0;
    for (Eigen::Index i = 0; i < prob.rows(); ++i) {
        const double p = std::clamp(prob(i, 0), kProbClamp, 1.0 - kProbClamp);
        const double y = targets[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
        total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
        r.grad(i, 0) = (-y / p + (1.0 - y) / (1.0 - p)) / n;
    }
    r.value = total / n;
    return r;
}

}  // namespace smoothfair
