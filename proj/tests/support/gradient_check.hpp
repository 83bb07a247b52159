#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "smoothfair/numkit/network.hpp"
#include "support/finite_diff.hpp"

namespace smoothfair::testing {

/// Smallest |pre-activation| over relu units; finite differences are only
/// trustworthy when this is well above the step size.
inline double relu_margin(const NetworkParams& net, const Matrix& x) {
    double margin = INFINITY;
    Matrix current = x;
    for (const auto& layer : net.layers()) {
        Matrix pre = current * layer.weights.transpose();
        pre.rowwise() += layer.bias.transpose();
        if (layer.activation == Activation::relu) margin = std::min(margin, pre.cwiseAbs().minCoeff());
        current = predict(NetworkParams(std::vector<Layer>{layer}), current);
    }
    return margin;
}

/// Max relative error between backward() and central differences for the
/// scalar sum(output .* projection), over all weights, biases and inputs.
inline double network_gradient_error(const NetworkParams& net, const Matrix& x, const Matrix& projection) {
    const auto fwd = forward(net, x);
    const auto grads = backward(net, fwd.tape, projection);
    auto loss_at = [&](const NetworkParams& n, const Matrix& input) { return predict(n, input).cwiseProduct(projection).sum(); };

    double worst = max_relative_error(grads.input, numeric_gradient([&](const Matrix& in) { return loss_at(net, in); }, x));
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        auto wfun = [&](const Matrix& w) {
            NetworkParams copy = net;
            copy.mutable_layers()[l].weights = w;
            return loss_at(copy, x);
        };
        worst = std::max(worst, max_relative_error(grads.weights[l], numeric_gradient(wfun, net.layers()[l].weights)));
        auto bfun = [&](const Matrix& b) {
            NetworkParams copy = net;
            copy.mutable_layers()[l].bias = b.col(0);
            return loss_at(copy, x);
        };
        Matrix bias_col = net.layers()[l].bias;
        Matrix gb = grads.biases[l];
        worst = std::max(worst, max_relative_error(gb, numeric_gradient(bfun, bias_col)));
    }
    return worst;
}

}  // namespace smoothfair::testing
