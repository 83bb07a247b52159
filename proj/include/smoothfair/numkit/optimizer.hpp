#pragma once

#include <string>
#include <vector>

#include "smoothfair/numkit/network.hpp"

namespace smoothfair {

enum class OptimizerKind { sgd, adam };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& name);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double lr = 1e-3;
    double momentum = 0.0;  // sgd only
    double beta1 = 0.9;     // adam only
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Stateful first-order optimizer bound to one network's shapes.
/// With kind == sgd and momentum == 0 a step is exactly sgd_step().
class Optimizer {
public:
    Optimizer(const NetworkParams& net, OptimizerConfig config);

    /// Throws NumericError without touching the network on non-finite input.
    void step(NetworkParams& net, const Gradients& grads);

    const OptimizerConfig& config() const { return config_; }
    long steps_taken() const { return steps_; }

private:
    OptimizerConfig config_;
    std::vector<Matrix> m_w_, v_w_;
    std::vector<Vector> m_b_, v_b_;
    long steps_ = 0;
};

}  // namespace smoothfair
