#include "smoothfair/numkit/optimizer.hpp"

#include <cmath>

#include "smoothfair/errors.hpp"

namespace smoothfair {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_from_string(const std::string& name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "adam") return OptimizerKind::adam;
    throw SchemaError("unknown optimizer '" + name + "'");
}

Optimizer::Optimizer(const NetworkParams& net, OptimizerConfig config) : config_(config) {
    if (!(config_.lr > 0.0)) throw ArgumentError("optimizer: learning rate must be positive");
    for (const auto& layer : net.layers()) {
        m_w_.push_back(Matrix::Zero(layer.weights.rows(), layer.weights.cols()));
        v_w_.push_back(Matrix::Zero(layer.weights.rows(), layer.weights.cols()));
        m_b_.push_back(Vector::Zero(layer.bias.size()));
        v_b_.push_back(Vector::Zero(layer.bias.size()));
    }
}

void Optimizer::step(NetworkParams& net, const Gradients& grads) {
    if (config_.kind == OptimizerKind::sgd && config_.momentum == 0.0) {
        sgd_step(net, grads, config_.lr);
        ++steps_;
        return;
    }
    if (grads.weights.size() != m_w_.size()) throw ShapeError("optimizer: gradient layer count mismatch");
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        if (grads.weights[l].rows() != m_w_[l].rows() || grads.weights[l].cols() != m_w_[l].cols() ||
            grads.biases[l].size() != m_b_[l].size()) {
            throw ShapeError("optimizer: gradient shape mismatch at layer " + std::to_string(l));
        }
        if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite()) {
            throw NumericError("optimizer: non-finite gradient at layer " + std::to_string(l));
        }
    }
    ++steps_;
    auto& layers = net.mutable_layers();
    const double lr = config_.lr;
    if (config_.kind == OptimizerKind::sgd) {
        for (std::size_t l = 0; l < layers.size(); ++l) {
            m_w_[l] = config_.momentum * m_w_[l] + grads.weights[l];
            m_b_[l] = config_.momentum * m_b_[l] + grads.biases[l];
            layers[l].weights -= lr * m_w_[l];
            layers[l].bias -= lr * m_b_[l];
        }
        return;
    }
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    const double step_size = lr * std::sqrt(c2) / c1;
    const double eps = config_.epsilon * std::sqrt(c2);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        m_w_[l] = b1 * m_w_[l] + (1.0 - b1) * grads.weights[l];
        v_w_[l] = b2 * v_w_[l] + (1.0 - b2) * grads.weights[l].cwiseAbs2();
        layers[l].weights.array() -= step_size * m_w_[l].array() / (v_w_[l].array().sqrt() + eps);
        m_b_[l] = b1 * m_b_[l] + (1.0 - b1) * grads.biases[l];
        v_b_[l] = b2 * v_b_[l] + (1.0 - b2) * grads.biases[l].cwiseAbs2();
        layers[l].bias.array() -= step_size * m_b_[l].array() / (v_b_[l].array().sqrt() + eps);
    }
}

}  // namespace smoothfair
