#include "smoothfair/numkit/network.hpp"

#include <atomic>
#include <cmath>

#include "smoothfair/errors.hpp"

namespace smoothfair {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void apply_activation(Matrix& m, Activation a) {
    switch (a) {
        case Activation::relu:
            m = m.cwiseMax(0.0);
            break;
        case Activation::sigmoid:
            m = m.unaryExpr([](double v) { return sigmoid(v); });
            break;
        case Activation::identity:
            break;
    }
}

// Multiplies the upstream gradient by the activation derivative, expressed
// through the stored post-activation output.
void apply_derivative(Matrix& grad, const Matrix& out, Activation a) {
    switch (a) {
        case Activation::relu:
            grad = (out.array() > 0.0).select(grad, 0.0);
            break;
        case Activation::sigmoid:
            grad.array() *= out.array() * (1.0 - out.array());
            break;
        case Activation::identity:
            break;
    }
}

}  // namespace

std::string to_string(Activation a) {
    switch (a) {
        case Activation::relu:
            return "relu";
        case Activation::sigmoid:
            return "sigmoid";
        case Activation::identity:
            return "identity";
    }
    return "identity";
}

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "identity") return Activation::identity;
    throw SchemaError("unknown activation '" + name + "'");
}

std::uint64_t NetworkParams::next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
}

NetworkParams::NetworkParams(std::vector<Layer> layers) : layers_(std::move(layers)), id_(next_id()) { validate(); }

NetworkParams::NetworkParams(const NetworkParams& other)
    : layers_(other.layers_), id_(next_id()), revision_(other.revision_) {}

NetworkParams& NetworkParams::operator=(const NetworkParams& other) {
    if (this != &other) {
        layers_ = other.layers_;
        id_ = next_id();
        revision_ = other.revision_;
    }
    return *this;
}

void NetworkParams::validate() const {
    if (layers_.empty()) throw ShapeError("network has no layers");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.bias.size() != layer.weights.rows()) throw ShapeError("layer " + std::to_string(l) + ": bias size mismatch");
        if (l > 0 && layer.weights.cols() != layers_[l - 1].weights.rows()) {
            throw ShapeError("layer " + std::to_string(l) + ": input width does not match previous layer");
        }
    }
}

std::vector<std::size_t> NetworkParams::layer_dims() const {
    std::vector<std::size_t> dims;
    if (layers_.empty()) return dims;
    dims.push_back(static_cast<std::size_t>(layers_.front().weights.cols()));
    for (const auto& layer : layers_) dims.push_back(static_cast<std::size_t>(layer.weights.rows()));
    return dims;
}

std::size_t NetworkParams::input_dim() const {
    return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weights.cols());
}

std::size_t NetworkParams::output_dim() const {
    return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().weights.rows());
}

std::size_t NetworkParams::parameter_count() const {
    std::size_t count = 0;
    for (const auto& layer : layers_) count += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
    return count;
}

NetworkParams make_mlp(std::span<const std::size_t> dims, Activation hidden, Activation output, Rng& rng) {
    if (dims.size() < 2) throw ArgumentError("make_mlp: need at least input and output widths");
    for (auto d : dims) {
        if (d == 0) throw ArgumentError("make_mlp: zero-width layer");
    }
    std::vector<Layer> layers;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const auto in = static_cast<Eigen::Index>(dims[l]);
        const auto out = static_cast<Eigen::Index>(dims[l + 1]);
        Layer layer;
        layer.activation = (l + 2 == dims.size()) ? output : hidden;
        layer.weights.resize(out, in);
        layer.bias = Vector::Zero(out);
        switch (layer.activation) {
            case Activation::relu: {
                const double sd = std::sqrt(2.0 / static_cast<double>(in));
                for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = rng.normal(0.0, sd);
                break;
            }
            case Activation::sigmoid: {
                const double a = 1.0 / std::sqrt(static_cast<double>(in));
                for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = rng.uniform(-a, a);
                break;
            }
            case Activation::identity: {
                const double a = std::sqrt(6.0 / static_cast<double>(in + out));
                for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = rng.uniform(-a, a);
                break;
            }
        }
        layers.push_back(std::move(layer));
    }
    return NetworkParams(std::move(layers));
}

bool Gradients::all_finite() const {
    for (const auto& w : weights) {
        if (!w.allFinite()) return false;
    }
    for (const auto& b : biases) {
        if (!b.allFinite()) return false;
    }
    return input.allFinite();
}

void Gradients::scale(double factor) {
    for (auto& w : weights) w *= factor;
    for (auto& b : biases) b *= factor;
    input *= factor;
}

void Gradients::add(const Gradients& other) {
    if (other.weights.size() != weights.size()) throw ShapeError("Gradients::add: layer count mismatch");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] += other.weights[l];
        biases[l] += other.biases[l];
    }
    if (input.rows() == other.input.rows() && input.cols() == other.input.cols()) input += other.input;
}

ForwardResult forward(const NetworkParams& net, const Matrix& x) {
    if (net.layers().empty()) throw ShapeError("forward: empty network");
    if (static_cast<std::size_t>(x.cols()) != net.input_dim()) {
        throw ShapeError("forward: input has " + std::to_string(x.cols()) + " columns, network expects " +
                         std::to_string(net.input_dim()));
    }
    ForwardResult result;
    result.tape.net_id = net.id();
    result.tape.revision = net.revision();
    result.tape.inputs.reserve(net.layers().size());
    result.tape.outputs.reserve(net.layers().size());
    Matrix current = x;
    for (const auto& layer : net.layers()) {
        Matrix pre = current * layer.weights.transpose();
        pre.rowwise() += layer.bias.transpose();
        apply_activation(pre, layer.activation);
        result.tape.inputs.push_back(std::move(current));
        current = pre;
        result.tape.outputs.push_back(std::move(pre));
    }
    result.output = std::move(current);
    return result;
}

Matrix predict(const NetworkParams& net, const Matrix& x) {
    if (static_cast<std::size_t>(x.cols()) != net.input_dim()) throw ShapeError("predict: input width mismatch");
    Matrix current = x;
    for (const auto& layer : net.layers()) {
        Matrix pre = current * layer.weights.transpose();
        pre.rowwise() += layer.bias.transpose();
        apply_activation(pre, layer.activation);
        current = std::move(pre);
    }
    return current;
}

Gradients backward(const NetworkParams& net, const Tape& tape, const Matrix& out_grad) {
    const auto& layers = net.layers();
    if (tape.net_id != net.id() || tape.revision != net.revision()) {
        throw StateError("backward: tape was recorded for different or since-updated parameters");
    }
    if (tape.outputs.size() != layers.size() || tape.inputs.size() != layers.size()) {
        throw StateError("backward: tape does not match network depth");
    }
    const Matrix& last = tape.outputs.back();
    if (out_grad.rows() != last.rows() || out_grad.cols() != last.cols()) {
        throw ShapeError("backward: output gradient shape mismatch");
    }
    Gradients grads;
    grads.weights.resize(layers.size());
    grads.biases.resize(layers.size());
    Matrix g = out_grad;
    for (std::size_t k = layers.size(); k-- > 0;) {
        apply_derivative(g, tape.outputs[k], layers[k].activation);
        grads.weights[k] = g.transpose() * tape.inputs[k];
        grads.biases[k] = g.colwise().sum().transpose();
        g = g * layers[k].weights;
    }
    grads.input = std::move(g);
    return grads;
}

void sgd_step(NetworkParams& net, const Gradients& grads, double lr) {
    if (!(lr > 0.0)) throw ArgumentError("sgd_step: learning rate must be positive");
    if (grads.weights.size() != net.layers().size()) throw ShapeError("sgd_step: gradient layer count mismatch");
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        const auto& layer = net.layers()[l];
        if (grads.weights[l].rows() != layer.weights.rows() || grads.weights[l].cols() != layer.weights.cols() ||
            grads.biases[l].size() != layer.bias.size()) {
            throw ShapeError("sgd_step: gradient shape mismatch at layer " + std::to_string(l));
        }
        if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite()) {
            throw NumericError("sgd_step: non-finite gradient at layer " + std::to_string(l));
        }
    }
    auto& layers = net.mutable_layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].weights -= lr * grads.weights[l];
        layers[l].bias -= lr * grads.biases[l];
    }
}

}  // namespace smoothfair
