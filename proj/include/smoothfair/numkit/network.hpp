#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smoothfair/numkit/matrix.hpp"
#include "smoothfair/numkit/rng.hpp"

namespace smoothfair {

enum class Activation { relu, sigmoid, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// One fully connected layer: y = act(x W^T + b), W is (out x in).
struct Layer {
    Matrix weights;
    Vector bias;
    Activation activation = Activation::identity;
};

/// Feed-forward MLP parameters (encoder t, decoder g, adversary or probe f).
///
/// Each instance carries an identity and a revision counter so that a
/// forward tape can be matched to the exact parameters that produced it.
/// Copies receive a fresh identity; in-place updates bump the revision.
class NetworkParams {
public:
    NetworkParams() : id_(next_id()) {}
    explicit NetworkParams(std::vector<Layer> layers);

    NetworkParams(const NetworkParams& other);
    NetworkParams& operator=(const NetworkParams& other);
    NetworkParams(NetworkParams&&) noexcept = default;
    NetworkParams& operator=(NetworkParams&&) noexcept = default;

    const std::vector<Layer>& layers() const { return layers_; }
    /// Mutable access counts as an update.
    std::vector<Layer>& mutable_layers() {
        ++revision_;
        return layers_;
    }

    std::vector<std::size_t> layer_dims() const;
    std::size_t input_dim() const;
    std::size_t output_dim() const;
    std::size_t parameter_count() const;

    std::uint64_t id() const { return id_; }
    std::uint64_t revision() const { return revision_; }

private:
    static std::uint64_t next_id();
    void validate() const;

    std::vector<Layer> layers_;
    std::uint64_t id_ = 0;
    std::uint64_t revision_ = 0;
};

/// Builds an MLP with the given layer widths (input, hidden..., output).
/// relu layers use He-normal weights, sigmoid heads a small uniform range,
/// identity layers Glorot-uniform; biases start at zero.
NetworkParams make_mlp(std::span<const std::size_t> dims, Activation hidden, Activation output, Rng& rng);

/// Activation record of one forward call.
struct Tape {
    std::uint64_t net_id = 0;
    std::uint64_t revision = 0;
    std::vector<Matrix> inputs;   // input of each layer
    std::vector<Matrix> outputs;  // post-activation output of each layer
};

struct ForwardResult {
    Matrix output;
    Tape tape;
};

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    Matrix input;

    bool all_finite() const;
    void scale(double factor);
    void add(const Gradients& other);
};

ForwardResult forward(const NetworkParams& net, const Matrix& x);
/// Output only, no tape.
Matrix predict(const NetworkParams& net, const Matrix& x);
Gradients backward(const NetworkParams& net, const Tape& tape, const Matrix& out_grad);

/// Plain gradient step: p -= lr * g. Throws NumericError (and leaves the
/// network untouched) when any gradient entry is non-finite.
void sgd_step(NetworkParams& net, const Gradients& grads, double lr);

}  // namespace smoothfair
