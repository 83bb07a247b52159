#include "smoothfair/fairtrain/probe.hpp"

#include <cmath>

#include "smoothfair/data/split.hpp"
#include "smoothfair/errors.hpp"
#include "smoothfair/fairtrain/trainer.hpp"
#include "smoothfair/numkit/losses.hpp"
#include "smoothfair/numkit/optimizer.hpp"

namespace smoothfair {

std::string ProbeSpec::name() const {
    std::string s = "mlp";
    for (auto w : hidden) s += "-" + std::to_string(w);
    return s;
}

NetworkParams decoder_features(const NetworkParams& decoder) {
    if (decoder.layers().size() < 2) throw ArgumentError("decoder_features: decoder has no hidden layer");
    return NetworkParams(std::vector<Layer>(decoder.layers().begin(), decoder.layers().end() - 1));
}

ProbeResult train_probe(const Dataset& reps, ProbeTarget target, const ProbeSpec& spec,
                        const std::optional<NetworkParams>& frozen_prefix) {
    if (reps.rows() == 0) throw ArgumentError("train_probe: empty representation set");
    if (target == ProbeTarget::task_label && !reps.task_label) throw ArgumentError("train_probe: dataset has no task label");
    if (!reps.has_both_groups()) throw ArgumentError("train_probe: representations need both sensitive groups");
    if (!(spec.holdout > 0.0 && spec.holdout < 1.0)) throw ArgumentError("train_probe: holdout must lie in (0, 1)");
    if (!(spec.validation >= 0.0 && spec.validation < 1.0)) throw ArgumentError("train_probe: validation must lie in [0, 1)");
    if (spec.epochs == 0 || spec.batch_size == 0) throw ArgumentError("train_probe: epochs and batch_size must be >= 1");

    Dataset features = reps;
    if (frozen_prefix) {
        if (frozen_prefix->input_dim() != reps.cols()) throw ShapeError("train_probe: prefix input width mismatch");
        features.features = predict(*frozen_prefix, reps.features);
    }
    auto parts = split(features, {{1.0 - spec.holdout, spec.holdout}, spec.seed});
    const Dataset& fit = parts.parts[0];
    const Dataset& held = parts.parts[1];
    const Labels& y_held = target == ProbeTarget::sensitive ? held.sensitive : *held.task_label;

    // Standardize with fit-split statistics; the scaler becomes the head's first layer.
    const auto d = static_cast<Eigen::Index>(features.cols());
    const Vector mean = fit.features.colwise().mean().transpose();
    Vector inv_sd(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double sd = std::sqrt((fit.features.col(j).array() - mean(j)).square().mean());
        inv_sd(j) = sd > 1e-12 ? 1.0 / sd : 1.0;
    }
    Layer scaler{Matrix(inv_sd.asDiagonal()), -inv_sd.cwiseProduct(mean), Activation::identity};
    auto standardize = [&](const Matrix& x) { return predict(NetworkParams({scaler}), x); };
    const Matrix x_held = standardize(held.features);

    Dataset train_rows = fit;
    Dataset val_rows;
    if (spec.validation > 0.0) {
        auto inner = split(fit, {{1.0 - spec.validation, spec.validation}, derive_seed(spec.seed, 1)});
        train_rows = std::move(inner.parts[0]);
        val_rows = std::move(inner.parts[1]);
    }
    auto labels_of = [&](const Dataset& ds) -> const Labels& { return target == ProbeTarget::sensitive ? ds.sensitive : *ds.task_label; };
    const Matrix x_fit = standardize(train_rows.features);
    const Labels& y_fit = labels_of(train_rows);

    Rng rng(spec.seed);
    std::vector<std::size_t> dims{features.cols()};
    dims.insert(dims.end(), spec.hidden.begin(), spec.hidden.end());
    dims.push_back(1);
    NetworkParams head = make_mlp(dims, Activation::relu, Activation::sigmoid, rng);
    OptimizerConfig oc;
    oc.lr = spec.lr;
    Optimizer opt(head, oc);

    const std::size_t n = train_rows.rows();
    const bool early_stop = val_rows.rows() > 0;
    const Matrix x_val = early_stop ? standardize(val_rows.features) : Matrix();
    double best_loss = INFINITY;
    NetworkParams best = head;
    for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
        auto order = rng.permutation(n);
        for (std::size_t start = 0; start < n; start += spec.batch_size) {
            const std::size_t end = std::min(n, start + spec.batch_size);
            std::span<const std::size_t> rows(order.data() + start, end - start);
            auto f = forward(head, take_rows(x_fit, rows));
            auto loss = bce_loss(f.output, take(y_fit, rows));
            if (!std::isfinite(loss.value)) throw NumericError("train_probe: non-finite loss");
            opt.step(head, backward(head, f.tape, loss.grad));
        }
        if (early_stop) {
            const double v = bce_loss(predict(head, x_val), labels_of(val_rows)).value;
            if (v < best_loss) {
                best_loss = v;
                best = head;
            }
        }
    }
    if (early_stop) head = best;

    const Matrix p = predict(head, x_held);
    Labels decisions(held.rows());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < held.rows(); ++i) {
        decisions[i] = p(static_cast<Eigen::Index>(i), 0) >= 0.5 ? 1 : 0;
        if (decisions[i] == y_held[i]) ++correct;
    }
    ProbeResult r;
    r.measured_delta = demographic_parity(decisions, held.sensitive);
    r.accuracy = static_cast<double>(correct) / static_cast<double>(held.rows());
    std::vector<Layer> layers = frozen_prefix ? frozen_prefix->layers() : std::vector<Layer>{};
    layers.push_back(scaler);
    for (const auto& l : head.layers()) layers.push_back(l);
    r.head = NetworkParams(std::move(layers));
    return r;
}

}  // namespace smoothfair
