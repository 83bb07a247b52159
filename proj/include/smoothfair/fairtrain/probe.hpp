#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smoothfair/data/dataset.hpp"
#include "smoothfair/numkit/network.hpp"

namespace smoothfair {

enum class ProbeTarget { sensitive, task_label };

struct ProbeSpec {
    std::vector<std::size_t> hidden{32, 32, 32, 32};
    double lr = 1e-3;
    std::size_t epochs = 30;
    std::size_t batch_size = 64;
    /// Share of rows held out for measuring delta and accuracy.
    double holdout = 0.3;
    /// Share of the fitting rows set aside to keep the epoch with the lowest
    /// validation loss; 0 trains for all epochs and keeps the last.
    double validation = 0.0;
    std::uint64_t seed = 0;

    std::string name() const;
};

struct ProbeResult {
    /// Frozen prefix (if any), the input standardizer, then the trained layers.
    NetworkParams head;
    double measured_delta = 0.0;
    double accuracy = 0.0;
};

/// The decoder's hidden layers (output layer dropped), used as a frozen
/// feature extractor in front of a probe head.
NetworkParams decoder_features(const NetworkParams& decoder);

/// Trains a classifier for `target` on the representations and measures the
/// demographic parity of its 0.5-thresholded decisions on a held-out slice.
/// When `frozen_prefix` is given its outputs feed the trainable head. Inputs
/// to the trainable part are standardized with statistics of the fit slice.
ProbeResult train_probe(const Dataset& reps, ProbeTarget target, const ProbeSpec& spec,
                        const std::optional<NetworkParams>& frozen_prefix = std::nullopt);

}  // namespace smoothfair
