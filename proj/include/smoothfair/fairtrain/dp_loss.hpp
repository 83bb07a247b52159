#pragma once

#include <cstddef>

#include "smoothfair/numkit/matrix.hpp"
#include "smoothfair/numkit/rng.hpp"

namespace smoothfair {

struct DpLossResult {
    /// Group-balanced mean of |eta1 - eta0| over the noisy query draws, in [0, 1].
    double value = 0.0;
    /// d(value)/d(query encodings), one row per query point.
    Matrix grad;
    /// True when a half lacked one of the groups; value and grad are then zero.
    bool skipped = false;
};

/// Monte-Carlo demographic-parity loss. The mixture is fit on the encodings
/// of half A (held constant); each half-B encoding is perturbed m times with
/// N(0, sigma^2 I) noise drawn from `rng` and scored by the balanced posterior.
DpLossResult dp_loss_mc(const Matrix& centers_a, const Labels& groups_a, const Matrix& queries_b, const Labels& groups_b,
                        double sigma, std::size_t m, Rng& rng);

}  // namespace smoothfair
