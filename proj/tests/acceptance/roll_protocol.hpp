#pragma once

// Desk-scale Swiss Roll protocol shared by the acceptance and property runs.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "smoothfair/data/generators.hpp"
#include "smoothfair/fairtrain/probe.hpp"
#include "smoothfair/fairtrain/sweep.hpp"
#include "smoothfair/fairtrain/trainer.hpp"

namespace smoothfair::roll {

inline constexpr std::size_t kTrainRows = 4000;
inline constexpr std::size_t kProbeRows = 2000;
inline constexpr std::size_t kSeeds = 10;
inline constexpr std::size_t kEpochs = 200;
inline constexpr std::size_t kProbeEpochs = 300;

struct Run {
    /// Adversary parity for the baselines, training certificate for awgn.
    double aud = 0.0;
    double proc = 0.0;
    double certificate = 0.0;
};

inline TrainConfig config(Method m, std::uint64_t seed) {
    TrainConfig c;
    c.method = m;
    c.epochs = kEpochs;
    c.seed = seed;
    c.lambda = 5.0;
    if (m == Method::adv_ce || m == Method::adv_l1) {
        c.lambda = 20.0;
        c.lr = 1e-4;
    }
    return c;
}

/// PROC probe: the frozen decoder hidden layers followed by four trainable
/// layers of 32, trained for the sensitive attribute on fresh encodings of
/// the probe split.
inline Run run(const TrainConfig& c, std::uint64_t seed) {
    const auto train = generate_swiss_roll(kTrainRows, kDefaultRollShift, 0.0, derive_seed(seed, 11));
    const auto probe = generate_swiss_roll(kProbeRows, kDefaultRollShift, 0.0, derive_seed(seed, 12));
    const auto model = train_model(c, train, probe);
    const auto reps = encode_fresh(model, probe, c.method == Method::awgn, derive_seed(seed, 13));
    ProbeSpec spec;
    spec.epochs = kProbeEpochs;
    spec.seed = derive_seed(seed, 14);
    const auto r = train_probe(reps, ProbeTarget::sensitive, spec, decoder_features(model.decoder));
    Run out;
    out.certificate = model.train_certificate.delta_n;
    out.aud = model.adversary_delta ? *model.adversary_delta : model.train_certificate.delta_n;
    out.proc = r.measured_delta;
    return out;
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

}  // namespace smoothfair::roll
