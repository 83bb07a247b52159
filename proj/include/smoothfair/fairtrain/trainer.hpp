#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "smoothfair/audit/auditor.hpp"
#include "smoothfair/data/dataset.hpp"
#include "smoothfair/fairtrain/config.hpp"
#include "smoothfair/numkit/network.hpp"

namespace smoothfair {

struct FinalLosses {
    double reconstruction = 0.0;
    double fairness = 0.0;
};

struct TrainedModel {
    NetworkParams encoder;
    NetworkParams decoder;
    std::optional<NetworkParams> adversary;
    TrainConfig config;
    FinalLosses final_losses;
    CertificateReport train_certificate;
    CertificateReport test_certificate;
    /// Demographic parity of the adversary's hard decisions on clean test encodings.
    std::optional<double> adversary_delta;
    std::size_t skipped_batches = 0;
};

/// Autoencoder with the noisy channel: reconstruction from t(x) + noise plus
/// lambda times the Monte-Carlo DP loss on each split batch.
TrainedModel train_awgn(const TrainConfig& config, const Dataset& train, const Dataset& test);
/// Alternating adversarial baseline (adv_ce or adv_l1), one adversary step per autoencoder step.
TrainedModel train_adversarial(const TrainConfig& config, const Dataset& train, const Dataset& test);
/// Reconstruction only, no channel.
TrainedModel train_plain(const TrainConfig& config, const Dataset& train, const Dataset& test);
/// Dispatches on config.method.
TrainedModel train_model(const TrainConfig& config, const Dataset& train, const Dataset& test);

/// Rows t(x), plus fresh N(0, sigma^2 I) noise when with_noise is set.
/// Sensitive attribute and task label are carried through.
Dataset encode_fresh(const TrainedModel& model, const Dataset& ds, bool with_noise, std::uint64_t seed);

/// Certificate of an encoder on a dataset: leave-one-out plug-in audit at the
/// config's sigma; noisy queries only for the awgn method.
CertificateReport certify(const TrainedModel& model, const Dataset& ds, const std::string& split_tag);

/// |P(f=1 | S=1) - P(f=1 | S=0)| of hard decisions.
double demographic_parity(const Labels& decisions, const Labels& sensitive);

/// Directory bundle: config.json, encoder.json, decoder.json, [adversary.json], report.json.
void save_model(const TrainedModel& model, const std::filesystem::path& dir);
TrainedModel load_model(const std::filesystem::path& dir);
nlohmann::json model_report(const TrainedModel& model);

}  // namespace smoothfair
