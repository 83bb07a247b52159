#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "smoothfair/numkit/optimizer.hpp"

namespace smoothfair {

enum class Method { awgn, adv_ce, adv_l1, plain };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct TrainConfig {
    Method method = Method::awgn;
    double lambda = 5.0;
    double sigma = 0.3;
    /// Monte-Carlo draws per query point in the DP loss.
    std::size_t m = 1;
    double lr = 1e-3;
    double adversary_lr = 1e-3;
    std::size_t epochs = 40;
    std::size_t batch_size = 64;
    std::size_t latent_dim = 3;
    std::vector<std::size_t> encoder_hidden{32, 32, 32};
    std::vector<std::size_t> decoder_hidden{32, 32, 32, 32};
    std::vector<std::size_t> adversary_hidden{32, 32, 32, 32, 32, 32, 32};
    OptimizerKind optimizer = OptimizerKind::adam;
    std::uint64_t seed = 0;

    /// Throws ArgumentError on violated invariants.
    void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
/// Missing keys keep their defaults; unknown keys are a SchemaError.
TrainConfig train_config_from_json(const nlohmann::json& j);
/// Applies the keys present in `j` on top of `base`.
void merge_train_config(TrainConfig& base, const nlohmann::json& j);

}  // namespace smoothfair
