#include "smoothfair/fairtrain/config.hpp"

#include <cmath>

#include "smoothfair/errors.hpp"

namespace smoothfair {

std::string to_string(Method m) {
    switch (m) {
        case Method::awgn:
            return "awgn";
        case Method::adv_ce:
            return "adv_ce";
        case Method::adv_l1:
            return "adv_l1";
        case Method::plain:
            return "plain";
    }
    return "awgn";
}

Method method_from_string(const std::string& name) {
    if (name == "awgn") return Method::awgn;
    if (name == "adv_ce") return Method::adv_ce;
    if (name == "adv_l1") return Method::adv_l1;
    if (name == "plain") return Method::plain;
    throw SchemaError("unknown method '" + name + "' (expected awgn, adv_ce, adv_l1 or plain)");
}

void TrainConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ArgumentError("config: lambda must be >= 0");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ArgumentError("config: sigma must be > 0");
    if (m < 1) throw ArgumentError("config: m must be >= 1");
    if (!(lr > 0.0) || !(adversary_lr > 0.0)) throw ArgumentError("config: learning rates must be > 0");
    if (epochs < 1) throw ArgumentError("config: epochs must be >= 1");
    if (batch_size < 4 || batch_size % 2 != 0) throw ArgumentError("config: batch_size must be even and >= 4");
    if (latent_dim < 1) throw ArgumentError("config: latent_dim must be >= 1");
    for (const auto* dims : {&encoder_hidden, &decoder_hidden, &adversary_hidden}) {
        for (auto w : *dims) {
            if (w == 0) throw ArgumentError("config: zero-width hidden layer");
        }
    }
}

nlohmann::json to_json(const TrainConfig& c) {
    return {{"method", to_string(c.method)},
            {"lambda", c.lambda},
            {"sigma", c.sigma},
            {"m", c.m},
            {"lr", c.lr},
            {"adversary_lr", c.adversary_lr},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"latent_dim", c.latent_dim},
            {"encoder_hidden", c.encoder_hidden},
            {"decoder_hidden", c.decoder_hidden},
            {"adversary_hidden", c.adversary_hidden},
            {"optimizer", to_string(c.optimizer)},
            {"seed", c.seed}};
}

void merge_train_config(TrainConfig& c, const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("train config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "method") {
                c.method = method_from_string(value.get<std::string>());
            } else if (key == "lambda") {
                c.lambda = value.get<double>();
            } else if (key == "sigma") {
                c.sigma = value.get<double>();
            } else if (key == "m") {
                c.m = value.get<std::size_t>();
            } else if (key == "lr") {
                c.lr = value.get<double>();
            } else if (key == "adversary_lr") {
                c.adversary_lr = value.get<double>();
            } else if (key == "epochs") {
                c.epochs = value.get<std::size_t>();
            } else if (key == "batch_size") {
                c.batch_size = value.get<std::size_t>();
            } else if (key == "latent_dim") {
                c.latent_dim = value.get<std::size_t>();
            } else if (key == "encoder_hidden") {
                c.encoder_hidden = value.get<std::vector<std::size_t>>();
            } else if (key == "decoder_hidden") {
                c.decoder_hidden = value.get<std::vector<std::size_t>>();
            } else if (key == "adversary_hidden") {
                c.adversary_hidden = value.get<std::vector<std::size_t>>();
            } else if (key == "optimizer") {
                c.optimizer = optimizer_from_string(value.get<std::string>());
            } else if (key == "seed") {
                c.seed = value.get<std::uint64_t>();
            } else {
                throw SchemaError("train config: unknown key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("train config: ") + e.what());
    }
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    merge_train_config(c, j);
    return c;
}

}  // namespace smoothfair
