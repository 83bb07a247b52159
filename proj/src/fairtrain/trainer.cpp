#include "smoothfair/fairtrain/trainer.hpp"

#include <cmath>
#include <numeric>

#include "smoothfair/audit/bounds.hpp"
#include "smoothfair/errors.hpp"
#include "smoothfair/fairtrain/dp_loss.hpp"
#include "smoothfair/numkit/losses.hpp"
#include "smoothfair/numkit/optimizer.hpp"
#include "smoothfair/numkit/serialize.hpp"

namespace smoothfair {

namespace {

enum Stream : std::uint64_t { kInit = 1, kShuffle = 2, kChannel = 3, kDpNoise = 4, kAudit = 5 };

std::vector<std::size_t> widths(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
    std::vector<std::size_t> dims{in};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    return dims;
}

void check_inputs(const TrainConfig& config, const Dataset& train, const Dataset& test) {
    config.validate();
    train.validate();
    test.validate();
    if (train.rows() < 4) throw ArgumentError("train: need at least 4 training rows");
    if (!train.has_both_groups() || !test.has_both_groups()) throw ArgumentError("train: both datasets need both sensitive groups");
    if (train.cols() != test.cols()) throw ArgumentError("train: train and test have different feature widths");
}

struct Setup {
    TrainedModel model;
    Rng shuffle;
    Rng channel;
    Rng dp_noise;
};

Setup initialize(const TrainConfig& config, const Dataset& train, bool with_adversary) {
    Rng init(derive_seed(config.seed, kInit));
    const auto dims_enc = widths(train.cols(), config.encoder_hidden, config.latent_dim);
    const auto dims_dec = widths(config.latent_dim, config.decoder_hidden, train.cols());
    Setup s{TrainedModel{make_mlp(dims_enc, Activation::relu, Activation::identity, init),
                         make_mlp(dims_dec, Activation::relu, Activation::identity, init),
                         std::nullopt,
                         config,
                         {},
                         {},
                         {},
                         std::nullopt,
                         0},
            Rng(derive_seed(config.seed, kShuffle)), Rng(derive_seed(config.seed, kChannel)),
            Rng(derive_seed(config.seed, kDpNoise))};
    if (with_adversary) {
        const auto dims_adv = widths(config.latent_dim, config.adversary_hidden, 1);
        s.model.adversary = make_mlp(dims_adv, Activation::relu, Activation::sigmoid, init);
    }
    return s;
}

/// Batches of config.batch_size over a fresh permutation; a trailing partial
/// batch is kept when it still has an even size of at least 4.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch, Rng& rng) {
    auto order = rng.permutation(n);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start < n; start += batch) {
        std::size_t len = std::min(batch, n - start);
        if (len % 2) --len;
        if (len < 4) break;
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(start + len));
    }
    return out;
}

OptimizerConfig optimizer_config(const TrainConfig& c, double lr) {
    OptimizerConfig o;
    o.kind = c.optimizer;
    o.lr = lr;
    return o;
}

void check_finite(double v, const char* what, std::size_t epoch, std::size_t batch) {
    if (!std::isfinite(v)) {
        throw NumericError(std::string("training diverged: non-finite ") + what + " loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch));
    }
}

void finish(TrainedModel& model, const Dataset& train, const Dataset& test) {
    model.train_certificate = certify(model, train, "train");
    model.test_certificate = certify(model, test, "test");
    if (model.adversary) {
        const Matrix z = predict(model.encoder, test.features);
        const Matrix p = predict(*model.adversary, z);
        Labels decisions(static_cast<std::size_t>(p.rows()));
        for (Eigen::Index i = 0; i < p.rows(); ++i) decisions[static_cast<std::size_t>(i)] = p(i, 0) >= 0.5 ? 1 : 0;
        model.adversary_delta = demographic_parity(decisions, test.sensitive);
    }
}

}  // namespace

double demographic_parity(const Labels& decisions, const Labels& sensitive) {
    if (decisions.size() != sensitive.size()) throw ShapeError("demographic_parity: length mismatch");
    double pos[2] = {0, 0};
    double cnt[2] = {0, 0};
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        cnt[sensitive[i]] += 1;
        pos[sensitive[i]] += decisions[i];
    }
    if (cnt[0] == 0 || cnt[1] == 0) throw ArgumentError("demographic_parity: need both sensitive groups");
    return std::abs(pos[1] / cnt[1] - pos[0] / cnt[0]);
}

TrainedModel train_awgn(const TrainConfig& config, const Dataset& train, const Dataset& test) {
    check_inputs(config, train, test);
    if (config.method != Method::awgn) throw ArgumentError("train_awgn: config.method must be awgn");
    auto setup = initialize(config, train, false);
    auto& model = setup.model;
    Optimizer enc_opt(model.encoder, optimizer_config(config, config.lr));
    Optimizer dec_opt(model.decoder, optimizer_config(config, config.lr));

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double rec_sum = 0.0;
        double dp_sum = 0.0;
        std::size_t rec_n = 0;
        std::size_t dp_n = 0;
        const auto batches = make_batches(train.rows(), config.batch_size, setup.shuffle);
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const auto& rows = batches[b];
            const Matrix x = take_rows(train.features, rows);
            const Labels s = take(train.sensitive, rows);

            auto enc = forward(model.encoder, x);
            Matrix noisy = enc.output;
            for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy.data()[i] += config.sigma * setup.channel.normal();
            auto dec = forward(model.decoder, noisy);
            auto rec = mse_loss(dec.output, x);
            check_finite(rec.value, "reconstruction", epoch, b);
            auto dec_grads = backward(model.decoder, dec.tape, rec.grad);
            Matrix dz = dec_grads.input;

            if (config.lambda > 0.0) {
                const auto half = static_cast<Eigen::Index>(rows.size() / 2);
                const Matrix za = enc.output.topRows(half);
                const Matrix zb = enc.output.bottomRows(enc.output.rows() - half);
                const Labels sa(s.begin(), s.begin() + half);
                const Labels sb(s.begin() + half, s.end());
                auto dp = dp_loss_mc(za, sa, zb, sb, config.sigma, config.m, setup.dp_noise);
                if (dp.skipped) {
                    ++model.skipped_batches;
                } else {
                    check_finite(dp.value, "fairness", epoch, b);
                    dz.bottomRows(zb.rows()) += config.lambda * dp.grad;
                    dp_sum += dp.value;
                    ++dp_n;
                }
            }
            auto enc_grads = backward(model.encoder, enc.tape, dz);
            enc_opt.step(model.encoder, enc_grads);
            dec_opt.step(model.decoder, dec_grads);
            rec_sum += rec.value;
            ++rec_n;
        }
        model.final_losses.reconstruction = rec_n ? rec_sum / static_cast<double>(rec_n) : 0.0;
        model.final_losses.fairness = dp_n ? dp_sum / static_cast<double>(dp_n) : 0.0;
    }
    finish(model, train, test);
    return model;
}

TrainedModel train_adversarial(const TrainConfig& config, const Dataset& train, const Dataset& test) {
    check_inputs(config, train, test);
    if (config.method != Method::adv_ce && config.method != Method::adv_l1) {
        throw ArgumentError("train_adversarial: config.method must be adv_ce or adv_l1");
    }
    auto setup = initialize(config, train, true);
    auto& model = setup.model;
    auto& adversary = *model.adversary;
    Optimizer enc_opt(model.encoder, optimizer_config(config, config.lr));
    Optimizer dec_opt(model.decoder, optimizer_config(config, config.lr));
    Optimizer adv_opt(adversary, optimizer_config(config, config.adversary_lr));
    const bool ce = config.method == Method::adv_ce;

    // Adversary objective on probabilities p: cross-entropy, or the signed
    // group L1 gap mean_{s=0} p - mean_{s=1} p. Returns nullopt when a group is absent.
    auto adversary_loss = [&](const Matrix& p, const Labels& s) -> std::optional<LossResult> {
        if (ce) return bce_loss(p, s);
        double n[2] = {0, 0};
        for (auto g : s) n[g] += 1;
        if (n[0] == 0 || n[1] == 0) return std::nullopt;
        LossResult r;
        r.grad = Matrix::Zero(p.rows(), 1);
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
            const double w = s[static_cast<std::size_t>(i)] == 0 ? 1.0 / n[0] : -1.0 / n[1];
            r.value += w * p(i, 0);
            r.grad(i, 0) = w;
        }
        return r;
    };

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double rec_sum = 0.0;
        double adv_sum = 0.0;
        std::size_t rec_n = 0;
        std::size_t adv_n = 0;
        const auto batches = make_batches(train.rows(), config.batch_size, setup.shuffle);
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const auto& rows = batches[b];
            const Matrix x = take_rows(train.features, rows);
            const Labels s = take(train.sensitive, rows);

            auto enc = forward(model.encoder, x);
            {
                auto af = forward(adversary, enc.output);
                auto loss = adversary_loss(af.output, s);
                if (!loss) {
                    ++model.skipped_batches;
                } else {
                    check_finite(loss->value, "adversary", epoch, b);
                    adv_opt.step(adversary, backward(adversary, af.tape, loss->grad));
                }
            }

            auto dec = forward(model.decoder, enc.output);
            auto rec = mse_loss(dec.output, x);
            check_finite(rec.value, "reconstruction", epoch, b);
            auto dec_grads = backward(model.decoder, dec.tape, rec.grad);
            Matrix dz = dec_grads.input;
            if (config.lambda > 0.0) {
                auto af = forward(adversary, enc.output);
                auto loss = adversary_loss(af.output, s);
                if (loss) {
                    auto adv_grads = backward(adversary, af.tape, loss->grad);
                    dz -= config.lambda * adv_grads.input;
                    adv_sum += loss->value;
                    ++adv_n;
                }
            }
            enc_opt.step(model.encoder, backward(model.encoder, enc.tape, dz));
            dec_opt.step(model.decoder, dec_grads);
            rec_sum += rec.value;
            ++rec_n;
        }
        model.final_losses.reconstruction = rec_n ? rec_sum / static_cast<double>(rec_n) : 0.0;
        model.final_losses.fairness = adv_n ? adv_sum / static_cast<double>(adv_n) : 0.0;
    }
    finish(model, train, test);
    return model;
}

TrainedModel train_plain(const TrainConfig& config, const Dataset& train, const Dataset& test) {
    check_inputs(config, train, test);
    if (config.method != Method::plain) throw ArgumentError("train_plain: config.method must be plain");
    auto setup = initialize(config, train, false);
    auto& model = setup.model;
    Optimizer enc_opt(model.encoder, optimizer_config(config, config.lr));
    Optimizer dec_opt(model.decoder, optimizer_config(config, config.lr));
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double rec_sum = 0.0;
        std::size_t rec_n = 0;
        const auto batches = make_batches(train.rows(), config.batch_size, setup.shuffle);
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const Matrix x = take_rows(train.features, batches[b]);
            auto enc = forward(model.encoder, x);
            auto dec = forward(model.decoder, enc.output);
            auto rec = mse_loss(dec.output, x);
            check_finite(rec.value, "reconstruction", epoch, b);
            auto dec_grads = backward(model.decoder, dec.tape, rec.grad);
            enc_opt.step(model.encoder, backward(model.encoder, enc.tape, dec_grads.input));
            dec_opt.step(model.decoder, dec_grads);
            rec_sum += rec.value;
            ++rec_n;
        }
        model.final_losses.reconstruction = rec_n ? rec_sum / static_cast<double>(rec_n) : 0.0;
    }
    finish(model, train, test);
    return model;
}

TrainedModel train_model(const TrainConfig& config, const Dataset& train, const Dataset& test) {
    switch (config.method) {
        case Method::awgn:
            return train_awgn(config, train, test);
        case Method::adv_ce:
        case Method::adv_l1:
            return train_adversarial(config, train, test);
        case Method::plain:
            return train_plain(config, train, test);
    }
    throw ArgumentError("train: unknown method");
}

Dataset encode_fresh(const TrainedModel& model, const Dataset& ds, bool with_noise, std::uint64_t seed) {
    if (ds.cols() != model.encoder.input_dim()) {
        throw SchemaError("encode_fresh: dataset has " + std::to_string(ds.cols()) + " features, encoder expects " +
                          std::to_string(model.encoder.input_dim()));
    }
    Dataset out;
    out.features = predict(model.encoder, ds.features);
    if (with_noise) {
        Rng rng(seed);
        for (Eigen::Index i = 0; i < out.features.size(); ++i) out.features.data()[i] += model.config.sigma * rng.normal();
    }
    out.sensitive = ds.sensitive;
    out.task_label = ds.task_label;
    for (Eigen::Index j = 0; j < out.features.cols(); ++j) out.column_names.push_back("z" + std::to_string(j));
    return out;
}

CertificateReport certify(const TrainedModel& model, const Dataset& ds, const std::string& split_tag) {
    CertificateOptions opt;
    opt.split_tag = split_tag;
    opt.ber.noisy_queries = model.config.method == Method::awgn;
    opt.ber.seed = derive_seed(model.config.seed, kAudit);
    const Matrix z = predict(model.encoder, ds.features);
    opt.t_inf = max_row_norm(z);
    return empirical_certificate(z, ds.sensitive, model.config.sigma, opt);
}

nlohmann::json model_report(const TrainedModel& model) {
    nlohmann::json j{{"method", to_string(model.config.method)},
                     {"final_losses", {{"reconstruction", model.final_losses.reconstruction},
                                       {"fairness", model.final_losses.fairness}}},
                     {"train_certificate", to_json(model.train_certificate)},
                     {"test_certificate", to_json(model.test_certificate)},
                     {"skipped_batches", model.skipped_batches}};
    j["adversary_delta"] = model.adversary_delta ? nlohmann::json(*model.adversary_delta) : nlohmann::json(nullptr);
    return j;
}

void save_model(const TrainedModel& model, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text_atomic(dir / "config.json", to_json(model.config).dump(2));
    write_text_atomic(dir / "encoder.json", network_to_json(model.encoder).dump());
    write_text_atomic(dir / "decoder.json", network_to_json(model.decoder).dump());
    if (model.adversary) write_text_atomic(dir / "adversary.json", network_to_json(*model.adversary).dump());
    write_text_atomic(dir / "report.json", model_report(model).dump(2));
}

TrainedModel load_model(const std::filesystem::path& dir) {
    auto parse = [&](const char* name) {
        try {
            return nlohmann::json::parse(read_text(dir / name));
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(std::string("model bundle: ") + name + ": " + e.what());
        }
    };
    TrainedModel m{network_from_json(parse("encoder.json")), network_from_json(parse("decoder.json")), std::nullopt,
                   train_config_from_json(parse("config.json")), {}, {}, {}, std::nullopt, 0};
    if (std::filesystem::exists(dir / "adversary.json")) m.adversary = network_from_json(parse("adversary.json"));
    if (std::filesystem::exists(dir / "report.json")) {
        const auto r = parse("report.json");
        try {
            m.final_losses.reconstruction = r.at("final_losses").at("reconstruction").get<double>();
            m.final_losses.fairness = r.at("final_losses").at("fairness").get<double>();
            m.train_certificate = certificate_from_json(r.at("train_certificate"));
            m.test_certificate = certificate_from_json(r.at("test_certificate"));
            m.skipped_batches = r.at("skipped_batches").get<std::size_t>();
            if (!r.at("adversary_delta").is_null()) m.adversary_delta = r["adversary_delta"].get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError(std::string("model bundle: report.json: ") + e.what());
        }
    }
    if (m.encoder.output_dim() != m.decoder.input_dim()) throw SchemaError("model bundle: encoder/decoder widths disagree");
    return m;
}

}  // namespace smoothfair
