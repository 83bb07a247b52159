#include "smoothfair/audit/auditor.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <ctime>

#include "smoothfair/audit/bounds.hpp"
#include "smoothfair/errors.hpp"
#include "smoothfair/numkit/rng.hpp"

namespace smoothfair {

namespace {

std::uint64_t row_hash(const Matrix& m, Eigen::Index row, std::uint8_t group) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        double v = m(row, j);
        if (v == 0.0) v = 0.0;  // fold -0 into +0
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        mix(bits);
    }
    mix(group);
    return h;
}

double balanced_error(const std::size_t wrong[2], const std::size_t total[2]) {
    return 0.5 * (static_cast<double>(wrong[0]) / static_cast<double>(total[0]) +
                  static_cast<double>(wrong[1]) / static_cast<double>(total[1]));
}

}  // namespace

int plugin_predict(const MixtureDensityModel& model, const RowVector& z) {
    if (model.degenerate()) throw StateError("plugin_predict: model needs both groups");
    return model.log_density(z, 0) >= model.log_density(z, 1) ? 0 : 1;
}

double loo_ber(const Matrix& centers, const Labels& groups, double sigma, const BerOptions& options) {
    auto model = fit_mixture(centers, groups, sigma);
    for (int g = 0; g < 2; ++g) {
        if (model.count(g) < 2) throw ArgumentError("loo_ber: each group needs at least 2 points for leave-one-out");
    }
    std::size_t wrong[2] = {0, 0};
    std::size_t total[2] = {0, 0};
    std::size_t position[2] = {0, 0};
    RowVector z(centers.cols());
    for (Eigen::Index i = 0; i < centers.rows(); ++i) {
        const int s = groups[static_cast<std::size_t>(i)];
        z = centers.row(i);
        if (options.noisy_queries) {
            Rng rng(derive_seed(options.seed, row_hash(centers, i, static_cast<std::uint8_t>(s))));
            for (Eigen::Index j = 0; j < z.size(); ++j) z(j) += rng.normal(0.0, sigma);
        }
        const std::size_t own = position[s]++;
        const double l_own = model.log_density_excluding(z, s, own);
        const double l_other = model.log_density(z, 1 - s);
        const double l0 = s == 0 ? l_own : l_other;
        const double l1 = s == 0 ? l_other : l_own;
        const int predicted = l0 >= l1 ? 0 : 1;
        ++total[s];
        if (predicted != s) ++wrong[s];
    }
    return balanced_error(wrong, total);
}

double heldout_ber(const MixtureDensityModel& model, const Matrix& eval_z, const Labels& eval_groups) {
    if (static_cast<std::size_t>(eval_z.rows()) != eval_groups.size()) throw ShapeError("heldout_ber: one group per row");
    std::size_t wrong[2] = {0, 0};
    std::size_t total[2] = {0, 0};
    for (Eigen::Index i = 0; i < eval_z.rows(); ++i) {
        const int s = eval_groups[static_cast<std::size_t>(i)];
        if (s > 1) throw ArgumentError("heldout_ber: group codes must be 0 or 1");
        ++total[s];
        if (plugin_predict(model, eval_z.row(i)) != s) ++wrong[s];
    }
    if (total[0] == 0 || total[1] == 0) throw ArgumentError("heldout_ber: evaluation sample needs both groups");
    return balanced_error(wrong, total);
}

std::string to_string(AuditMode mode) { return mode == AuditMode::leave_one_out ? "leave_one_out" : "held_out"; }

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

CertificateReport certificate_from_ber(double ber, std::size_t n0, std::size_t n1, double sigma,
                                       const CertificateOptions& options, AuditMode mode) {
    if (!(ber >= 0.0 && ber <= 1.0)) throw NumericError("certificate: ber outside [0, 1]");
    CertificateReport r;
    r.ber = ber;
    r.delta_n = std::max(0.0, 1.0 - 2.0 * ber);
    r.n0 = n0;
    r.n1 = n1;
    r.sigma = sigma;
    r.mode = mode;
    r.split_tag = options.split_tag;
    r.seed = options.ber.seed;
    r.timestamp = utc_timestamp();
    if (options.t_inf) {
        r.t_inf = options.t_inf;
        r.thm3_mi_bound = thm3_mi_cap(*options.t_inf, sigma);
        r.thm2_bound = thm3_rate_bound(*options.t_inf, sigma, n0, n1);
    }
    return r;
}

CertificateReport empirical_certificate(const Matrix& centers, const Labels& groups, double sigma,
                                        const CertificateOptions& options) {
    const double ber = loo_ber(centers, groups, sigma, options.ber);
    const auto n1 = static_cast<std::size_t>(std::count(groups.begin(), groups.end(), 1));
    return certificate_from_ber(ber, groups.size() - n1, n1, sigma, options, AuditMode::leave_one_out);
}

CertificateReport empirical_certificate(const MixtureDensityModel& model, const Matrix& eval_z, const Labels& eval_groups,
                                        const CertificateOptions& options) {
    const double ber = heldout_ber(model, eval_z, eval_groups);
    return certificate_from_ber(ber, model.count(0), model.count(1), model.sigma(), options, AuditMode::held_out);
}

nlohmann::json to_json(const CertificateReport& r) {
    nlohmann::json j{{"ber", r.ber},       {"delta_n", r.delta_n}, {"n0", r.n0},
                     {"n1", r.n1},         {"sigma", r.sigma},     {"mode", to_string(r.mode)},
                     {"split_tag", r.split_tag}, {"seed", r.seed}, {"timestamp", r.timestamp}};
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    j["t_inf"] = opt(r.t_inf);
    j["t_inf_is_empirical"] = r.t_inf.has_value();
    j["thm2_bound"] = opt(r.thm2_bound);
    j["thm3_mi_bound"] = opt(r.thm3_mi_bound);
    return j;
}

CertificateReport certificate_from_json(const nlohmann::json& j) {
    try {
        CertificateReport r;
        r.ber = j.at("ber").get<double>();
        r.delta_n = j.at("delta_n").get<double>();
        r.n0 = j.at("n0").get<std::size_t>();
        r.n1 = j.at("n1").get<std::size_t>();
        r.sigma = j.at("sigma").get<double>();
        const auto mode = j.at("mode").get<std::string>();
        if (mode != "leave_one_out" && mode != "held_out") throw SchemaError("certificate json: unknown mode '" + mode + "'");
        r.mode = mode == "held_out" ? AuditMode::held_out : AuditMode::leave_one_out;
        r.split_tag = j.at("split_tag").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.timestamp = j.at("timestamp").get<std::string>();
        auto opt = [&](const char* key) -> std::optional<double> {
            if (!j.contains(key) || j[key].is_null()) return std::nullopt;
            return j[key].get<double>();
        };
        r.t_inf = opt("t_inf");
        r.thm2_bound = opt("thm2_bound");
        r.thm3_mi_bound = opt("thm3_mi_bound");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("certificate json: ") + e.what());
    }
}

}  // namespace smoothfair
