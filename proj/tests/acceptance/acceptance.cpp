// Acceptance run: one line per criterion, exit status 0 only when all pass.
//   acceptance            run everything
//   acceptance --only 8   run one criterion

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <numbers>
#include <string>
#include <vector>

#include "smoothfair/audit/auditor.hpp"
#include "smoothfair/audit/bounds.hpp"
#include "smoothfair/audit/information.hpp"
#include "smoothfair/data/csv.hpp"
#include "smoothfair/data/generators.hpp"
#include "smoothfair/data/split.hpp"
#include "smoothfair/density/mixture.hpp"
#include "smoothfair/fairtrain/dp_loss.hpp"
#include "smoothfair/fairtrain/probe.hpp"
#include "smoothfair/fairtrain/sweep.hpp"
#include "smoothfair/fairtrain/trainer.hpp"
#include "acceptance/roll_protocol.hpp"
#include "support/gradient_check.hpp"

using namespace smoothfair;
using roll::median;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// 1 -------------------------------------------------------------------------

Outcome injective_identity() {
    Rng rng(1);
    double worst = 0.0;
    for (std::size_t k = 1; k <= 50; ++k) {
        auto perm = rng.permutation(k);
        const auto mi = chi2_mi_discrete(injective_joint(perm));
        worst = std::max(worst, std::abs(mi.value - static_cast<double>(k - 1)));
        if (mi.infinite) return {false, "divergent at K=" + std::to_string(k)};
    }
    return {worst <= 1e-9, fmt("max |chi2 - (K-1)| = %.3g over K=1..50", worst)};
}

// 2 -------------------------------------------------------------------------

Outcome staircase_separation() {
    const double cap = std::log(2.0) / 2.0 + 2.0;
    std::vector<std::size_t> ks;
    for (std::size_t k = 1; k <= 2000; ++k) ks.push_back(k);
    for (std::size_t k = 2100; k <= 100000; k += 100) ks.push_back(k);
    double worst_chi = 0.0;
    double max_shannon = 0.0;
    for (auto k : ks) {
        const auto j = staircase_joint(k);
        worst_chi = std::max(worst_chi, std::abs(chi2_mi_discrete(j).value - static_cast<double>(k - 1)));
        max_shannon = std::max(max_shannon, shannon_mi_discrete(j));
    }
    return {worst_chi == 0.0 && max_shannon < cap,
            std::to_string(ks.size()) + " truncations up to 1e5: " +
                fmt("max shannon %.6f (cap %.4f), ", max_shannon, cap) + fmt("max |chi2 - (K-1)| = %.3g", worst_chi)};
}

// 3 -------------------------------------------------------------------------

Outcome atom_family_failure() {
    const std::size_t atoms = 10000;
    const std::size_t n = 100;
    const std::size_t eval_n = 20000;
    const double sigma = 1e-10;
    int small = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto b = BinaryFraction::random(derive_seed(seed, 1), atoms);
        const auto sample = generate_atom_family(atoms, b, n, derive_seed(seed, 2));
        if (!sample.has_both_groups()) return {false, "sample lacks a group"};
        // The plug-in rule is built from the n draws and its parity is measured
        // on fresh draws from the same law.
        const auto model = fit_mixture(sample.features, sample.sensitive, sigma);
        const auto fresh = generate_atom_family(atoms, b, eval_n, derive_seed(seed, 3));
        const double delta = std::max(0.0, 1.0 - 2.0 * heldout_ber(model, fresh.features, fresh.sensitive));
        worst = std::max(worst, delta);
        if (delta <= 0.1) ++small;

        // Population parity of the identity map: the groups have disjoint atoms.
        std::vector<int> owner(atoms + 1, -1);
        for (std::size_t i = 0; i < fresh.rows(); ++i) {
            const auto k = static_cast<std::size_t>(std::llround(1.0 / fresh.features(static_cast<Eigen::Index>(i), 0)));
            if (owner[k] >= 0 && owner[k] != fresh.sensitive[i]) return {false, "an atom carries both groups"};
            owner[k] = fresh.sensitive[i];
        }
    }
    return {small >= 19, std::to_string(small) + "/20 seeds with certificate <= 0.1 (max " + fmt("%.3f", worst) +
                             ") while disjoint supports give true delta 1"};
}

// 4 -------------------------------------------------------------------------

Outcome bound_calculators() {
    struct Case {
        const char* name;
        double got;
        double want;
    };
    const double e = std::numbers::e;
    const std::vector<Case> cases{
        {"thm1 n=1 I=2", thm1_lower_bound(1, Information(2.0)), 0.5},
        {"thm1 n=100 I=1e4+1", thm1_lower_bound(100, Information(10001.0)), std::pow(1.0 - 1.0 / 10001.0, 100.0)},
        {"thm1 I=1", thm1_lower_bound(5, Information(1.0)), 0.0},
        {"thm1 I=inf", thm1_lower_bound(5, Information::divergent()), 1.0},
        {"cor eps=0.5 n=1", cor_rates_mi_cap(0.5, 1), 2.0},
        {"cor eps=0.25 n=2", cor_rates_mi_cap(0.25, 2), 2.0},
        {"thm2", thm2_rate_bound(100, 400, 4.0, 16.0), 2.0 * (0.2 + 0.2)},
        {"thm3 cap t=1 s=1", thm3_mi_cap(1.0, 1.0), e},
        {"thm3 cap t=0", thm3_mi_cap(0.0, 0.5), 1.0},
        {"thm3 cap t=2 s=1", thm3_mi_cap(2.0, 1.0), std::exp(4.0)},
        {"thm3 rate", thm3_rate_bound(1.0, 1.0, 100, 100), 2.0 * std::sqrt(e) * 0.2},
        {"mc mse", mc_mse_bound(1.0, 1.0, 10, 2), 12.0 / 20.0},
        {"mc mse t=0", mc_mse_bound(0.0, 0.5, 4, 1), 1.0},
    };
    double worst = 0.0;
    std::string bad;
    for (const auto& c : cases) {
        const double err = std::abs(c.got - c.want);
        if (err > worst) worst = err;
        if (err > 1e-10) bad += std::string(" ") + c.name;
    }
    double inversion = 0.0;
    for (double eps : {0.01, 0.1, 0.5, 0.9}) {
        for (std::size_t n : {1, 10, 100, 1000}) {
            inversion = std::max(inversion, std::abs(thm1_lower_bound(n, Information(cor_rates_mi_cap(eps, n))) - eps));
        }
    }
    if (inversion > 1e-10) bad += " inversion";
    return {bad.empty(), fmt("max error %.3g, inversion error %.3g", worst, inversion) + (bad.empty() ? "" : "; failed:" + bad)};
}

// 5 -------------------------------------------------------------------------

// E|eta1 - eta0| at N(q, sigma^2) under the 1-D model, by Simpson quadrature.
double smoothed_gap(const MixtureDensityModel& model, double q, double sigma) {
    const int steps = 4000;
    const double lo = -9.0;
    const double h = 18.0 / steps;
    double s = 0.0;
    RowVector z(1);
    for (int k = 0; k <= steps; ++k) {
        const double e = lo + h * k;
        z(0) = q + sigma * e;
        const auto p = model.posterior(z);
        const double w = (k == 0 || k == steps) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        s += w * std::abs(p.eta1 - p.eta0) * std::exp(-0.5 * e * e);
    }
    return s * h / 3.0 / std::sqrt(2.0 * std::numbers::pi);
}

Outcome mc_rate() {
    const double sigma = 0.5;
    Matrix centers(4, 1);
    centers << -0.6, 0.1, 0.5, 1.2;
    const Labels center_groups{0, 0, 1, 1};
    Matrix c0(2, 1), c1(2, 1);
    c0 << -0.6, 0.1;
    c1 << 0.5, 1.2;
    const MixtureDensityModel model(c0, c1, sigma);

    Rng qrng(3);
    const std::size_t max_n = 256;
    Matrix queries(static_cast<Eigen::Index>(max_n), 1);
    Labels qgroups(max_n);
    for (std::size_t i = 0; i < max_n; ++i) {
        qgroups[i] = static_cast<std::uint8_t>(i % 2);
        queries(static_cast<Eigen::Index>(i), 0) = qrng.uniform(-1.0, 1.6);
    }
    std::vector<double> gaps(max_n);
    for (std::size_t i = 0; i < max_n; ++i) gaps[i] = smoothed_gap(model, queries(static_cast<Eigen::Index>(i), 0), sigma);
    double t_inf = 0.0;
    for (Eigen::Index i = 0; i < queries.rows(); ++i) t_inf = std::max(t_inf, std::abs(queries(i, 0)));
    t_inf = std::max(t_inf, centers.cwiseAbs().maxCoeff());

    const int reps = 400;
    std::vector<double> xs, ys;
    bool under_bound = true;
    double worst_ratio = 0.0;
    for (std::size_t n : {4, 16, 64, 256}) {
        for (std::size_t m : {1, 4, 16}) {
            const Matrix q = queries.topRows(static_cast<Eigen::Index>(n));
            const Labels g(qgroups.begin(), qgroups.begin() + static_cast<std::ptrdiff_t>(n));
            // Balanced target: half the mean gap of each group.
            double truth = 0.0;
            for (std::size_t i = 0; i < n; ++i) truth += gaps[i] / static_cast<double>(n / 2) * 0.5;
            double mse = 0.0;
            for (int r = 0; r < reps; ++r) {
                Rng rng(derive_seed(n * 1000 + m, static_cast<std::uint64_t>(r)));
                const double v = dp_loss_mc(centers, center_groups, q, g, sigma, m, rng).value;
                mse += (v - truth) * (v - truth);
            }
            mse /= reps;
            const double bound = mc_mse_bound(t_inf, sigma, n, m);
            worst_ratio = std::max(worst_ratio, mse / bound);
            if (mse > bound) under_bound = false;
            xs.push_back(std::log(static_cast<double>(n * m)));
            ys.push_back(std::log(mse));
        }
    }
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = sxy / sxx;
    return {std::abs(slope + 1.0) <= 0.15 && under_bound,
            fmt("slope %.3f, max MSE/bound %.3g", slope, worst_ratio)};
}

// 6 -------------------------------------------------------------------------

Outcome density_and_audit_oracles() {
    Rng rng(6);
    double worst_norm = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        Matrix c0(1 + static_cast<Eigen::Index>(rng.index(4)), 1), c1(1 + static_cast<Eigen::Index>(rng.index(4)), 1);
        for (Eigen::Index i = 0; i < c0.rows(); ++i) c0(i, 0) = rng.uniform(-3.0, 3.0);
        for (Eigen::Index i = 0; i < c1.rows(); ++i) c1(i, 0) = rng.uniform(-3.0, 3.0);
        const double sigma = rng.uniform(0.05, 1.5);
        MixtureDensityModel m(c0, c1, sigma);
        for (int g = 0; g < 2; ++g) {
            const double lo = -3.0 - 10.0 * sigma;
            const double hi = 3.0 + 10.0 * sigma;
            const int steps = 200000;
            const double h = (hi - lo) / steps;
            double s = 0.0;
            RowVector z(1);
            for (int k = 0; k <= steps; ++k) {
                z(0) = lo + h * k;
                const double w = (k == 0 || k == steps) ? 1.0 : (k % 2 ? 4.0 : 2.0);
                s += w * std::exp(m.log_density(z, g));
            }
            worst_norm = std::max(worst_norm, std::abs(s * h / 3.0 - 1.0));
        }
    }

    auto mass_above = [](const Matrix& c, double sigma, double theta) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < c.rows(); ++i) s += 1.0 - normal_cdf((theta - c(i, 0)) / sigma);
        return s / static_cast<double>(c.rows());
    };
    double worst_excess = -1.0;
    const int grid = 4000;
    double resolution = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t total = 2 + rng.index(2);
        const std::size_t k0 = 1 + rng.index(total - 1);
        Matrix c0(static_cast<Eigen::Index>(k0), 1), c1(static_cast<Eigen::Index>(total - k0), 1);
        for (Eigen::Index i = 0; i < c0.rows(); ++i) c0(i, 0) = rng.uniform(-2.0, 2.0);
        for (Eigen::Index i = 0; i < c1.rows(); ++i) c1(i, 0) = rng.uniform(-2.0, 2.0);
        const double sigma = rng.uniform(0.1, 1.0);
        MixtureDensityModel m(c0, c1, sigma);
        const double lo = -2.0 - 8.0 * sigma;
        const double hi = 2.0 + 8.0 * sigma;

        // Balanced error of the plug-in rule under the model, by midpoint rule.
        const int cells = 40000;
        const double h = (hi - lo) / cells;
        double plug = 0.0;
        RowVector z(1);
        for (int k = 0; k < cells; ++k) {
            z(0) = lo + (k + 0.5) * h;
            const int s = 1 - plugin_predict(m, z);
            plug += std::exp(m.log_density(z, s)) * h;
        }
        plug *= 0.5;

        double best = 1.0;
        for (int k = 0; k <= grid; ++k) {
            const double theta = lo + (hi - lo) * k / grid;
            const double up = 0.5 * (mass_above(c0, sigma, theta) + 1.0 - mass_above(c1, sigma, theta));
            best = std::min({best, up, 1.0 - up});
        }
        // A threshold step moves the error by at most step * max density.
        const double step = (hi - lo) / grid;
        const double res = step / (sigma * std::sqrt(2.0 * std::numbers::pi)) + 1e-6;
        resolution = std::max(resolution, res);
        worst_excess = std::max(worst_excess, (plug - best) / res);
    }
    return {worst_norm <= 1e-4 && worst_excess <= 1.0,
            fmt("normalization error %.3g; plug-in minus best threshold, in grid-resolution units, max %.3f", worst_norm,
                worst_excess)};
}

// 7 -------------------------------------------------------------------------

Outcome gradient_integrity() {
    Rng rng(7);
    double worst_net = 0.0;
    const Activation acts[] = {Activation::relu, Activation::sigmoid, Activation::identity};
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t depth = 1 + rng.index(3);
        std::vector<std::size_t> dims{1 + rng.index(6)};
        for (std::size_t l = 0; l < depth; ++l) dims.push_back(1 + rng.index(6));
        auto net = make_mlp(dims, acts[rng.index(3)], acts[rng.index(3)], rng);
        Matrix x(3, static_cast<Eigen::Index>(dims[0]));
        do {
            for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
        } while (testing::relu_margin(net, x) < 1e-3);
        Matrix proj(3, static_cast<Eigen::Index>(dims.back()));
        for (Eigen::Index i = 0; i < proj.size(); ++i) proj.data()[i] = rng.normal();
        worst_net = std::max(worst_net, testing::network_gradient_error(net, x, proj));
    }

    double worst_dp = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::vector<std::size_t> dims{3, 5, 2};
        auto enc = make_mlp(dims, Activation::relu, Activation::identity, rng);
        Matrix xa(10, 3), xb(8, 3);
        for (Eigen::Index i = 0; i < xa.size(); ++i) xa.data()[i] = rng.normal();
        for (Eigen::Index i = 0; i < xb.size(); ++i) xb.data()[i] = rng.normal();
        if (testing::relu_margin(enc, xb) < 1e-3) continue;
        Labels ga, gb;
        for (int i = 0; i < 10; ++i) ga.push_back(static_cast<std::uint8_t>(i % 2));
        for (int i = 0; i < 8; ++i) gb.push_back(static_cast<std::uint8_t>((i / 2) % 2));
        const double sigma = rng.uniform(0.3, 1.0);
        const std::uint64_t noise_seed = rng.next_u64();
        const Matrix za = predict(enc, xa);
        auto value_at = [&](const Matrix& x) {
            Rng r(noise_seed);
            return dp_loss_mc(za, ga, predict(enc, x), gb, sigma, 2, r).value;
        };
        auto fwd = forward(enc, xb);
        Rng r(noise_seed);
        const auto dp = dp_loss_mc(za, ga, fwd.output, gb, sigma, 2, r);
        worst_dp = std::max(worst_dp, testing::max_relative_error(dp.grad, testing::numeric_gradient(
                                                                                [&](const Matrix& q) {
                                                                                    Rng rr(noise_seed);
                                                                                    return dp_loss_mc(za, ga, q, gb, sigma, 2, rr).value;
                                                                                },
                                                                                fwd.output, 1e-6)));
        const auto g = backward(enc, fwd.tape, dp.grad);
        worst_dp = std::max(worst_dp, testing::max_relative_error(g.input, testing::numeric_gradient(value_at, xb, 1e-6)));
    }
    return {worst_net < 1e-4 && worst_dp < 1e-4,
            fmt("max relative error: networks %.3g, dp loss query path %.3g", worst_net, worst_dp)};
}

// 8 -------------------------------------------------------------------------

Outcome table_one() {
    std::map<Method, std::vector<double>> gaps;
    std::string detail;
    for (auto m : {Method::awgn, Method::adv_ce, Method::adv_l1}) {
        std::vector<double> aud, proc;
        for (std::uint64_t s = 0; s < roll::kSeeds; ++s) {
            const auto r = roll::run(roll::config(m, s), s);
            gaps[m].push_back(r.proc - r.aud);
            aud.push_back(r.aud);
            proc.push_back(r.proc);
        }
        detail += to_string(m) + fmt(" AUD %.3f PROC %.3f", median(aud), median(proc)) + fmt(" gap %.3f; ", median(gaps[m]));
    }
    const bool pass = median(gaps[Method::awgn]) <= 0.15 && median(gaps[Method::adv_ce]) >= 0.3 && median(gaps[Method::adv_l1]) >= 0.3;
    detail.resize(detail.size() - 2);
    return {pass, "medians over " + std::to_string(roll::kSeeds) + " seeds: " + detail};
}

// 9 -------------------------------------------------------------------------

Outcome noise_trend() {
    const std::vector<double> sigma_sq{0.001, 0.01, 0.1, 0.3};
    std::vector<double> medians;
    for (double s2 : sigma_sq) {
        std::vector<double> gaps;
        for (std::uint64_t s = 0; s < roll::kSeeds; ++s) {
            auto c = roll::config(Method::awgn, s);
            c.sigma = std::sqrt(s2);
            const auto r = roll::run(c, s);
            gaps.push_back(r.proc - r.certificate);
        }
        medians.push_back(median(gaps));
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < medians.size(); ++i) decreasing = decreasing && medians[i] <= medians[i - 1];
    std::string detail = "median probe minus certificate at sigma^2 = 0.001, 0.01, 0.1, 0.3:";
    for (double m : medians) detail += fmt(" %.3f", m);
    return {decreasing && medians.back() <= 0.1, detail};
}

// 10 ------------------------------------------------------------------------

Outcome pareto_direction() {
    const std::string raw = synthetic_income_csv(15000, 10);
    CsvOptions o;
    o.sensitive_column = "sex";
    o.label_column = "income";
    const auto table = parse_csv(raw, o);
    auto parts = split(table, {{2.0 / 3.0, 1.0 / 3.0}, 10});

    SweepOptions opt;
    for (auto m : {Method::awgn, Method::adv_ce, Method::adv_l1}) {
        TrainConfig c;
        c.method = m;
        c.epochs = 30;
        c.latent_dim = 10;
        if (m != Method::awgn) c.lr = 1e-4;
        opt.methods.push_back(c);
    }
    opt.lambda_grid = {0.0, 1.0, 2.0, 3.0, 4.0};
    // Four probes of depth 3 to 6, each keeping its best validation epoch.
    for (std::size_t depth = 3; depth <= 6; ++depth) {
        ProbeSpec p;
        p.epochs = 30;
        p.hidden.assign(depth, 32);
        p.validation = 0.2;
        opt.probes.push_back(p);
    }
    opt.repeats = 10;
    opt.target = ProbeTarget::task_label;
    opt.master_seed = 10;
    const auto rows = pareto_sweep(opt, parts.parts[0], parts.parts[1]);

    std::string detail;
    bool endpoints = true;
    for (auto m : {Method::awgn, Method::adv_ce, Method::adv_l1}) {
        std::vector<double> at0, at4;
        for (const auto& r : rows) {
            if (r.method != to_string(m)) continue;
            if (r.lambda == 0.0) at0.push_back(r.delta);
            if (r.lambda == 4.0) at4.push_back(r.delta);
        }
        const double d0 = median(at0);
        const double d4 = median(at4);
        endpoints = endpoints && d0 > d4;
        detail += to_string(m) + fmt(" delta %.3f -> %.3f; ", d0, d4);
    }

    const auto bins = bin_summary(rows, 10);
    std::size_t awgn_bin = SIZE_MAX;
    double awgn_acc = 0.0;
    for (const auto& b : bins) {
        if (b.method == "awgn" && b.bin < awgn_bin) {
            awgn_bin = b.bin;
            awgn_acc = b.q75_accuracy;
        }
    }
    bool dominated = awgn_bin == SIZE_MAX;
    std::string by;
    for (const auto& b : bins) {
        if (b.method != "awgn" && b.bin <= awgn_bin && b.q75_accuracy > awgn_acc) {
            dominated = true;
            by += "; " + b.method + " bin " + std::to_string(b.bin) + fmt(" accuracy %.3f", b.q75_accuracy);
        }
    }
    detail += "awgn lowest bin " + std::to_string(awgn_bin) + fmt(" with 75%% accuracy %.3f", awgn_acc) +
              (dominated ? " is dominated" + by : " is not dominated");
    return {endpoints && !dominated, detail};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    int only = 0;
    app.add_option("--only", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"injective chi-square identity", injective_identity},
        {"chi-square vs shannon on the staircase", staircase_separation},
        {"atom family certificate failure", atom_family_failure},
        {"bound calculators", bound_calculators},
        {"monte-carlo loss rate", mc_rate},
        {"density and audit oracles", density_and_audit_oracles},
        {"gradient integrity", gradient_integrity},
        {"swiss roll table", table_one},
        {"noise sweep trend", noise_trend},
        {"pareto direction", pareto_direction},
    };
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2zu %s: %s (%s) [%.1fs]\n", i + 1, r.pass ? "PASS" : "FAIL", criteria[i].first, r.detail.c_str(), secs);
        std::fflush(stdout);
        all = all && r.pass;
    }
    return all ? 0 : 1;
}
