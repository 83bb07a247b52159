#include "smoothfair/fairtrain/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "smoothfair/data/csv.hpp"
#include "smoothfair/errors.hpp"
#include "smoothfair/fairtrain/trainer.hpp"
#include "smoothfair/numkit/rng.hpp"

namespace smoothfair {

namespace {

struct Cell {
    std::size_t method;
    double lambda;
    std::size_t repeat;
};

std::vector<SweepRow> run_cell(const SweepOptions& o, const Cell& cell, std::uint64_t cell_id, const Dataset& train,
                               const Dataset& test) {
    TrainConfig cfg = o.methods[cell.method];
    cfg.lambda = cell.lambda;
    cfg.seed = derive_seed(o.master_seed, cell_id);
    const auto model = train_model(cfg, train, test);
    const bool noisy = cfg.method == Method::awgn;
    const auto reps = encode_fresh(model, test, noisy, derive_seed(cfg.seed, 101));
    std::vector<SweepRow> rows;
    for (std::size_t p = 0; p < o.probes.size(); ++p) {
        ProbeSpec spec = o.probes[p];
        spec.seed = derive_seed(cfg.seed, 200 + p);
        const auto prefix = o.decoder_prefix ? std::optional<NetworkParams>(decoder_features(model.decoder)) : std::nullopt;
        const auto r = train_probe(reps, o.target, spec, prefix);
        rows.push_back({to_string(cfg.method), cfg.lambda, cfg.sigma, cfg.seed, spec.name(), r.measured_delta, r.accuracy,
                        model.train_certificate.delta_n, model.test_certificate.delta_n});
    }
    return rows;
}

}  // namespace

std::vector<SweepRow> pareto_sweep(const SweepOptions& o, const Dataset& train, const Dataset& test) {
    if (o.methods.empty() || o.lambda_grid.empty() || o.probes.empty() || o.repeats == 0) {
        throw ArgumentError("pareto_sweep: methods, lambda grid, probes and repeats must be nonempty");
    }
    if (o.target == ProbeTarget::task_label && !test.task_label) throw ArgumentError("pareto_sweep: dataset has no task label");
    std::vector<Cell> cells;
    for (std::size_t m = 0; m < o.methods.size(); ++m) {
        for (double lambda : o.lambda_grid) {
            for (std::size_t r = 0; r < o.repeats; ++r) cells.push_back({m, lambda, r});
        }
    }
    std::vector<std::vector<SweepRow>> results(cells.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                results[i] = run_cell(o, cells[i], i, train, test);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = cells.size();
            }
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(o.jobs, cells.size()));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<SweepRow> rows;
    for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
    return rows;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ArgumentError("quantile: no values");
    if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("quantile: q must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<BinSummary> bin_summary(const std::vector<SweepRow>& rows, std::size_t bins) {
    if (bins == 0) throw ArgumentError("bin_summary: need at least one bin");
    if (rows.empty()) return {};
    double lo = rows.front().delta;
    double hi = lo;
    for (const auto& r : rows) {
        lo = std::min(lo, r.delta);
        hi = std::max(hi, r.delta);
    }
    const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
    std::map<std::pair<std::size_t, std::string>, std::vector<double>> groups;
    for (const auto& r : rows) {
        auto b = static_cast<std::size_t>((r.delta - lo) / width);
        b = std::min(b, bins - 1);
        groups[{b, r.method}].push_back(r.accuracy);
    }
    std::vector<BinSummary> out;
    for (const auto& [key, acc] : groups) {
        const double b_lo = lo + width * static_cast<double>(key.first);
        out.push_back({key.first, b_lo, b_lo + width, key.second, acc.size(), quantile(acc, 0.75)});
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "method,lambda,sigma,seed,probe_arch,delta,accuracy,certificate_train,certificate_test\n";
    for (const auto& r : rows) {
        out += format_csv_row({r.method, format_double(r.lambda), format_double(r.sigma), std::to_string(r.seed), r.probe_arch,
                               format_double(r.delta), format_double(r.accuracy), format_double(r.certificate_train),
                               format_double(r.certificate_test)});
        out += '\n';
    }
    return out;
}

std::string bin_summary_csv(const std::vector<BinSummary>& bins) {
    std::string out = "bin,delta_lo,delta_hi,method,count,q75_accuracy\n";
    for (const auto& b : bins) {
        out += format_csv_row({std::to_string(b.bin), format_double(b.lo), format_double(b.hi), b.method,
                               std::to_string(b.count), format_double(b.q75_accuracy)});
        out += '\n';
    }
    return out;
}

SigmaSelection select_sigma(const TrainConfig& config, const Dataset& train, const Dataset& test,
                            const std::vector<double>& sigma_grid, double tolerance) {
    if (sigma_grid.empty()) throw ArgumentError("select_sigma: empty grid");
    for (std::size_t i = 0; i < sigma_grid.size(); ++i) {
        if (!(sigma_grid[i] > 0.0)) throw ArgumentError("select_sigma: sigma values must be positive");
        if (i > 0 && !(sigma_grid[i] > sigma_grid[i - 1])) throw ArgumentError("select_sigma: grid must be ascending");
    }
    SigmaSelection sel;
    for (double sigma : sigma_grid) {
        TrainConfig cfg = config;
        cfg.sigma = sigma;
        const auto model = train_model(cfg, train, test);
        const double a = model.train_certificate.delta_n;
        const double b = model.test_certificate.delta_n;
        sel.diagnostics.push_back({sigma, a, b, std::abs(a - b)});
    }
    for (const auto& d : sel.diagnostics) {
        if (d.gap <= tolerance) {
            sel.sigma = d.sigma;
            sel.within_tolerance = true;
            return sel;
        }
    }
    const auto best = std::min_element(sel.diagnostics.begin(), sel.diagnostics.end(),
                                       [](const SigmaDiagnostic& a, const SigmaDiagnostic& b) { return a.gap < b.gap; });
    sel.sigma = best->sigma;
    return sel;
}

}  // namespace smoothfair
