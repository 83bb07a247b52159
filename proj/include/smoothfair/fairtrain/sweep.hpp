#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smoothfair/data/dataset.hpp"
#include "smoothfair/fairtrain/config.hpp"
#include "smoothfair/fairtrain/probe.hpp"

namespace smoothfair {

struct SweepRow {
    std::string method;
    double lambda = 0.0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::string probe_arch;
    double delta = 0.0;
    double accuracy = 0.0;
    double certificate_train = 0.0;
    double certificate_test = 0.0;
};

struct SweepOptions {
    /// One base config per method; lambda and seed are set per cell.
    std::vector<TrainConfig> methods;
    std::vector<double> lambda_grid;
    std::vector<ProbeSpec> probes;
    std::size_t repeats = 1;
    ProbeTarget target = ProbeTarget::task_label;
    /// Probes read the decoder's hidden features instead of raw representations.
    bool decoder_prefix = false;
    std::uint64_t master_seed = 0;
    std::size_t jobs = 1;
};

/// Trains every (method, lambda, repeat) cell, encodes the test set afresh
/// (with channel noise for awgn) and trains each probe on it. Rows come back
/// in cell order regardless of the number of jobs.
std::vector<SweepRow> pareto_sweep(const SweepOptions& options, const Dataset& train, const Dataset& test);

struct BinSummary {
    std::size_t bin = 0;
    double lo = 0.0;
    double hi = 0.0;
    std::string method;
    std::size_t count = 0;
    double q75_accuracy = 0.0;
};

/// Equal-width bins over the pooled delta range; 75%-quantile accuracy per (bin, method).
std::vector<BinSummary> bin_summary(const std::vector<SweepRow>& rows, std::size_t bins = 10);

/// Linear-interpolation quantile (type 7).
double quantile(std::vector<double> values, double q);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string bin_summary_csv(const std::vector<BinSummary>& bins);

struct SigmaDiagnostic {
    double sigma = 0.0;
    double delta_train = 0.0;
    double delta_test = 0.0;
    double gap = 0.0;
};

struct SigmaSelection {
    double sigma = 0.0;
    bool within_tolerance = false;
    std::vector<SigmaDiagnostic> diagnostics;
};

/// Smallest sigma whose train and test certificates differ by at most
/// `tolerance`; the gap-minimizing sigma when none does.
SigmaSelection select_sigma(const TrainConfig& config, const Dataset& train, const Dataset& test,
                            const std::vector<double>& sigma_grid, double tolerance = 0.02);

}  // namespace smoothfair
