#include "smoothfair/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "smoothfair/errors.hpp"
#include "smoothfair/numkit/rng.hpp"

namespace smoothfair {

namespace {

std::vector<std::size_t> largest_remainder(const std::vector<double>& fractions, std::size_t total) {
    std::vector<std::size_t> sizes(fractions.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < fractions.size(); ++k) {
        const double quota = fractions[k] * static_cast<double>(total);
        sizes[k] = static_cast<std::size_t>(std::floor(quota));
        assigned += sizes[k];
        remainders.emplace_back(quota - std::floor(quota), k);
    }
    std::stable_sort(remainders.begin(), remainders.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < total; ++r, ++assigned) ++sizes[remainders[r % remainders.size()].second];
    return sizes;
}

}  // namespace

SplitResult split(const Dataset& ds, const SplitSpec& spec) {
    if (spec.fractions.empty()) throw ArgumentError("split: no fractions");
    double sum = 0.0;
    for (double f : spec.fractions) {
        if (!(f > 0.0)) throw ArgumentError("split: fractions must be positive");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("split: fractions must sum to 1");
    const std::size_t n = ds.rows();
    const auto targets = largest_remainder(spec.fractions, n);
    for (auto t : targets) {
        if (t == 0) throw ArgumentError("split: a part would be empty");
    }

    // Group 0 rows (shuffled) followed by group 1 rows (shuffled); each row goes
    // to the part furthest behind its running quota. Contiguous group blocks
    // are therefore spread proportionally over the parts.
    Rng rng(spec.seed);
    std::vector<std::size_t> order;
    for (std::uint8_t g = 0; g <= 1; ++g) {
        std::vector<std::size_t> block;
        for (std::size_t i = 0; i < n; ++i) {
            if (ds.sensitive[i] == g) block.push_back(i);
        }
        rng.shuffle(block);
        order.insert(order.end(), block.begin(), block.end());
    }

    const std::size_t parts = targets.size();
    std::vector<std::vector<std::size_t>> assigned(parts);
    for (std::size_t step = 0; step < order.size(); ++step) {
        std::size_t best = parts;
        double best_deficit = -INFINITY;
        for (std::size_t k = 0; k < parts; ++k) {
            if (assigned[k].size() >= targets[k]) continue;
            const double deficit = static_cast<double>(targets[k]) * static_cast<double>(step + 1) / static_cast<double>(n) -
                                   static_cast<double>(assigned[k].size());
            if (deficit > best_deficit) {
                best_deficit = deficit;
                best = k;
            }
        }
        assigned[best].push_back(order[step]);
    }

    SplitResult result;
    for (auto& rows : assigned) {
        std::sort(rows.begin(), rows.end());
        result.parts.push_back(subset(ds, rows));
        result.row_indices.push_back(std::move(rows));
    }
    return result;
}

nlohmann::json split_manifest(const SplitSpec& spec, const SplitResult& result) {
    return nlohmann::json{{"seed", spec.seed}, {"fractions", spec.fractions}, {"row_indices", result.row_indices}};
}

}  // namespace smoothfair
