#include "smoothfair/audit/information.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "smoothfair/data/generators.hpp"
#include "smoothfair/errors.hpp"

namespace smoothfair {

namespace {

// Neumaier compensated summation.
class Accumulator {
public:
    void add(double v) {
        const double t = sum_ + v;
        comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace

DiscreteJoint DiscreteJoint::from_entries(std::size_t nx, std::size_t nz, std::vector<Entry> entries) {
    if (nx == 0 || nz == 0) throw ArgumentError("joint: empty support");
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.x != b.x ? a.x < b.x : a.z < b.z; });
    DiscreteJoint j;
    Accumulator total;
    for (const auto& e : entries) {
        if (e.x >= nx || e.z >= nz) throw ArgumentError("joint: cell index out of range");
        if (!(e.p >= 0.0) || !std::isfinite(e.p)) throw ArgumentError("joint: probabilities must be finite and nonnegative");
        total.add(e.p);
        if (e.p == 0.0) continue;
        if (!j.entries_.empty() && j.entries_.back().x == e.x && j.entries_.back().z == e.z) {
            j.entries_.back().p += e.p;
        } else {
            j.entries_.push_back(e);
        }
    }
    if (std::abs(total.value() - 1.0) > 1e-12) throw ArgumentError("joint: probabilities must sum to 1");
    std::vector<Accumulator> ax(nx), az(nz);
    for (const auto& e : j.entries_) {
        ax[e.x].add(e.p);
        az[e.z].add(e.p);
    }
    j.px_.resize(nx);
    j.pz_.resize(nz);
    for (std::size_t i = 0; i < nx; ++i) j.px_[i] = ax[i].value();
    for (std::size_t i = 0; i < nz; ++i) j.pz_[i] = az[i].value();
    return j;
}

DiscreteJoint DiscreteJoint::from_dense(const Matrix& p) {
    std::vector<Entry> entries;
    for (Eigen::Index x = 0; x < p.rows(); ++x) {
        for (Eigen::Index z = 0; z < p.cols(); ++z) {
            entries.push_back({static_cast<std::size_t>(x), static_cast<std::size_t>(z), p(x, z)});
        }
    }
    return from_entries(static_cast<std::size_t>(p.rows()), static_cast<std::size_t>(p.cols()), std::move(entries));
}

DiscreteJoint DiscreteJoint::from_samples(std::span<const std::pair<std::size_t, std::size_t>> samples) {
    if (samples.empty()) throw ArgumentError("joint: no samples");
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> counts;
    std::size_t nx = 0;
    std::size_t nz = 0;
    for (const auto& s : samples) {
        ++counts[s];
        nx = std::max(nx, s.first + 1);
        nz = std::max(nz, s.second + 1);
    }
    std::vector<Entry> entries;
    const auto n = static_cast<double>(samples.size());
    for (const auto& [cell, c] : counts) entries.push_back({cell.first, cell.second, static_cast<double>(c) / n});
    return from_entries(nx, nz, std::move(entries));
}

Information chi2_mi_discrete(const DiscreteJoint& joint) {
    // sum_x p(x) sum_z p(z) (p(z|x)/p(z) - 1)^2 = sum_{x,z} p(x,z)^2 / (p(x) p(z)) - 1
    Accumulator acc;
    for (const auto& e : joint.entries()) {
        const double r = (e.p / joint.px()[e.x]) * (e.p / joint.pz()[e.z]);
        if (!std::isfinite(r)) return Information::divergent();
        acc.add(r);
    }
    return Information(std::max(0.0, acc.value() - 1.0));
}

double shannon_mi_discrete(const DiscreteJoint& joint) {
    Accumulator acc;
    for (const auto& e : joint.entries()) {
        acc.add(e.p * (std::log(e.p) - std::log(joint.px()[e.x]) - std::log(joint.pz()[e.z])));
    }
    return std::max(0.0, acc.value());
}

DiscreteJoint injective_joint(std::span<const std::size_t> perm) {
    const std::size_t k = perm.size();
    if (k == 0) throw ArgumentError("injective_joint: need K >= 1");
    std::vector<bool> seen(k, false);
    std::vector<DiscreteJoint::Entry> entries;
    for (std::size_t x = 0; x < k; ++x) {
        if (perm[x] >= k || seen[perm[x]]) throw ArgumentError("injective_joint: mapping is not a permutation");
        seen[perm[x]] = true;
        entries.push_back({x, perm[x], 1.0 / static_cast<double>(k)});
    }
    return DiscreteJoint::from_entries(k, k, std::move(entries));
}

DiscreteJoint staircase_joint(std::size_t truncation) {
    std::vector<DiscreteJoint::Entry> entries;
    entries.reserve(truncation);
    for (std::size_t i = 1; i <= truncation; ++i) entries.push_back({i - 1, i - 1, staircase_mass(i, truncation)});
    return DiscreteJoint::from_entries(truncation, truncation, std::move(entries));
}

}  // namespace smoothfair
