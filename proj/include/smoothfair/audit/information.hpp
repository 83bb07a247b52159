#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "smoothfair/numkit/matrix.hpp"

namespace smoothfair {

/// Mutual information value with an explicit divergence flag.
struct Information {
    double value = 0.0;
    bool infinite = false;

    Information() = default;
    Information(double v) : value(v), infinite(v == std::numeric_limits<double>::infinity()) {}
    static Information divergent() {
        Information i;
        i.value = std::numeric_limits<double>::infinity();
        i.infinite = true;
        return i;
    }
};

/// Sparse joint law over (x, z) index pairs. Zero cells are not stored.
class DiscreteJoint {
public:
    struct Entry {
        std::size_t x;
        std::size_t z;
        double p;
    };

    /// Duplicated cells are merged; probabilities must be nonnegative and sum to 1 within 1e-12.
    static DiscreteJoint from_entries(std::size_t nx, std::size_t nz, std::vector<Entry> entries);
    static DiscreteJoint from_dense(const Matrix& p);
    /// Empirical joint of observed (x, z) pairs.
    static DiscreteJoint from_samples(std::span<const std::pair<std::size_t, std::size_t>> samples);

    std::size_t nx() const { return px_.size(); }
    std::size_t nz() const { return pz_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }
    const std::vector<double>& px() const { return px_; }
    const std::vector<double>& pz() const { return pz_; }

private:
    std::vector<Entry> entries_;
    std::vector<double> px_;
    std::vector<double> pz_;
};

/// sum_x p(x) sum_z p(z) (p(z|x)/p(z) - 1)^2.
Information chi2_mi_discrete(const DiscreteJoint& joint);
/// sum p(x,z) ln(p(x,z) / (p(x) p(z))), natural log.
double shannon_mi_discrete(const DiscreteJoint& joint);

/// Uniform X over K atoms mapped injectively by z = perm[x].
DiscreteJoint injective_joint(std::span<const std::size_t> perm);
/// Staircase representation truncated at K: X's interval [1/(i+1), 1/i)
/// maps to atom i, and [0, 1/K) to atom K.
DiscreteJoint staircase_joint(std::size_t truncation);

}  // namespace smoothfair
