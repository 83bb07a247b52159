#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include <json.hpp>

#include "smoothfair/numkit/matrix.hpp"

namespace smoothfair {

/// Balanced posterior: group-conditional densities weighted equally.
struct Posterior {
    double eta0 = 0.5;
    double eta1 = 0.5;
};

/// Per-group isotropic Gaussian mixture with weights 1/n_s over the centers
/// of that group and shared standard deviation sigma. Immutable after
/// construction; all queries are const and thread-safe.
class MixtureDensityModel {
public:
    MixtureDensityModel(Matrix centers0, Matrix centers1, double sigma);

    double sigma() const { return sigma_; }
    std::size_t dim() const { return dim_; }
    std::size_t count(int group) const;
    const Matrix& centers(int group) const;
    /// True when a group has no centers; posterior queries then throw.
    bool degenerate() const { return count(0) == 0 || count(1) == 0; }

    double log_density(const RowVector& z, int group) const;
    /// Same mixture with component `skip` of `group` removed (weights 1/(n_s - 1)).
    double log_density_excluding(const RowVector& z, int group, std::optional<std::size_t> skip) const;
    /// Gradient of log_density with respect to z:
    /// sum_i w_i(z) (c_i - z) / sigma^2 with w the component responsibilities.
    double log_density_and_gradient(const RowVector& z, int group, RowVector& grad) const;

    Vector log_density_batch(const Matrix& z, int group) const;
    Posterior posterior(const RowVector& z) const;

    nlohmann::json to_json() const;
    static MixtureDensityModel from_json(const nlohmann::json& j);

private:
    void check_query(const RowVector& z, int group) const;

    std::array<Matrix, 2> centers_;
    double sigma_;
    std::size_t dim_;
};

/// Partitions `centers` by `groups` (one code per row).
MixtureDensityModel fit_mixture(const Matrix& centers, const Labels& groups, double sigma);

/// Numerically stable log(exp(a) + exp(b)).
double log_add_exp(double a, double b);

}  // namespace smoothfair
