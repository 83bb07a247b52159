#include "smoothfair/density/mixture.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "smoothfair/errors.hpp"

namespace smoothfair {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double squared_distance(const Matrix& c, Eigen::Index row, const RowVector& z) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        const double d = c(row, j) - z(j);
        s += d * d;
    }
    return s;
}

Matrix checked_centers(Matrix m, std::size_t dim, const char* what) {
    if (m.rows() > 0 && static_cast<std::size_t>(m.cols()) != dim) throw ShapeError(std::string(what) + ": dimension mismatch");
    if (!m.allFinite()) throw ArgumentError(std::string(what) + ": centers must be finite");
    m.resize(m.rows(), static_cast<Eigen::Index>(dim));
    return m;
}

}  // namespace

double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

MixtureDensityModel::MixtureDensityModel(Matrix centers0, Matrix centers1, double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ArgumentError("mixture: sigma must be positive");
    if (centers0.rows() == 0 && centers1.rows() == 0) throw ArgumentError("mixture: no centers");
    dim_ = static_cast<std::size_t>(centers0.rows() > 0 ? centers0.cols() : centers1.cols());
    if (dim_ == 0) throw ShapeError("mixture: zero-dimensional centers");
    centers_[0] = checked_centers(std::move(centers0), dim_, "mixture group 0");
    centers_[1] = checked_centers(std::move(centers1), dim_, "mixture group 1");
}

std::size_t MixtureDensityModel::count(int group) const {
    if (group != 0 && group != 1) throw ArgumentError("mixture: group must be 0 or 1");
    return static_cast<std::size_t>(centers_[group].rows());
}

const Matrix& MixtureDensityModel::centers(int group) const {
    if (group != 0 && group != 1) throw ArgumentError("mixture: group must be 0 or 1");
    return centers_[group];
}

void MixtureDensityModel::check_query(const RowVector& z, int group) const {
    if (static_cast<std::size_t>(z.size()) != dim_) {
        throw ShapeError("mixture: query has dimension " + std::to_string(z.size()) + ", model has " + std::to_string(dim_));
    }
    if (count(group) == 0) throw StateError("mixture: group " + std::to_string(group) + " has no centers");
}

double MixtureDensityModel::log_density(const RowVector& z, int group) const {
    return log_density_excluding(z, group, std::nullopt);
}

double MixtureDensityModel::log_density_excluding(const RowVector& z, int group, std::optional<std::size_t> skip) const {
    check_query(z, group);
    const Matrix& c = centers_[group];
    const auto n = static_cast<std::size_t>(c.rows());
    if (skip && *skip >= n) throw ArgumentError("mixture: excluded component out of range");
    const std::size_t used = skip ? n - 1 : n;
    if (used == 0) throw ArgumentError("mixture: excluding the only component of a group");

    const double inv = 1.0 / (2.0 * sigma_ * sigma_);
    double max_exp = kNegInf;
    for (std::size_t i = 0; i < n; ++i) {
        if (skip && i == *skip) continue;
        max_exp = std::max(max_exp, -squared_distance(c, static_cast<Eigen::Index>(i), z) * inv);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (skip && i == *skip) continue;
        acc += std::exp(-squared_distance(c, static_cast<Eigen::Index>(i), z) * inv - max_exp);
    }
    const double log_norm = 0.5 * static_cast<double>(dim_) * std::log(2.0 * std::numbers::pi * sigma_ * sigma_);
    return max_exp + std::log(acc) - std::log(static_cast<double>(used)) - log_norm;
}

double MixtureDensityModel::log_density_and_gradient(const RowVector& z, int group, RowVector& grad) const {
    check_query(z, group);
    const Matrix& c = centers_[group];
    const auto n = c.rows();
    const double inv = 1.0 / (2.0 * sigma_ * sigma_);
    Vector e(n);
    for (Eigen::Index i = 0; i < n; ++i) e(i) = -squared_distance(c, i, z) * inv;
    const double max_exp = e.maxCoeff();
    Vector w = (e.array() - max_exp).exp();
    const double total = w.sum();
    w /= total;
    grad = (w.transpose() * c - z) / (sigma_ * sigma_);
    const double log_norm = 0.5 * static_cast<double>(dim_) * std::log(2.0 * std::numbers::pi * sigma_ * sigma_);
    return max_exp + std::log(total) - std::log(static_cast<double>(n)) - log_norm;
}

Vector MixtureDensityModel::log_density_batch(const Matrix& z, int group) const {
    Vector out(z.rows());
    for (Eigen::Index r = 0; r < z.rows(); ++r) out(r) = log_density(RowVector(z.row(r)), group);
    return out;
}

Posterior MixtureDensityModel::posterior(const RowVector& z) const {
    if (degenerate()) throw StateError("mixture: posterior needs centers in both groups");
    const double l0 = log_density(z, 0);
    const double l1 = log_density(z, 1);
    const double diff = l1 - l0;
    Posterior p;
    if (diff >= 0.0) {
        const double e = std::exp(-diff);
        p.eta1 = 1.0 / (1.0 + e);
        p.eta0 = e / (1.0 + e);
    } else {
        const double e = std::exp(diff);
        p.eta0 = 1.0 / (1.0 + e);
        p.eta1 = e / (1.0 + e);
    }
    return p;
}

nlohmann::json MixtureDensityModel::to_json() const {
    nlohmann::json j;
    j["sigma"] = sigma_;
    j["d"] = dim_;
    auto rows = [](const Matrix& m) {
        nlohmann::json a = nlohmann::json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
        return a;
    };
    j["centers"] = {rows(centers_[0]), rows(centers_[1])};
    return j;
}

MixtureDensityModel MixtureDensityModel::from_json(const nlohmann::json& j) {
    try {
        const double sigma = j.at("sigma").get<double>();
        const auto d = j.at("d").get<std::size_t>();
        const auto& groups = j.at("centers");
        if (!groups.is_array() || groups.size() != 2) throw SchemaError("mixture json: 'centers' must hold two groups");
        std::array<Matrix, 2> c;
        for (int g = 0; g < 2; ++g) {
            const auto& rows = groups[static_cast<std::size_t>(g)];
            c[g].resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const auto v = rows[r].get<std::vector<double>>();
                if (v.size() != d) throw SchemaError("mixture json: center width does not match d");
                for (std::size_t k = 0; k < d; ++k) c[g](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = v[k];
            }
        }
        return MixtureDensityModel(std::move(c[0]), std::move(c[1]), sigma);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("mixture json: ") + e.what());
    }
}

MixtureDensityModel fit_mixture(const Matrix& centers, const Labels& groups, double sigma) {
    if (centers.rows() == 0) throw ArgumentError("fit_mixture: empty centers");
    if (static_cast<std::size_t>(centers.rows()) != groups.size()) throw ShapeError("fit_mixture: one group code per center row");
    std::vector<std::size_t> idx[2];
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i] > 1) throw ArgumentError("fit_mixture: group codes must be 0 or 1");
        idx[groups[i]].push_back(i);
    }
    return MixtureDensityModel(take_rows(centers, idx[0]), take_rows(centers, idx[1]), sigma);
}

}  // namespace smoothfair
