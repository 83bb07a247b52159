#include "smoothfair/audit/bounds.hpp"

#include <cmath>

#include "smoothfair/errors.hpp"

namespace smoothfair {

namespace {

void require_sigma(double sigma, const char* what) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ArgumentError(std::string(what) + ": sigma must be positive");
}

void require_norm(double t, const char* what) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ArgumentError(std::string(what) + ": norm must be finite and nonnegative");
}

}  // namespace

double thm1_lower_bound(std::size_t n, Information mi) {
    if (mi.infinite) return 1.0;
    if (!(mi.value >= 1.0)) throw ArgumentError("thm1_lower_bound: information must be >= 1");
    return std::pow(1.0 - 1.0 / mi.value, static_cast<double>(n));
}

double cor_rates_mi_cap(double eps, std::size_t n) {
    if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("cor_rates_mi_cap: eps must lie in (0, 1)");
    if (n == 0) throw ArgumentError("cor_rates_mi_cap: n must be >= 1");
    // 1 - eps^(1/n) computed without cancellation for large n.
    return -1.0 / std::expm1(std::log(eps) / static_cast<double>(n));
}

double thm2_rate_bound(std::size_t n0, std::size_t n1, double mi0, double mi1) {
    if (n0 == 0 || n1 == 0) throw ArgumentError("thm2_rate_bound: group sizes must be >= 1");
    if (!(mi0 >= 0.0) || !(mi1 >= 0.0)) throw ArgumentError("thm2_rate_bound: information must be nonnegative");
    return 2.0 * (std::sqrt(mi0 / static_cast<double>(n0)) + std::sqrt(mi1 / static_cast<double>(n1)));
}

double thm3_mi_cap(double t_inf, double sigma) {
    require_sigma(sigma, "thm3_mi_cap");
    require_norm(t_inf, "thm3_mi_cap");
    return std::exp(t_inf * t_inf / (sigma * sigma));
}

double thm3_rate_bound(double t_inf, double sigma, std::size_t n0, std::size_t n1) {
    require_sigma(sigma, "thm3_rate_bound");
    require_norm(t_inf, "thm3_rate_bound");
    if (n0 == 0 || n1 == 0) throw ArgumentError("thm3_rate_bound: group sizes must be >= 1");
    return 2.0 * std::exp(t_inf * t_inf / (2.0 * sigma * sigma)) *
           (1.0 / std::sqrt(static_cast<double>(n0)) + 1.0 / std::sqrt(static_cast<double>(n1)));
}

double mc_mse_bound(double t_inf, double sigma, std::size_t n, std::size_t m) {
    require_sigma(sigma, "mc_mse_bound");
    require_norm(t_inf, "mc_mse_bound");
    if (n == 0 || m == 0) throw ArgumentError("mc_mse_bound: n and m must be >= 1");
    return (8.0 * t_inf * t_inf + 4.0 * sigma * sigma) / (sigma * sigma * static_cast<double>(n) * static_cast<double>(m));
}

double max_row_norm(const Matrix& z) {
    if (z.rows() == 0) return 0.0;
    return z.rowwise().norm().maxCoeff();
}

double empirical_tinf(const NetworkParams& encoder, const Dataset& ds) {
    if (ds.cols() != encoder.input_dim()) throw ShapeError("empirical_tinf: dataset width does not match encoder input");
    return max_row_norm(predict(encoder, ds.features));
}

}  // namespace smoothfair
