#pragma once

#include <cstddef>

#include "smoothfair/audit/information.hpp"
#include "smoothfair/data/dataset.hpp"
#include "smoothfair/numkit/network.hpp"

namespace smoothfair {

/// (1 - 1/I)^n; 1 when I is infinite. Requires I >= 1.
double thm1_lower_bound(std::size_t n, Information mi);

/// Largest chi-square information compatible with a failure gap eps after n samples: 1/(1 - eps^(1/n)).
double cor_rates_mi_cap(double eps, std::size_t n);

/// 2 (sqrt(I0/n0) + sqrt(I1/n1)).
double thm2_rate_bound(std::size_t n0, std::size_t n1, double mi0, double mi1);

/// exp(t^2 / sigma^2).
double thm3_mi_cap(double t_inf, double sigma);
/// 2 exp(t^2 / (2 sigma^2)) (n0^-1/2 + n1^-1/2).
double thm3_rate_bound(double t_inf, double sigma, std::size_t n0, std::size_t n1);

/// (8 t^2 + 4 sigma^2) / (sigma^2 n m).
double mc_mse_bound(double t_inf, double sigma, std::size_t n, std::size_t m);

/// max_i ||t(x_i)||_2 over the rows of ds.
double empirical_tinf(const NetworkParams& encoder, const Dataset& ds);
double max_row_norm(const Matrix& z);

}  // namespace smoothfair
