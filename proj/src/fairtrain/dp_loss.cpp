#include "smoothfair/fairtrain/dp_loss.hpp"

#include <cmath>

#include "smoothfair/density/mixture.hpp"
#include "smoothfair/errors.hpp"

namespace smoothfair {

DpLossResult dp_loss_mc(const Matrix& centers_a, const Labels& groups_a, const Matrix& queries_b, const Labels& groups_b,
                        double sigma, std::size_t m, Rng& rng) {
    if (!(sigma > 0.0)) throw ArgumentError("dp_loss_mc: sigma must be positive");
    if (m < 1) throw ArgumentError("dp_loss_mc: m must be >= 1");
    if (static_cast<std::size_t>(queries_b.rows()) != groups_b.size()) throw ShapeError("dp_loss_mc: one group per query row");
    if (centers_a.cols() != queries_b.cols()) throw ShapeError("dp_loss_mc: halves have different widths");

    DpLossResult out;
    out.grad = Matrix::Zero(queries_b.rows(), queries_b.cols());
    std::size_t count_b[2] = {0, 0};
    for (auto g : groups_b) ++count_b[g];
    std::size_t count_a[2] = {0, 0};
    for (auto g : groups_a) ++count_a[g];
    if (count_a[0] == 0 || count_a[1] == 0 || count_b[0] == 0 || count_b[1] == 0) {
        out.skipped = true;
        return out;
    }

    const auto model = fit_mixture(centers_a, groups_a, sigma);
    const auto d = queries_b.cols();
    RowVector z(d), g0(d), g1(d);
    for (Eigen::Index i = 0; i < queries_b.rows(); ++i) {
        const int s = groups_b[static_cast<std::size_t>(i)];
        const double w = 0.5 / (static_cast<double>(count_b[s]) * static_cast<double>(m));
        for (std::size_t j = 0; j < m; ++j) {
            for (Eigen::Index k = 0; k < d; ++k) z(k) = queries_b(i, k) + sigma * rng.normal();
            const double l0 = model.log_density_and_gradient(z, 0, g0);
            const double l1 = model.log_density_and_gradient(z, 1, g1);
            const double diff = l1 - l0;
            double eta1, eta0;
            if (diff >= 0.0) {
                const double e = std::exp(-diff);
                eta1 = 1.0 / (1.0 + e);
                eta0 = e / (1.0 + e);
            } else {
                const double e = std::exp(diff);
                eta0 = 1.0 / (1.0 + e);
                eta1 = e / (1.0 + e);
            }
            const double gap = eta1 - eta0;
            out.value += w * std::abs(gap);
            const double sign = gap > 0.0 ? 1.0 : (gap < 0.0 ? -1.0 : 0.0);
            if (sign != 0.0) out.grad.row(i) += (w * sign * 2.0 * eta1 * eta0) * (g1 - g0);
        }
    }
    return out;
}

}  // namespace smoothfair
