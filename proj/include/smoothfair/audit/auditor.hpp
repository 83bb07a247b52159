#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "smoothfair/density/mixture.hpp"
#include "smoothfair/numkit/matrix.hpp"

namespace smoothfair {

/// Predicts the group with the larger class-conditional density; ties go to 0.
int plugin_predict(const MixtureDensityModel& model, const RowVector& z);

struct BerOptions {
    /// Score c_i + N(0, sigma^2 I) instead of the bare center.
    bool noisy_queries = true;
    std::uint64_t seed = 0;
};

/// In-sample leave-one-out balanced error rate. Point i is queried at
/// c_i (+ noise) against the mixture with its own component removed.
/// The noise draw of each point is seeded from its content, so the result
/// does not depend on row order.
double loo_ber(const Matrix& centers, const Labels& groups, double sigma, const BerOptions& options = {});

/// Balanced error rate of the full model on an independent sample.
double heldout_ber(const MixtureDensityModel& model, const Matrix& eval_z, const Labels& eval_groups);

enum class AuditMode { leave_one_out, held_out };
std::string to_string(AuditMode mode);

struct CertificateReport {
    double ber = 0.5;
    double delta_n = 0.0;
    std::size_t n0 = 0;
    std::size_t n1 = 0;
    double sigma = 0.0;
    AuditMode mode = AuditMode::leave_one_out;
    std::string split_tag = "train";
    /// Largest observed encoder norm; a lower estimate of the supremum.
    std::optional<double> t_inf;
    std::optional<double> thm2_bound;
    std::optional<double> thm3_mi_bound;
    std::uint64_t seed = 0;
    std::string timestamp;
};

struct CertificateOptions {
    std::string split_tag = "train";
    std::optional<double> t_inf;
    BerOptions ber;
};

/// delta_n = max(0, 1 - 2 ber), with bound values attached when t_inf is known.
CertificateReport certificate_from_ber(double ber, std::size_t n0, std::size_t n1, double sigma,
                                       const CertificateOptions& options, AuditMode mode);

CertificateReport empirical_certificate(const Matrix& centers, const Labels& groups, double sigma,
                                        const CertificateOptions& options = {});
CertificateReport empirical_certificate(const MixtureDensityModel& model, const Matrix& eval_z, const Labels& eval_groups,
                                        const CertificateOptions& options = {});

nlohmann::json to_json(const CertificateReport& report);
CertificateReport certificate_from_json(const nlohmann::json& j);

/// ISO-8601 UTC, second resolution.
std::string utc_timestamp();

}  // namespace smoothfair
