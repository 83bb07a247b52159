#include "smoothfair/data/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "smoothfair/data/csv.hpp"
#include "smoothfair/errors.hpp"
#include "smoothfair/numkit/rng.hpp"

namespace smoothfair {

namespace {

constexpr double kRollUMin = 1.5 * std::numbers::pi;
constexpr double kRollUMax = 4.5 * std::numbers::pi;
constexpr double kRollHeight = 21.0;

}  // namespace

Dataset generate_swiss_roll(std::size_t n, std::array<double, 3> shift, double noise_sd, std::uint64_t seed, double side) {
    if (n < 2) throw ArgumentError("generate_swiss_roll: need n >= 2");
    if (!(side > 0.0) || !std::isfinite(side)) throw ArgumentError("generate_swiss_roll: side must be positive");
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw ArgumentError("generate_swiss_roll: noise_sd must be >= 0");

    // Bounding box of both rolls (x and z of u cos u, u sin u lie in +-u_max).
    const double pad = 4.0 * noise_sd;
    std::array<double, 3> lo{-kRollUMax, 0.0, -kRollUMax};
    std::array<double, 3> hi{kRollUMax, kRollHeight, kRollUMax};
    for (int j = 0; j < 3; ++j) {
        lo[j] = std::min(lo[j], lo[j] + shift[j]) - pad;
        hi[j] = std::max(hi[j], hi[j] + shift[j]) + pad;
    }
    double extent = 0.0;
    for (int j = 0; j < 3; ++j) extent = std::max(extent, hi[j] - lo[j]);

    Rng rng(seed);
    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(n), 3);
    ds.sensitive.resize(n);
    ds.column_names = {"x", "y", "z"};
    for (std::size_t i = 0; i < n; ++i) {
        const auto group = static_cast<std::uint8_t>(i % 2);
        const double u = rng.uniform(kRollUMin, kRollUMax);
        const double h = rng.uniform(0.0, kRollHeight);
        std::array<double, 3> p{u * std::cos(u), h, u * std::sin(u)};
        for (int j = 0; j < 3; ++j) {
            if (noise_sd > 0.0) p[j] += rng.normal(0.0, noise_sd);
            if (group == 1) p[j] += shift[j];
            ds.features(static_cast<Eigen::Index>(i), j) = side * (p[j] - lo[j]) / extent;
        }
        ds.sensitive[i] = group;
    }
    return ds;
}

BinaryFraction BinaryFraction::from_double(double b, std::size_t digits) {
    if (!(b > 0.0 && b < 1.0)) throw ArgumentError("binary expansion: b must lie in (0, 1)");
    std::vector<std::uint8_t> out(digits, 0);
    // Doubling a double in (0, 1) and removing the integer part is exact.
    double r = b;
    for (std::size_t k = 0; k < digits && r > 0.0; ++k) {
        r *= 2.0;
        if (r >= 1.0) {
            out[k] = 1;
            r -= 1.0;
        }
    }
    return BinaryFraction(std::move(out));
}

BinaryFraction BinaryFraction::from_ratio(std::uint64_t numerator, std::uint64_t denominator, std::size_t digits) {
    if (denominator == 0 || numerator == 0 || numerator >= denominator) {
        throw ArgumentError("binary expansion: ratio must lie in (0, 1)");
    }
    if (denominator > (std::uint64_t{1} << 62)) throw ArgumentError("binary expansion: denominator too large");
    std::vector<std::uint8_t> out(digits, 0);
    std::uint64_t r = numerator;
    for (std::size_t k = 0; k < digits; ++k) {
        r *= 2;
        if (r >= denominator) {
            out[k] = 1;
            r -= denominator;
        }
    }
    return BinaryFraction(std::move(out));
}

BinaryFraction BinaryFraction::random(std::uint64_t seed, std::size_t digits) {
    Rng rng(seed);
    std::vector<std::uint8_t> out(digits);
    for (auto& d : out) d = static_cast<std::uint8_t>(rng.next_u64() >> 63);
    return BinaryFraction(std::move(out));
}

int BinaryFraction::digit(std::size_t k) const {
    if (k == 0 || k > digits_.size()) throw ArgumentError("binary expansion: digit index out of range");
    return digits_[k - 1];
}

Dataset generate_atom_family(std::size_t atoms, const BinaryFraction& b, std::size_t n, std::uint64_t seed) {
    if (atoms == 0) throw ArgumentError("generate_atom_family: need K >= 1");
    if (n == 0) throw ArgumentError("generate_atom_family: need n >= 1");
    if (b.size() < atoms) throw ArgumentError("generate_atom_family: expansion shorter than K");
    Rng rng(seed);
    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(n), 1);
    ds.sensitive.resize(n);
    ds.column_names = {"x"};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = 1 + rng.index(atoms);
        ds.features(static_cast<Eigen::Index>(i), 0) = 1.0 / static_cast<double>(k);
        ds.sensitive[i] = static_cast<std::uint8_t>(b.digit(k));
    }
    return ds;
}

Dataset generate_atom_family(std::size_t atoms, double b, std::size_t n, std::uint64_t seed) {
    return generate_atom_family(atoms, BinaryFraction::from_double(b, std::max<std::size_t>(atoms, 1)), n, seed);
}

std::size_t staircase_index(double x, std::size_t truncation) {
    if (truncation == 0) throw ArgumentError("staircase: truncation must be >= 1");
    if (!(x >= 0.0 && x < 1.0)) throw ArgumentError("staircase: x must lie in [0, 1)");
    if (x == 0.0) return truncation;
    // i = floor(1/x) is the candidate; correct for rounding at the edges so
    // that 1/(i+1) <= x < 1/i holds exactly in floating point.
    if (x < 1.0 / static_cast<double>(truncation)) return truncation;
    auto i = static_cast<std::size_t>(std::floor(1.0 / x));
    while (i > 1 && x >= 1.0 / static_cast<double>(i)) --i;
    while (x < 1.0 / static_cast<double>(i + 1)) ++i;
    return std::min(i, truncation);
}

double staircase_mass(std::size_t i, std::size_t truncation) {
    if (i == 0 || i > truncation) throw ArgumentError("staircase: atom index out of range");
    const double di = static_cast<double>(i);
    if (i == truncation) return 1.0 / di;
    return 1.0 / (di * (di + 1.0));
}

Dataset generate_staircase(std::size_t n, std::size_t truncation, std::uint64_t seed) {
    if (truncation == 0) throw ArgumentError("generate_staircase: truncation must be >= 1");
    if (n == 0) throw ArgumentError("generate_staircase: need n >= 1");
    Rng rng(seed);
    Labels interval_group(truncation);
    for (auto& g : interval_group) g = rng.bernoulli(0.5) ? 1 : 0;
    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(n), 2);
    ds.sensitive.resize(n);
    ds.column_names = {"x", "z"};
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.uniform();
        const std::size_t z = staircase_index(x, truncation);
        ds.features(static_cast<Eigen::Index>(i), 0) = x;
        ds.features(static_cast<Eigen::Index>(i), 1) = static_cast<double>(z);
        ds.sensitive[i] = interval_group[z - 1];
    }
    return ds;
}

std::string synthetic_income_csv(std::size_t n, std::uint64_t seed, double missing_rate) {
    if (n == 0) throw ArgumentError("synthetic_income_csv: need n >= 1");
    static const std::vector<std::string> education{"HS-grad", "Some-college", "Bachelors", "Masters", "Doctorate"};
    static const std::vector<std::string> occupation{"Adm-clerical", "Craft-repair", "Exec-managerial",
                                                     "Other-service", "Prof-specialty", "Sales"};
    // Occupation weights by group (female, male) and income effect.
    static const double occ_female[] = {0.30, 0.04, 0.12, 0.24, 0.18, 0.12};
    static const double occ_male[] = {0.08, 0.26, 0.20, 0.10, 0.18, 0.18};
    static const double occ_effect[] = {-0.3, -0.1, 0.9, -1.0, 0.8, 0.1};
    static const std::vector<std::string> races{"White", "Black", "Asian-Pac-Islander", "Other"};

    Rng rng(seed);
    auto pick = [&](const double* w, std::size_t k) {
        double u = rng.uniform();
        for (std::size_t i = 0; i < k; ++i) {
            if (u < w[i]) return i;
            u -= w[i];
        }
        return k - 1;
    };
    auto maybe_missing = [&](std::string v) { return rng.bernoulli(missing_rate) ? std::string("?") : v; };

    std::string out = "age,hours_per_week,education,occupation,relationship,race,capital_gain,sex,income\n";
    for (std::size_t i = 0; i < n; ++i) {
        const bool male = rng.bernoulli(0.67);
        const double age = std::round(rng.uniform(18.0, 75.0));
        const double hours = std::round(std::clamp(rng.normal(male ? 44.0 : 36.0, 9.0), 5.0, 90.0));
        static const double edu_w[] = {0.35, 0.25, 0.22, 0.13, 0.05};
        const std::size_t edu = pick(edu_w, 5);
        const std::size_t occ = pick(male ? occ_male : occ_female, 6);
        const bool married = rng.bernoulli(male ? 0.6 : 0.35);
        std::string relationship = married ? (male ? "Husband" : "Wife") : (rng.bernoulli(0.5) ? "Not-in-family" : "Unmarried");
        static const double race_w[] = {0.8, 0.1, 0.06, 0.04};
        const std::size_t race = pick(race_w, 4);
        const double gain = rng.bernoulli(0.08) ? std::round(std::exp(rng.normal(8.5, 1.0))) : 0.0;

        const double logit = -3.2 + 0.75 * static_cast<double>(edu) + 0.05 * (hours - 40.0) + 0.035 * (age - 40.0) -
                             0.0012 * (age - 40.0) * (age - 40.0) + 1.3 * (married ? 1.0 : 0.0) + occ_effect[occ] +
                             (gain > 0.0 ? 2.0 : 0.0);
        const bool rich = rng.uniform() < 1.0 / (1.0 + std::exp(-logit));

        std::vector<std::string> fields{maybe_missing(format_double(age)),
                                        format_double(hours),
                                        maybe_missing(education[edu]),
                                        maybe_missing(occupation[occ]),
                                        relationship,
                                        races[race],
                                        format_double(gain),
                                        male ? "Male" : "Female",
                                        rich ? ">50K" : "<=50K"};
        out += format_csv_row(fields);
        out += '\n';
    }
    return out;
}

}  // namespace smoothfair
