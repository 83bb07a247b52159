#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "smoothfair/data/dataset.hpp"

namespace smoothfair {

/// Group 1's translation before scaling ("south-west" of group 0).
inline constexpr std::array<double, 3> kDefaultRollShift{-10.0, -10.0, 0.0};

/// Side of the cube the Swiss Roll features are mapped into.
inline constexpr double kDefaultRollSide = 5.0;

/// Two 3-D Swiss rolls, one per group (rows alternate 0, 1, 0, ...).
/// Roll: (u cos u, h, u sin u), u ~ U[1.5 pi, 4.5 pi], h ~ U[0, 21], plus
/// isotropic Gaussian noise; group 1 is translated by `shift`. All rows are
/// mapped into [0, side]^3 by one fixed affine map that depends only on
/// (shift, noise_sd, side), so independently generated samples share
/// coordinates.
Dataset generate_swiss_roll(std::size_t n, std::array<double, 3> shift = kDefaultRollShift, double noise_sd = 0.0,
                            std::uint64_t seed = 0, double side = kDefaultRollSide);

/// Binary digits b_1 b_2 ... of a number b in (0, 1).
class BinaryFraction {
public:
    /// Exact digits of a double (digits past its mantissa are 0).
    static BinaryFraction from_double(double b, std::size_t digits);
    /// Exact digits of num/den by integer doubling (periodic for non-dyadic).
    static BinaryFraction from_ratio(std::uint64_t numerator, std::uint64_t denominator, std::size_t digits);
    /// Digits of B ~ U(0, 1): independent fair bits.
    static BinaryFraction random(std::uint64_t seed, std::size_t digits);

    /// k-th digit, 1-based; k must not exceed size().
    int digit(std::size_t k) const;
    std::size_t size() const { return digits_.size(); }

private:
    explicit BinaryFraction(std::vector<std::uint8_t> digits) : digits_(std::move(digits)) {}
    std::vector<std::uint8_t> digits_;
};

/// X uniform over atoms x_k = 1/k, k = 1..K; S is the k-th binary digit of b.
/// S is a function of the atom, so for the identity map the population
/// certificate is 1 whenever both digit values occur among the atoms.
Dataset generate_atom_family(std::size_t atoms, const BinaryFraction& b, std::size_t n, std::uint64_t seed);
Dataset generate_atom_family(std::size_t atoms, double b, std::size_t n, std::uint64_t seed);

/// Interval index i with x in [1/(i+1), 1/i), capped at `truncation`.
std::size_t staircase_index(double x, std::size_t truncation);
/// Probability of atom i, 1/(i(i+1)) below the cap, 1/K for the lumped cap.
double staircase_mass(std::size_t i, std::size_t truncation);

/// X ~ U[0, 1), representation Z = staircase_index(X); S constant on each
/// interval, drawn once per interval with probability 1/2. Columns: x, z.
Dataset generate_staircase(std::size_t n, std::size_t truncation, std::uint64_t seed);

/// Census-style synthetic table with categorical and numeric columns, a
/// binary `sex` attribute and an `income` label whose base rate differs by
/// group. Written as raw CSV (strings, some missing cells) to exercise
/// ingestion.
std::string synthetic_income_csv(std::size_t n, std::uint64_t seed, double missing_rate = 0.01);

}  // namespace smoothfair
