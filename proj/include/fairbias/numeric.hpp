#pragma once

#include "fairbias/common.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace fairbias {

// Neumaier-compensated sum in the given order.
double compensated_sum(std::span<const double> values);

// Compensated sum over the values sorted ascending, so the result does not
// depend on the input order. Used wherever a report must be invariant to
// row or model permutations.
double ordered_sum(std::span<const double> values);

double ordered_mean(std::span<const double> values);

struct Dispersion {
    MaybeValue mean;
    MaybeValue sd;      // sample sd (n - 1)
    MaybeValue std_error; // sd / sqrt(n)
    std::size_t defined = 0;
    std::size_t total = 0;
};

// Summary over the defined entries, in index order.
Dispersion summarize(std::span<const MaybeValue> values);

// Average ranks (ties share their mid-rank), 1-based.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman rank correlation; undefined when either side is constant or n < 2.
MaybeValue spearman(std::span<const double> x, std::span<const double> y);

// Exact rational p/q with a single rounding on conversion.
struct Ratio {
    std::int64_t num = 0;
    std::int64_t den = 0;

    [[nodiscard]] bool defined() const noexcept { return den != 0; }
    [[nodiscard]] MaybeValue value() const;
};

// (a1 - a0) rounded once; undefined if either side is.
MaybeValue ratio_difference(const Ratio& a1, const Ratio& a0);

// Independent RNG stream for a task identified by (seed, tags...).
std::mt19937_64 make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);
std::mt19937_64 make_stream(std::uint64_t seed, std::span<const std::uint64_t> tags);

// Stable 64-bit tag for a grid value (its bit pattern).
std::uint64_t grid_tag(double value);

} // namespace fairbias
