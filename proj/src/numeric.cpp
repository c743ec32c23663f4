#include "fairbias/numeric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace fairbias {

double compensated_sum(std::span<const double> values)
{
    double sum = 0.0;
    double carry = 0.0;
    for (double v : values) {
        double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    return sum + carry;
}

double ordered_sum(std::span<const double> values)
{
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return compensated_sum(sorted);
}

double ordered_mean(std::span<const double> values)
{
    if (values.empty()) {
        return std::nan("");
    }
    return ordered_sum(values) / static_cast<double>(values.size());
}

Dispersion summarize(std::span<const MaybeValue> values)
{
    Dispersion out;
    out.total = values.size();
    std::vector<double> defined;
    defined.reserve(values.size());
    for (const auto& v : values) {
        if (v) {
            defined.push_back(*v);
        }
    }
    out.defined = defined.size();
    if (defined.empty()) {
        return out;
    }
    auto n = static_cast<double>(defined.size());
    double mean = compensated_sum(defined) / n;
    out.mean = mean;
    if (defined.size() < 2) {
        return out;
    }
    std::vector<double> sq(defined.size());
    std::transform(defined.begin(), defined.end(), sq.begin(), [mean](double v) { return (v - mean) * (v - mean); });
    double sd = std::sqrt(compensated_sum(sq) / (n - 1.0));
    out.sd = sd;
    out.std_error = sd / std::sqrt(n);
    return out;
}

std::vector<double> average_ranks(std::span<const double> values)
{
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && values[order[j]] == values[order[i]]) {
            ++j;
        }
        double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            ranks[order[k]] = rank;
        }
        i = j;
    }
    return ranks;
}

MaybeValue spearman(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) {
        return std::nullopt;
    }
    auto rx = average_ranks(x);
    auto ry = average_ranks(y);
    auto n = static_cast<double>(x.size());
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        return std::nullopt;
    }
    return sxy / std::sqrt(sxx * syy);
}

MaybeValue Ratio::value() const
{
    if (den == 0) {
        return std::nullopt;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

MaybeValue ratio_difference(const Ratio& a1, const Ratio& a0)
{
    if (!a1.defined() || !a0.defined()) {
        return std::nullopt;
    }
    // Exact cross-multiplication, then a single division, so that
    // d(x) = -d(1 - x) holds bit for bit.
    using wide = __int128;
    wide num = wide{a1.num} * a0.den - wide{a0.num} * a1.den;
    wide den = wide{a1.den} * a0.den;
    if (den < 0) {
        num = -num;
        den = -den;
    }
    wide g = den;
    for (wide r = num < 0 ? -num : num; r != 0;) {
        wide t = g % r;
        g = r;
        r = t;
    }
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

std::mt19937_64 make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags)
{
    return make_stream(seed, std::span<const std::uint64_t>(tags.begin(), tags.size()));
}

std::mt19937_64 make_stream(std::uint64_t seed, std::span<const std::uint64_t> tags)
{
    std::vector<std::uint32_t> words;
    words.reserve(2 * (tags.size() + 1));
    auto push = [&words](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    for (auto t : tags) {
        push(t);
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

std::uint64_t grid_tag(double value)
{
    return std::bit_cast<std::uint64_t>(value);
}

} // namespace fairbias
