#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "wsr/math.hpp"

namespace wsr {

/// Running sums of alpha*rgb and alpha weighted by exp(-d), kept normalized by
/// exp(mu) where mu is the smallest exponent seen so far. Numerator and
/// denominator share one mu.
///
///   sum_k = exp(mu_k) * sum_{i<=k} x_i exp(-d_i)
///   mu_k  = min(d_k, mu_{k-1})
///
/// When a new exponent lowers mu, the old sums are rescaled by exp(d_k - mu_{k-1})
/// and the new term enters with unit scale; otherwise the new term is scaled by
/// exp(mu_{k-1} - d_k). Every scale factor is <= 1, so nothing overflows and the
/// dominant term never underflows.
template <typename Real>
struct BasicStableAccumulator {
    Real mu = std::numeric_limits<Real>::infinity();
    std::array<Real, 3> num{};
    Real den = 0;
    std::size_t count = 0;

    void add(Real exponent, const std::array<Real, 3>& rgb, Real alpha) {
        if (!std::isfinite(exponent)) throw std::invalid_argument("accumulator exponent must be finite");
        if (count == 0) {
            mu = exponent;
            num = {alpha * rgb[0], alpha * rgb[1], alpha * rgb[2]};
            den = alpha;
        } else if (exponent < mu) {
            const Real rescale = std::exp(exponent - mu);
            for (std::size_t c = 0; c < 3; ++c) num[c] = alpha * rgb[c] + rescale * num[c];
            den = alpha + rescale * den;
            mu = exponent;
        } else {
            const Real scale = std::exp(mu - exponent);
            const Real a = scale * alpha;
            for (std::size_t c = 0; c < 3; ++c) num[c] += a * rgb[c];
            den += a;
        }
        ++count;
    }
};

using StableAccumulator = BasicStableAccumulator<double>;

inline StableAccumulator accum_add(StableAccumulator acc, double exponent, const Vec3& rgb, double alpha) {
    acc.add(exponent, {rgb.x, rgb.y, rgb.z}, alpha);
    return acc;
}

/// (c_B w_B + sum alpha w c) / (w_B + sum alpha w) evaluated from normalized
/// sums in extended-exponent form. `mu` is the frame of num/den (0 for plain
/// sums). Falls back to the background color when the total weight is not
/// positive; *degenerate reports that case.
Vec3 weighted_quotient(double mu, const std::array<double, 3>& num, double den, const Vec3& background_rgb,
                       double background_weight, bool* degenerate = nullptr);

inline Vec3 accum_quotient(const StableAccumulator& acc, const Vec3& background_rgb, double background_weight,
                           bool* degenerate = nullptr) {
    if (acc.count == 0) return weighted_quotient(0.0, {0, 0, 0}, 0.0, background_rgb, background_weight, degenerate);
    return weighted_quotient(acc.mu, acc.num, acc.den, background_rgb, background_weight, degenerate);
}

/// Neumaier-compensated running sum.
template <typename Real>
struct CompensatedSum {
    Real sum = 0;
    Real comp = 0;

    void add(Real x) {
        const Real t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    Real value() const { return sum + comp; }
};

}  // namespace wsr
