#pragma once

#include <algorithm>
#include <array>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "wsr/camera.hpp"
#include "wsr/image.hpp"
#include "wsr/scene.hpp"
#include "wsr/sh.hpp"

namespace wsr::test {

using BigFloat = boost::multiprecision::cpp_bin_float_50;

struct WeightedTerm {
    double exponent;
    std::array<double, 3> rgb;
    double alpha;
};

struct TermSet {
    std::vector<WeightedTerm> terms;
    Vec3 background;
    double background_weight;
};

// Exponents drawn around a per-set center in [-500, 500] with a +-500 spread;
// every third set has no background term.
inline TermSet random_term_set(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    TermSet s;
    const double center = -500.0 + 1000.0 * unit(rng);
    const int n = 1 + static_cast<int>(unit(rng) * 64);
    for (int i = 0; i < n; ++i)
        s.terms.push_back({center - 500.0 + 1000.0 * unit(rng), {unit(rng), unit(rng), unit(rng)}, 0.01 + unit(rng)});
    s.background = {unit(rng), unit(rng), unit(rng)};
    s.background_weight = rng() % 3 == 0 ? 0.0 : unit(rng);
    return s;
}

inline std::array<BigFloat, 3> big_quotient(const TermSet& s) {
    BigFloat num[3], den = s.background_weight;
    for (int c = 0; c < 3; ++c) num[c] = BigFloat(s.background[static_cast<std::size_t>(c)]) * s.background_weight;
    for (const WeightedTerm& t : s.terms) {
        const BigFloat w = boost::multiprecision::exp(BigFloat(-t.exponent)) * t.alpha;
        for (int c = 0; c < 3; ++c) num[c] += w * t.rgb[static_cast<std::size_t>(c)];
        den += w;
    }
    return {num[0] / den, num[1] / den, num[2] / den};
}

inline std::array<double, 3> naive_quotient(const TermSet& s) {
    std::array<double, 3> num{};
    double den = s.background_weight;
    for (int c = 0; c < 3; ++c) num[static_cast<std::size_t>(c)] = s.background[static_cast<std::size_t>(c)] * s.background_weight;
    for (const WeightedTerm& t : s.terms) {
        const double w = std::exp(-t.exponent) * t.alpha;
        for (std::size_t c = 0; c < 3; ++c) num[c] += w * t.rgb[c];
        den += w;
    }
    return {num[0] / den, num[1] / den, num[2] / den};
}

// Sorted compositing evaluated far to near with the OVER operator:
// C <- a c + (1 - a) C, starting from the background.
struct OverSplat {
    double depth;
    Vec2 mean;
    Sym2 conic;
    Vec3 color;
    double opacity;
};

inline Image over_composite(std::vector<OverSplat> splats, int width, int height, const Vec3& background,
                            double alpha_floor) {
    std::stable_sort(splats.begin(), splats.end(), [](const OverSplat& a, const OverSplat& b) { return a.depth < b.depth; });
    Image img(width, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            // The reference stops at the first splat that would drop transmittance
            // below 1e-4; find that cut, then composite the kept prefix back to front.
            std::vector<double> alphas;
            double t = 1.0;
            for (const OverSplat& s : splats) {
                const double dx = px - s.mean.x, dy = py - s.mean.y;
                const double g = std::exp(-0.5 * (s.conic.a * dx * dx + 2 * s.conic.b * dx * dy + s.conic.c * dy * dy));
                double a = std::min(0.99, s.opacity * g);
                if (a < alpha_floor || a < 0.0) a = 0.0;
                if (t * (1.0 - a) < 1e-4) break;
                alphas.push_back(a);
                t *= 1.0 - a;
            }
            Vec3 acc = background;
            for (std::size_t k = alphas.size(); k-- > 0;) acc = splats[k].color * alphas[k] + acc * (1.0 - alphas[k]);
            img.set_pixel(x, y, {std::clamp(acc.x, 0.0, 1.0), std::clamp(acc.y, 0.0, 1.0), std::clamp(acc.z, 0.0, 1.0)});
        }
    return img;
}

}  // namespace wsr::test
