#include "wsr/accumulator.hpp"

namespace wsr {

Vec3 weighted_quotient(double mu, const std::array<double, 3>& num, double den, const Vec3& background_rgb,
                       double background_weight, bool* degenerate) {
    if (degenerate) *degenerate = false;
    auto fallback = [&] {
        if (degenerate) *degenerate = true;
        return background_rgb;
    };

    if (background_weight == 0.0) {
        if (!(den > 0.0)) return fallback();
        return {num[0] / den, num[1] / den, num[2] / den};
    }

    // Pick the frame whose scale factor is <= 1: the background weight is
    // exp(mu)-scaled into the sums' frame when mu <= 0, otherwise the sums are
    // exp(-mu)-scaled into the natural frame.
    if (mu <= 0.0) {
        const double wb = background_weight * std::exp(mu);
        const double total = wb + den;
        if (!(total > 0.0)) return fallback();
        return {(background_rgb.x * wb + num[0]) / total, (background_rgb.y * wb + num[1]) / total,
                (background_rgb.z * wb + num[2]) / total};
    }
    const double s = std::exp(-mu);
    const double total = background_weight + s * den;
    if (!(total > 0.0)) return fallback();
    return {(background_rgb.x * background_weight + s * num[0]) / total,
            (background_rgb.y * background_weight + s * num[1]) / total,
            (background_rgb.z * background_weight + s * num[2]) / total};
}

}  // namespace wsr
