#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string_view>

#include "wsr/simd/raster_kernels.hpp"

namespace wsr::simd {

template <typename Real>
void BandAccumulator<Real>::reset(int w, int y0, int y1, bool stable_mode) {
    width = w;
    y_begin = y0;
    y_end = y1;
    stable = stable_mode;
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(y1 - y0);
    num_r.assign(n, Real(0));
    num_g.assign(n, Real(0));
    num_b.assign(n, Real(0));
    den.assign(n, Real(0));
    if (stable) {
        mu.assign(n, std::numeric_limits<Real>::infinity());
        comp_r.clear();
        comp_g.clear();
        comp_b.clear();
        comp_d.clear();
    } else {
        mu.clear();
        comp_r.assign(n, Real(0));
        comp_g.assign(n, Real(0));
        comp_b.assign(n, Real(0));
        comp_d.assign(n, Real(0));
    }
}

template struct BandAccumulator<float>;
template struct BandAccumulator<double>;

namespace {

template <typename Real>
inline void neumaier(Real& sum, Real& comp, Real x) {
    const Real t = sum + x;
    if (std::abs(sum) >= std::abs(x))
        comp += (sum - t) + x;
    else
        comp += (x - t) + sum;
    sum = t;
}

template <typename Real>
void raster_band_scalar_impl(std::span<const RasterSplat<Real>> splats, Real alpha_floor, BandAccumulator<Real>& acc) {
    for (const RasterSplat<Real>& s : splats) {
        const int y_lo = std::max(s.y0, acc.y_begin);
        const int y_hi = std::min(s.y1, acc.y_end);
        for (int y = y_lo; y < y_hi; ++y) {
            const Real dy = Real(y) + Real(0.5) - s.mean_y;
            for (int x = s.x0; x < s.x1; ++x) {
                const Real dx = Real(x) + Real(0.5) - s.mean_x;
                const Real power = Real(-0.5) * (s.conic_a * dx * dx + s.conic_c * dy * dy) - s.conic_b * dx * dy;
                const Real g = std::exp(power);
                if (g < alpha_floor) continue;
                const Real alpha = s.amplitude * g;
                const std::size_t i = acc.index(x, y);
                if (acc.stable) {
                    const Real m = acc.mu[i];
                    if (s.exponent < m) {
                        const Real rescale = std::exp(s.exponent - m);
                        acc.num_r[i] = alpha * s.red + rescale * acc.num_r[i];
                        acc.num_g[i] = alpha * s.green + rescale * acc.num_g[i];
                        acc.num_b[i] = alpha * s.blue + rescale * acc.num_b[i];
                        acc.den[i] = alpha + rescale * acc.den[i];
                        acc.mu[i] = s.exponent;
                    } else {
                        const Real a = std::exp(m - s.exponent) * alpha;
                        acc.num_r[i] += a * s.red;
                        acc.num_g[i] += a * s.green;
                        acc.num_b[i] += a * s.blue;
                        acc.den[i] += a;
                    }
                } else {
                    neumaier(acc.num_r[i], acc.comp_r[i], alpha * s.red);
                    neumaier(acc.num_g[i], acc.comp_g[i], alpha * s.green);
                    neumaier(acc.num_b[i], acc.comp_b[i], alpha * s.blue);
                    neumaier(acc.den[i], acc.comp_d[i], alpha);
                }
            }
        }
    }
}

}  // namespace

void raster_band_scalar(std::span<const RasterSplat<float>> splats, float alpha_floor, BandAccumulator<float>& acc) {
    raster_band_scalar_impl(splats, alpha_floor, acc);
}

void raster_band_scalar(std::span<const RasterSplat<double>> splats, double alpha_floor, BandAccumulator<double>& acc) {
    raster_band_scalar_impl(splats, alpha_floor, acc);
}

bool cpu_has_avx2() {
#if defined(WSR_HAVE_AVX2_KERNEL) && (defined(__GNUC__) || defined(__clang__))
    static const bool has = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return has;
#else
    return false;
#endif
}

#if !defined(WSR_HAVE_AVX2_KERNEL)
void raster_band_avx2(std::span<const RasterSplat<float>>, float, BandAccumulator<float>&) {
    throw std::runtime_error("AVX2 kernel not compiled for this target");
}
#endif

RasterBandF32 select_raster_f32(KernelPath path, std::string* name) {
    const auto pick = [&](RasterBandF32 fn, const char* n) {
        if (name) *name = n;
        return fn;
    };
    switch (path) {
        case KernelPath::Scalar: return pick(static_cast<RasterBandF32>(&raster_band_scalar), "scalar");
        case KernelPath::Avx2:
            if (!cpu_has_avx2()) throw std::runtime_error("AVX2 kernel requested but not supported on this CPU");
            return pick(&raster_band_avx2, "avx2");
        case KernelPath::Auto: break;
    }
    const char* env = std::getenv("WSR_SIMD");
    const bool force_scalar = env != nullptr && std::string_view(env) == "scalar";
    if (!force_scalar && cpu_has_avx2()) return pick(&raster_band_avx2, "avx2");
    return pick(static_cast<RasterBandF32>(&raster_band_scalar), "scalar");
}

}  // namespace wsr::simd
