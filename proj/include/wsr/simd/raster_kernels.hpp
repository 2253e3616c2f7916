#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wsr/render.hpp"

namespace wsr::simd {

/// Flattened splat consumed by the band kernels. In plain mode `amplitude`
/// is u*w; in stable mode it is u and the weight is exp(-exponent).
template <typename Real>
struct RasterSplat {
    Real mean_x, mean_y;
    Real conic_a, conic_b, conic_c;
    Real red, green, blue;
    Real amplitude;
    Real exponent;
    int x0, x1, y0, y1;
};

/// Per-pixel SoA sums for the rows [y_begin, y_end) of an image.
/// Plain mode: compensated sums (value = sum + comp).
/// Stable mode: sums normalized by exp(mu) with mu the running minimum exponent.
template <typename Real>
struct BandAccumulator {
    int width = 0;
    int y_begin = 0;
    int y_end = 0;
    bool stable = false;
    std::vector<Real> mu;
    std::vector<Real> num_r, num_g, num_b, den;
    std::vector<Real> comp_r, comp_g, comp_b, comp_d;

    void reset(int w, int y0, int y1, bool stable_mode);
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y - y_begin) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
    }
};

/// Flattens prepared splats. Plain mode drops zero-weight splats.
template <typename Real>
std::vector<RasterSplat<Real>> make_raster_splats(const std::vector<PreparedSplat>& splats, bool stable);

extern template struct BandAccumulator<float>;
extern template struct BandAccumulator<double>;

using RasterBandF32 = void (*)(std::span<const RasterSplat<float>>, float, BandAccumulator<float>&);

/// Reference kernels: one splat at a time, one pixel at a time.
void raster_band_scalar(std::span<const RasterSplat<float>> splats, float alpha_floor, BandAccumulator<float>& acc);
void raster_band_scalar(std::span<const RasterSplat<double>> splats, double alpha_floor, BandAccumulator<double>& acc);

/// AVX2+FMA kernel, eight pixels of a row per step. Only callable when
/// cpu_has_avx2() is true.
void raster_band_avx2(std::span<const RasterSplat<float>> splats, float alpha_floor, BandAccumulator<float>& acc);

bool cpu_has_avx2();

/// Resolves the kernel for a path request; `name` receives "scalar" or "avx2".
/// Throws std::runtime_error when AVX2 is requested but unavailable.
RasterBandF32 select_raster_f32(KernelPath path, std::string* name = nullptr);

}  // namespace wsr::simd
