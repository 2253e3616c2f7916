#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wsr/camera.hpp"
#include "wsr/image.hpp"
#include "wsr/render.hpp"
#include "wsr/scene.hpp"

namespace wsr {

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(1 / MSE) over all channels, capped at 99 dB.
double psnr(const Image& a, const Image& b);

/// Mean SSIM over valid 11x11 Gaussian windows (sigma 1.5, C1 = 0.01^2,
/// C2 = 0.03^2), computed per channel and averaged. Both sides need width and
/// height >= 11.
double ssim(const Image& a, const Image& b);

/// Same value as ssim(a, b); also writes d ssim / d a (interleaved RGB, same
/// layout as a.pixels) into grad_a.
double ssim_with_gradient(const Image& a, const Image& b, std::span<double> grad_a);

/// The normalized 1D window; the 2D window is its outer product.
std::vector<double> ssim_window_1d();

enum class RendererKind { Wsr, Sorted };
std::string to_string(RendererKind kind);

struct PoppingReport {
    std::string renderer;
    std::vector<double> deltas;  // max |frame[k+1] - frame[k]| per consecutive pair
    double max_delta = 0.0;
    std::size_t max_index = 0;

    double median_delta() const;
};

/// Renders every camera of the path and records consecutive frame deltas.
/// Throws std::invalid_argument with fewer than two cameras.
PoppingReport popping_metric(const Scene& scene, std::span<const Camera> path, RendererKind renderer,
                             const RenderOptions& opts = {});

double max_abs_diff(const Image& a, const Image& b);
double mean_abs_diff(const Image& a, const Image& b);

}  // namespace wsr
