#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "wsr/camera.hpp"
#include "wsr/image.hpp"
#include "wsr/scene.hpp"

namespace wsr {

enum class Precision : std::uint8_t { F32, F64 };

/// Which rasterization kernel handles the f32 path. Auto picks AVX2 when the
/// CPU supports it (and WSR_SIMD is not "scalar").
enum class KernelPath : std::uint8_t { Auto, Scalar, Avx2 };

struct RenderOptions {
    Precision precision = Precision::F32;
    /// A splat-pixel contribution is skipped when its falloff g (fraction of
    /// the splat's peak) is below this value.
    double alpha_floor = 1.0 / 255.0;
    /// When false, splats are submitted in a seeded scrambled order instead of
    /// cull order. The WSR result does not depend on it.
    bool deterministic_order = true;
    std::uint64_t shuffle_seed = 0;
    /// Restrict each splat to its 3-sigma screen box. Disabled for gradient
    /// checks so the image is smooth in every parameter.
    bool clip_footprint = true;
    /// 0 = WSR_WORKERS env var, else hardware concurrency.
    int workers = 0;
    KernelPath kernel = KernelPath::Auto;

    void validate() const;
};

struct RenderStats {
    std::size_t visible = 0;
    std::size_t degenerate_pixels = 0;
    double project_seconds = 0.0;
    double sort_seconds = 0.0;
    double raster_seconds = 0.0;
    bool sorted = false;
    std::string kernel;
};

/// DIR: 1. EXP: exp(-sigma d^beta), d must be > 0. LC: max(0, 1 - d/sigma) v.
double weight_eval(const WeightModel& model, double depth, double lc_weight);

/// sigma d^beta, the EXP weight's exponent (weight = exp(-exponent)).
double exp_weight_exponent(const WeightModel& model, double depth);

/// A visible splat with everything the rasterizers need, in double precision.
struct PreparedSplat {
    std::size_t index = 0;
    SplatProjection proj;
    Vec3 view_dir;  // unit, from camera center to splat
    Vec3 color;     // clamped at zero
    double opacity = 0.0;  // raw u
    double weight = 1.0;   // natural-frame weight (DIR/LC); exp(-exponent) for EXP
    double exponent = 0.0; // EXP only
    int x0 = 0, x1 = 0, y0 = 0, y1 = 0;  // half-open pixel box
};

/// Projects, culls, and shades the scene in cull order.
std::vector<PreparedSplat> prepare_splats(const Scene& scene, const Camera& cam, const RenderOptions& opts);

/// Sort-free weighted-sum render:
///   C = (c_B w_B + sum c_i a_i w_i) / (w_B + sum a_i w_i)
/// EXP sums run through the stable accumulator. Pixels whose total weight is
/// not positive fall back to c_B and are counted in stats->degenerate_pixels.
/// Never calls depth_order.
Image render_wsr(const Scene& scene, const Camera& cam, const RenderOptions& opts = {}, RenderStats* stats = nullptr);

/// Sorted front-to-back alpha blending with 3DGS conventions (alpha clamped to
/// [0, 0.99], early exit at transmittance 1e-4). Always double precision.
Image render_sorted_reference(const Scene& scene, const Camera& cam, const RenderOptions& opts = {},
                              RenderStats* stats = nullptr);

/// Visible indices stably sorted by camera-space depth.
std::vector<std::size_t> depth_order(const Scene& scene, const Camera& cam);

/// Number of depth_order invocations in this process.
std::size_t depth_order_call_count();

int resolve_worker_count(int requested);

}  // namespace wsr
