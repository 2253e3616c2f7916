#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsr/camera.hpp"
#include "wsr/image.hpp"
#include "wsr/render.hpp"
#include "wsr/scene.hpp"

namespace wsr {

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

inline constexpr double kDefaultSsimLambda = 0.2;

/// (1 - lambda) mean|r - s| + lambda (1 - SSIM(r, s)). With lambda == 0 the
/// SSIM term is skipped and any image size is accepted.
double loss(const Image& rendered, const Image& target, double ssim_lambda = kDefaultSsimLambda);

/// Same value; writes dL/d(rendered) into grad (interleaved RGB).
double loss_with_gradient(const Image& rendered, const Image& target, std::span<double> grad,
                          double ssim_lambda = kDefaultSsimLambda);

// ---------------------------------------------------------------------------
// Two-pass gradients
// ---------------------------------------------------------------------------

/// One scalar per ParamView slot.
struct Gradients {
    std::vector<double> values;
};

/// Forward-pass quantities kept per pixel for the gradient pass.
struct PixelSums {
    double mu = 0.0;               // normalization exponent (0 for plain sums)
    std::array<double, 3> num{};   // exp(mu)-normalized sum of alpha w c
    double den = 0.0;              // exp(mu)-normalized sum of alpha w
    Vec3 color;                    // unclamped quotient including the background
    double log_inv_total = 0.0;    // -log(w_B + sum alpha w), natural frame
    bool degenerate = false;
};

struct BackwardOptions {
    RenderOptions render{Precision::F64};
    double ssim_lambda = kDefaultSsimLambda;
    /// Throw std::runtime_error naming the first non-finite slot.
    bool check_finite = true;
};

struct BackwardResult {
    double loss = 0.0;
    Gradients grads;
    Image rendered;
    std::vector<PixelSums> pixel_sums;
    /// Per element: dL/d(mean2d) in pixels, projected radius, visibility.
    std::vector<Vec2> mean2d_grad;
    std::vector<double> radius;
    std::vector<unsigned char> visible;
};

/// Pass 1 renders (double precision, scalar kernel) and stores PixelSums;
/// pass 2 walks every contributing splat-pixel pair and accumulates
///   dL/dtau = sum_l dL/dr_l [ (a w) dc_l/dtau + (c_l - r_l) d(a w)/dtau ] / (w_B + sum a w)
/// then chains through SH, the 2D falloff, projection, and the weight model.
/// The gradient pass is splat-major: each splat sums over its own pixels in a
/// fixed order, so the result does not depend on the worker count.
BackwardResult backward_wsr(const Scene& scene, const Camera& cam, const Image& target,
                            const BackwardOptions& opts = {});

/// Loss of the double-precision WSR render; the finite-difference objective.
double evaluate_loss(const Scene& scene, const Camera& cam, const Image& target, const BackwardOptions& opts = {});

struct FdSlotResult {
    std::size_t index = 0;
    ParamSlot slot;
    double analytic = 0.0;
    double numeric = 0.0;
    double error = 0.0;
};

struct FdReport {
    double max_error = 0.0;
    std::size_t worst = 0;  // index into slots
    std::vector<FdSlotResult> slots;
};

/// Central differences (L(x+h) - L(x-h)) / 2h with h = rel_step * max(1, |x|),
/// compared to `analytic` (ParamView layout). Error per slot is relative to
/// max(|analytic|, |numeric|), or absolute when that magnitude is below 1e-8.
FdReport finite_diff_check(const Scene& scene, const Camera& cam, const Image& target,
                           std::span<const std::size_t> slots, std::span<const double> analytic,
                           double rel_step = 1e-5, const BackwardOptions& opts = {});

/// Convenience overload: computes the analytic gradient with backward_wsr.
FdReport finite_diff_check(const Scene& scene, const Camera& cam, const Image& target,
                           std::span<const std::size_t> slots, double rel_step = 1e-5,
                           const BackwardOptions& opts = {});

/// Options for gradient checking: no footprint clipping and no cutoff, so the
/// render is smooth in every parameter.
BackwardOptions gradcheck_options(double ssim_lambda = kDefaultSsimLambda);

/// The current render pushed `margin` toward `reference` in every channel, so
/// |r - target| stays away from zero and the L1 term is differentiable.
Image gradcheck_target(const Scene& scene, const Camera& cam, const Image& reference, double margin = 0.1,
                       const BackwardOptions& opts = gradcheck_options());

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct LearningRates {
    double position = 1.6e-4;
    double position_final = 1.6e-6;
    std::size_t position_decay_steps = 30000;
    double color_sh = 2.5e-3;
    double opacity_sh = 5e-2;
    double scale = 5e-3;
    double rotation = 1e-3;
    double lc_weight = 5e-2;
    double globals = 1e-3;

    /// Log-linear decay of the position rate from `position` to `position_final`.
    double position_at(std::size_t step) const;
    double for_class(ParamClass cls, std::size_t step) const;
};

struct AdamState {
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-15;

    std::vector<double> first;
    std::vector<double> second;
    std::size_t step = 0;
};

/// Standard bias-corrected Adam on every slot. Throws std::runtime_error
/// naming the slot when an update is non-finite.
void adam_step(Scene& scene, const Gradients& grads, AdamState& state, const LearningRates& lr);

// ---------------------------------------------------------------------------
// Densification
// ---------------------------------------------------------------------------

struct DensifyConfig {
    std::size_t interval = 100;
    std::size_t start = 500;
    std::size_t stop = 15000;
    double grad_threshold = 2e-4;
    double percent_dense = 0.01;
    double split_scale_divisor = 1.6;
    double max_screen_radius = 256.0;
};

/// Running per-element statistics between densification steps.
struct GradStats {
    std::vector<double> grad_norm_sum;   // NDC-scaled |dL/dmean2d|
    std::vector<std::size_t> count;
    std::vector<double> max_radius;
    std::vector<Vec3> position_grad_sum;

    void reset(std::size_t n);
    /// Folds one view's backward result in (only visible elements).
    void add(const BackwardResult& result, const Camera& cam, std::span<const double> position_grads);
    double mean_grad(std::size_t i) const { return count[i] ? grad_norm_sum[i] / static_cast<double>(count[i]) : 0.0; }
};

struct DensifyResult {
    Scene scene;
    /// For each output element: index of the element it came from in the input.
    std::vector<std::size_t> source;
    /// True when the element is new (clone or split child) and starts with fresh optimizer state.
    std::vector<unsigned char> fresh;
    std::size_t cloned = 0;
    std::size_t split = 0;
    std::size_t removed = 0;
};

/// Clone small high-gradient elements (offset along the descent direction),
/// split large ones into two children with scale / 1.6, and drop elements
/// whose projected radius exceeded cfg.max_screen_radius. No opacity pruning.
DensifyResult densify(const Scene& scene, const GradStats& stats, const DensifyConfig& cfg, double scene_extent,
                      std::uint64_t seed);

/// Carries optimizer moments across a densify step.
void remap_adam_state(AdamState& state, const ParamView& before, const ParamView& after, const DensifyResult& result);

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct Dataset {
    std::vector<Camera> cameras;
    std::vector<Image> images;
};

struct TrainConfig {
    std::uint64_t seed = 0;
    WeightKind weight_kind = WeightKind::Lc;
    /// Overrides for the initial weight-model parameters.
    std::optional<double> sigma_init;
    std::optional<double> beta_init;
    int sh_degree_color = 3;
    int sh_degree_opacity = 3;
    std::size_t iterations = 2000;
    std::size_t initial_points = 100;
    double initial_opacity = 0.5;
    double initial_background_weight = 1.0;
    double initial_scale_fraction = 0.05;
    Vec3 background_color{0.0, 0.0, 0.0};
    Aabb init_bounds{{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}};
    LearningRates lr;
    DensifyConfig densify;
    bool densify_enabled = true;
    std::size_t eval_interval = 500;
    double ssim_lambda = kDefaultSsimLambda;
    RenderOptions render;  // footprint rules for training and evaluation
    std::string checkpoint_path;  // empty = none
    std::size_t checkpoint_interval = 0;
};

struct TrainLogEntry {
    std::size_t iteration = 0;
    double loss = 0.0;
    double psnr = 0.0;
    std::size_t elements = 0;
};

struct TrainResult {
    Scene scene;
    std::vector<TrainLogEntry> log;
};

/// Mean PSNR of double-precision WSR renders over the dataset views.
double dataset_psnr(const Scene& scene, const Dataset& data, const RenderOptions& opts);

/// Camera-center spread used to scale densification thresholds.
double camera_extent(std::span<const Camera> cameras);

/// Deterministic given config.seed. Starts from `initial` when provided,
/// otherwise from a random scene in config.init_bounds. Throws
/// std::invalid_argument on an empty or inconsistent dataset.
TrainResult train(const Dataset& data, const TrainConfig& config, const Scene* initial = nullptr,
                  const std::function<void(const TrainLogEntry&)>& on_log = {});

}  // namespace wsr
