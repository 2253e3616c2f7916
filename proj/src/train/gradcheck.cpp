#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wsr/train.hpp"

namespace wsr {

BackwardOptions gradcheck_options(double ssim_lambda) {
    BackwardOptions opts;
    opts.render.precision = Precision::F64;
    opts.render.alpha_floor = 0.0;
    opts.render.clip_footprint = false;
    opts.ssim_lambda = ssim_lambda;
    return opts;
}

Image gradcheck_target(const Scene& scene, const Camera& cam, const Image& reference, double margin,
                       const BackwardOptions& opts) {
    RenderOptions ro = opts.render;
    ro.precision = Precision::F64;
    Image t = render_wsr(scene, cam, ro);
    if (!t.same_size(reference)) throw std::invalid_argument("reference image does not match the camera");
    for (std::size_t i = 0; i < t.pixels.size(); ++i) t.pixels[i] += reference.pixels[i] >= t.pixels[i] ? margin : -margin;
    return t;
}

FdReport finite_diff_check(const Scene& scene, const Camera& cam, const Image& target,
                           std::span<const std::size_t> slots, std::span<const double> analytic, double rel_step,
                           const BackwardOptions& opts) {
    const ParamView view(scene);
    if (analytic.size() != view.size()) throw std::invalid_argument("analytic gradient does not match the scene layout");
    if (!(rel_step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");

    FdReport report;
    Scene probe = scene;
    for (std::size_t n = 0; n < slots.size(); ++n) {
        const std::size_t idx = slots[n];
        if (idx >= view.size()) throw std::out_of_range("finite-difference slot out of range");
        const double x = view.get(scene, idx);
        const double h = rel_step * std::max(1.0, std::abs(x));
        view.set(probe, idx, x + h);
        const double up = evaluate_loss(probe, cam, target, opts);
        view.set(probe, idx, x - h);
        const double down = evaluate_loss(probe, cam, target, opts);
        view.set(probe, idx, x);

        FdSlotResult r;
        r.index = idx;
        r.slot = view.slot(idx);
        r.analytic = analytic[idx];
        r.numeric = (up - down) / (2.0 * h);
        const double mag = std::max(std::abs(r.analytic), std::abs(r.numeric));
        const double diff = std::abs(r.analytic - r.numeric);
        r.error = mag < 1e-8 ? diff : diff / mag;
        if (report.slots.empty() || r.error > report.max_error) {
            report.max_error = r.error;
            report.worst = n;
        }
        report.slots.push_back(r);
    }
    return report;
}

FdReport finite_diff_check(const Scene& scene, const Camera& cam, const Image& target,
                           std::span<const std::size_t> slots, double rel_step, const BackwardOptions& opts) {
    const BackwardResult b = backward_wsr(scene, cam, target, opts);
    return finite_diff_check(scene, cam, target, slots, b.grads.values, rel_step, opts);
}

}  // namespace wsr
