#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "wsr/covariance.hpp"
#include "wsr/train.hpp"

namespace wsr {

void GradStats::reset(std::size_t n) {
    grad_norm_sum.assign(n, 0.0);
    count.assign(n, 0);
    max_radius.assign(n, 0.0);
    position_grad_sum.assign(n, Vec3{});
}

void GradStats::add(const BackwardResult& result, const Camera& cam, std::span<const double> position_grads) {
    const std::size_t n = grad_norm_sum.size();
    if (result.visible.size() != n) throw std::invalid_argument("gradient statistics size mismatch");
    const std::size_t stride = n ? position_grads.size() / n : 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!result.visible[i]) continue;
        const double gx = result.mean2d_grad[i].x * 0.5 * cam.width;
        const double gy = result.mean2d_grad[i].y * 0.5 * cam.height;
        grad_norm_sum[i] += std::sqrt(gx * gx + gy * gy);
        ++count[i];
        max_radius[i] = std::max(max_radius[i], result.radius[i]);
        if (stride >= 3) {
            const double* g = position_grads.data() + i * stride;
            position_grad_sum[i] += Vec3{g[0], g[1], g[2]};
        }
    }
}

DensifyResult densify(const Scene& scene, const GradStats& stats, const DensifyConfig& cfg, double scene_extent,
                      std::uint64_t seed) {
    const std::size_t n = scene.elements.size();
    if (stats.count.size() != n) throw std::invalid_argument("gradient statistics do not match the scene");
    if (!(cfg.split_scale_divisor > 1.0)) throw std::invalid_argument("split_scale_divisor must exceed 1");

    DensifyResult out;
    out.scene = scene;
    out.scene.elements.clear();
    std::vector<GaussianElement> clones, children;
    std::vector<std::size_t> clone_src, child_src;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double dense_limit = cfg.percent_dense * scene_extent;
    const double log_div = std::log(cfg.split_scale_divisor);

    for (std::size_t i = 0; i < n; ++i) {
        const GaussianElement& e = scene.elements[i];
        if (stats.max_radius[i] > cfg.max_screen_radius) {
            ++out.removed;
            continue;
        }
        const bool hot = stats.count[i] > 0 && stats.mean_grad(i) >= cfg.grad_threshold;
        const Vec3 scale{std::exp(e.log_scale.x), std::exp(e.log_scale.y), std::exp(e.log_scale.z)};
        const double max_scale = std::max({scale.x, scale.y, scale.z});
        if (hot && max_scale > dense_limit) {
            const Mat3 r = rotation_from_unit_quat(normalize_quat(e.rotation));
            for (int c = 0; c < 2; ++c) {
                GaussianElement child = e;
                const Vec3 local{normal(rng) * scale.x, normal(rng) * scale.y, normal(rng) * scale.z};
                child.position = e.position + r * local;
                child.log_scale = e.log_scale - Vec3{log_div, log_div, log_div};
                children.push_back(child);
                child_src.push_back(i);
            }
            ++out.split;
            continue;
        }
        out.scene.elements.push_back(e);
        out.source.push_back(i);
        out.fresh.push_back(0);
        if (hot) {
            GaussianElement clone = e;
            const Vec3 g = stats.position_grad_sum[i];
            const double gn = norm(g);
            if (gn > 0.0) clone.position = e.position - g * (0.5 * max_scale / gn);
            clones.push_back(clone);
            clone_src.push_back(i);
            ++out.cloned;
        }
    }
    for (std::size_t k = 0; k < clones.size(); ++k) {
        out.scene.elements.push_back(clones[k]);
        out.source.push_back(clone_src[k]);
        out.fresh.push_back(1);
    }
    for (std::size_t k = 0; k < children.size(); ++k) {
        out.scene.elements.push_back(children[k]);
        out.source.push_back(child_src[k]);
        out.fresh.push_back(1);
    }
    return out;
}

}  // namespace wsr
