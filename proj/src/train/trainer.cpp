#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "wsr/io.hpp"
#include "wsr/metrics.hpp"
#include "wsr/train.hpp"

namespace wsr {

namespace {

void check_dataset(const Dataset& data) {
    if (data.cameras.empty()) throw std::invalid_argument("training needs at least one view");
    if (data.cameras.size() != data.images.size())
        throw std::invalid_argument("dataset has " + std::to_string(data.cameras.size()) + " cameras but " +
                                    std::to_string(data.images.size()) + " images");
    for (std::size_t i = 0; i < data.cameras.size(); ++i) {
        const Camera& c = data.cameras[i];
        c.validate();
        if (data.images[i].width != c.width || data.images[i].height != c.height)
            throw std::invalid_argument("image size does not match camera " + c.id);
    }
}

// Keeps the scene inside the domain the renderer accepts after an update.
void project_to_domain(Scene& scene) {
    scene.background_weight = std::max(0.0, scene.background_weight);
    WeightModel& wm = scene.weight_model;
    if (wm.kind != WeightKind::Dir) wm.sigma = std::max(wm.sigma, 1e-6);
    if (wm.kind == WeightKind::Exp) wm.beta = std::max(wm.beta, 1e-3);
    for (GaussianElement& e : scene.elements)
        if (!(norm(e.rotation) > 1e-6)) e.rotation = Quat{};
}

}  // namespace

double camera_extent(std::span<const Camera> cameras) {
    if (cameras.empty()) return 1.0;
    Vec3 mean;
    for (const Camera& c : cameras) mean += c.center();
    mean *= 1.0 / static_cast<double>(cameras.size());
    double r = 0.0;
    for (const Camera& c : cameras) r = std::max(r, norm(c.center() - mean));
    return r > 0.0 ? 1.1 * r : 1.0;
}

double dataset_psnr(const Scene& scene, const Dataset& data, const RenderOptions& opts) {
    check_dataset(data);
    double sum = 0.0;
    for (std::size_t i = 0; i < data.cameras.size(); ++i) sum += psnr(render_wsr(scene, data.cameras[i], opts), data.images[i]);
    return sum / static_cast<double>(data.cameras.size());
}

TrainResult train(const Dataset& data, const TrainConfig& config, const Scene* initial,
                  const std::function<void(const TrainLogEntry&)>& on_log) {
    check_dataset(data);
    TrainResult result;
    if (initial) {
        initial->validate();
        result.scene = *initial;
    } else {
        RandomSceneOptions ro;
        ro.weight_kind = config.weight_kind;
        ro.sh_degree_color = config.sh_degree_color;
        ro.sh_degree_opacity = config.sh_degree_opacity;
        ro.initial_opacity = config.initial_opacity;
        ro.background_weight = config.initial_background_weight;
        ro.background_color = config.background_color;
        ro.scale_fraction = config.initial_scale_fraction;
        result.scene = scene_new_random(config.initial_points, config.init_bounds, config.seed, ro);
        if (config.sigma_init) result.scene.weight_model.sigma = *config.sigma_init;
        if (config.beta_init) result.scene.weight_model.beta = *config.beta_init;
        result.scene.validate();
    }
    Scene& scene = result.scene;

    BackwardOptions bo;
    bo.render = config.render;
    bo.render.precision = Precision::F64;
    bo.ssim_lambda = config.ssim_lambda;
    RenderOptions eval_opts = config.render;

    auto log_entry = [&](std::size_t it, double loss_value) {
        TrainLogEntry entry{it, loss_value, dataset_psnr(scene, data, eval_opts), scene.elements.size()};
        result.log.push_back(entry);
        if (on_log) on_log(entry);
    };
    if (config.iterations == 0) return result;

    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(data.cameras.size());
    std::size_t cursor = order.size();
    const double extent = camera_extent(data.cameras);
    AdamState adam;
    GradStats stats;
    stats.reset(scene.elements.size());
    double running = 0.0;
    std::size_t running_n = 0;

    for (std::size_t it = 1; it <= config.iterations; ++it) {
        if (cursor == order.size()) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::shuffle(order.begin(), order.end(), rng);
            cursor = 0;
        }
        const std::size_t view = order[cursor++];
        const Camera& cam = data.cameras[view];
        const BackwardResult b = backward_wsr(scene, cam, data.images[view], bo);
        running += b.loss;
        ++running_n;

        const bool densifying = config.densify_enabled && it <= config.densify.stop;
        if (densifying) stats.add(b, cam, b.grads.values);
        adam_step(scene, b.grads, adam, config.lr);
        project_to_domain(scene);

        if (densifying && it >= config.densify.start && config.densify.interval > 0 && it % config.densify.interval == 0) {
            DensifyResult d = densify(scene, stats, config.densify, extent, config.seed + it);
            if (!d.scene.elements.empty()) {
                const ParamView before(scene), after(d.scene);
                remap_adam_state(adam, before, after, d);
                scene = std::move(d.scene);
            }
            stats.reset(scene.elements.size());
        }

        if (!config.checkpoint_path.empty() && config.checkpoint_interval > 0 && it % config.checkpoint_interval == 0)
            save_ply(scene, config.checkpoint_path);
        if ((config.eval_interval > 0 && it % config.eval_interval == 0) || it == config.iterations) {
            log_entry(it, running / static_cast<double>(running_n));
            running = 0.0;
            running_n = 0;
        }
    }
    return result;
}

}  // namespace wsr
