#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "wsr/camera.hpp"
#include "wsr/image.hpp"
#include "wsr/scene.hpp"
#include "wsr/synth.hpp"
#include "wsr/train.hpp"

namespace wsr::test {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Quat random_quat(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Quat q{n(rng), n(rng), n(rng), n(rng)};
    const double s = norm(q);
    return {q.w / s, q.x / s, q.y / s, q.z / s};
}

// Splats near the origin with every SH band and weight parameter populated.
inline Scene random_scene(std::mt19937_64& rng, std::size_t n, WeightModel model, int deg_color, int deg_opacity) {
    Scene s;
    s.weight_model = model;
    s.sh_degree_color = deg_color;
    s.sh_degree_opacity = deg_opacity;
    s.background_color = {uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)};
    s.background_weight = uniform(rng, 0.05, 0.5);
    for (std::size_t i = 0; i < n; ++i) {
        GaussianElement e = s.make_element();
        e.position = {uniform(rng, -0.6, 0.6), uniform(rng, -0.6, 0.6), uniform(rng, -0.6, 0.6)};
        e.rotation = random_quat(rng);
        for (std::size_t k = 0; k < 3; ++k) e.log_scale[k] = std::log(uniform(rng, 0.12, 0.35));
        for (int c = 0; c < 3; ++c) {
            e.color_sh(c, 0) = uniform(rng, -1.2, 1.2);
            for (std::size_t k = 1; k < e.color_sh.basis_count(); ++k) e.color_sh(c, k) = uniform(rng, -0.2, 0.2);
        }
        e.opacity_sh(0, 0) = uniform(rng, 1.0, 3.0);
        for (std::size_t k = 1; k < e.opacity_sh.basis_count(); ++k) e.opacity_sh(0, k) = uniform(rng, -0.2, 0.2);
        e.lc_weight = uniform(rng, 0.3, 1.5);
        s.elements.push_back(e);
    }
    return s;
}

inline Camera random_camera(std::mt19937_64& rng, int width, int height) {
    return orbit_camera(uniform(rng, -3.14, 3.14), uniform(rng, -0.6, 0.6), uniform(rng, 2.5, 4.0), width, height,
                        uniform(rng, 0.6, 0.9));
}

inline Image random_image(std::mt19937_64& rng, int width, int height) {
    Image img(width, height);
    for (double& v : img.pixels) v = uniform(rng, 0, 1);
    return img;
}

struct GradientCase {
    Scene scene;
    Camera camera;
    Image target;
};

// A small scene, a camera, and a target
// offset from the current render so the L1 term is smooth there.
inline GradientCase random_gradient_case(std::mt19937_64& rng, WeightKind kind, int deg_color = 1, int deg_opacity = 1) {
    WeightModel m = WeightModel::initial(kind);
    if (kind == WeightKind::Exp) m = WeightModel::exp(uniform(rng, 0.05, 0.4), uniform(rng, 0.6, 1.2));
    if (kind == WeightKind::Lc) m = WeightModel::lc(uniform(rng, 5.0, 12.0));
    GradientCase c;
    c.scene = random_scene(rng, 4 + rng() % 3, m, deg_color, deg_opacity);
    c.camera = random_camera(rng, 16, 14);
    c.target = gradcheck_target(c.scene, c.camera, random_image(rng, 16, 14), 0.1);
    return c;
}

}  // namespace wsr::test
