#include "wsr/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "wsr/io.hpp"
#include "wsr/render.hpp"

namespace wsr {

namespace {

double degrees(double d) { return d * std::numbers::pi / 180.0; }

GaussianElement flat_element(const Scene& scene, const Vec3& pos, const Vec3& rgb, double opacity, double scale) {
    GaussianElement e = scene.make_element();
    e.position = pos;
    e.log_scale = {std::log(scale), std::log(scale), std::log(scale)};
    for (int c = 0; c < 3; ++c) e.color_sh(c, 0) = (rgb[static_cast<std::size_t>(c)] - 0.5) / kShC0;
    e.opacity_sh(0, 0) = opacity / kShC0;
    return e;
}

void render_targets(SynthData& data) {
    RenderOptions opts;
    opts.precision = Precision::F64;
    data.images.clear();
    for (const Camera& cam : data.cameras) data.images.push_back(render_sorted_reference(data.scene, cam, opts));
}

}  // namespace

Camera orbit_camera(double azimuth, double elevation, double radius, int width, int height, double fov_y) {
    const Vec3 eye{radius * std::cos(elevation) * std::sin(azimuth), radius * std::sin(elevation),
                   radius * std::cos(elevation) * std::cos(azimuth)};
    return Camera::look_at(eye, {0.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, width, height, fov_y);
}

SynthData synth_two_splat() {
    SynthData data;
    Scene& s = data.scene;
    s.sh_degree_color = 0;
    s.sh_degree_opacity = 0;
    s.weight_model = WeightModel::lc(10.0);
    s.background_color = {0.5, 0.5, 0.5};
    s.background_weight = 1.0;
    s.elements.push_back(flat_element(s, {0.05, 0.0, 0.0}, {1.0, 1.0, 1.0}, 0.95, 0.3));
    s.elements.push_back(flat_element(s, {-0.05, 0.0, 0.0}, {0.0, 0.0, 0.0}, 0.95, 0.3));
    // Depths tie at azimuth 0 (frame 30).
    for (std::size_t k = 0; k < kTwoSplatFrames; ++k) {
        const double az = degrees(-30.0 + static_cast<double>(k));
        Camera cam = orbit_camera(az, 0.0, 3.0, 64, 64, degrees(40.0));
        cam.id = "frame_" + std::to_string(k);
        data.cameras.push_back(cam);
    }
    render_targets(data);
    return data;
}

SynthData synth_toy20(std::uint64_t seed) {
    SynthData data;
    Scene& s = data.scene;
    s.sh_degree_color = 0;
    s.sh_degree_opacity = 0;
    s.weight_model = WeightModel::lc(10.0);
    s.background_color = {0.0, 0.0, 0.0};
    s.background_weight = 1.0;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    for (int i = 0; i < 20; ++i) {
        const Vec3 pos{uniform(-0.8, 0.8), uniform(-0.8, 0.8), uniform(-0.8, 0.8)};
        const Vec3 rgb{uniform(0.1, 0.9), uniform(0.1, 0.9), uniform(0.1, 0.9)};
        GaussianElement e = flat_element(s, pos, rgb, uniform(0.6, 0.95), 1.0);
        e.log_scale = {std::log(uniform(0.06, 0.18)), std::log(uniform(0.06, 0.18)), std::log(uniform(0.06, 0.18))};
        Quat q{normal(rng), normal(rng), normal(rng), normal(rng)};
        const double n = norm(q);
        e.rotation = {q.w / n, q.x / n, q.y / n, q.z / n};
        s.elements.push_back(e);
    }
    for (int k = 0; k < 12; ++k) {
        Camera cam = orbit_camera(degrees(30.0 * k), degrees(15.0), 3.5, 64, 64, degrees(45.0));
        cam.id = "view_" + std::to_string(k);
        data.cameras.push_back(cam);
    }
    render_targets(data);
    return data;
}

SynthData synth_preset(const std::string& name) {
    if (name == "two-splat") return synth_two_splat();
    if (name == "toy20") return synth_toy20();
    throw std::invalid_argument("unknown synth preset '" + name + "' (expected two-splat or toy20)");
}

void write_synth(const SynthData& data, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "images");
    save_ply(data.scene, dir / "scene.ply");
    save_cameras(data.cameras, dir / "cameras.json");
    for (std::size_t i = 0; i < data.images.size(); ++i) write_image(data.images[i], dir / "images" / (data.cameras[i].id + ".png"));
}

}  // namespace wsr
