#include "wsr/render.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "wsr/accumulator.hpp"
#include "wsr/sh.hpp"
#include "wsr/simd/raster_kernels.hpp"

namespace wsr {

namespace {

std::atomic<std::size_t> g_depth_order_calls{0};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void sort_by_depth(std::vector<PreparedSplat>& splats) {
    ++g_depth_order_calls;
    std::stable_sort(splats.begin(), splats.end(),
                     [](const PreparedSplat& a, const PreparedSplat& b) { return a.proj.depth < b.proj.depth; });
}

// Runs fn(band_index, y_begin, y_end) over contiguous row bands.
template <typename Fn>
void for_each_band(int height, int workers, Fn&& fn) {
    const int bands = std::max(1, std::min(workers, height));
    if (bands == 1) {
        fn(0, 0, height);
        return;
    }
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(bands));
    for (int b = 0; b < bands; ++b) {
        const int y0 = static_cast<int>(static_cast<long long>(height) * b / bands);
        const int y1 = static_cast<int>(static_cast<long long>(height) * (b + 1) / bands);
        threads.emplace_back([&fn, b, y0, y1] { fn(b, y0, y1); });
    }
}

template <typename Real>
std::size_t resolve_band(const simd::BandAccumulator<Real>& acc, const Scene& scene, Image& image) {
    std::size_t degenerate = 0;
    for (int y = acc.y_begin; y < acc.y_end; ++y) {
        for (int x = 0; x < acc.width; ++x) {
            const std::size_t i = acc.index(x, y);
            double mu = 0.0;
            std::array<double, 3> num{};
            double den = 0.0;
            if (acc.stable) {
                if (std::isfinite(acc.mu[i])) {
                    mu = acc.mu[i];
                    num = {double(acc.num_r[i]), double(acc.num_g[i]), double(acc.num_b[i])};
                    den = acc.den[i];
                }
            } else {
                num = {double(acc.num_r[i]) + double(acc.comp_r[i]), double(acc.num_g[i]) + double(acc.comp_g[i]),
                       double(acc.num_b[i]) + double(acc.comp_b[i])};
                den = double(acc.den[i]) + double(acc.comp_d[i]);
            }
            bool bad = false;
            const Vec3 c = weighted_quotient(mu, num, den, scene.background_color, scene.background_weight, &bad);
            degenerate += bad ? 1 : 0;
            image.set_pixel(x, y, {std::clamp(c.x, 0.0, 1.0), std::clamp(c.y, 0.0, 1.0), std::clamp(c.z, 0.0, 1.0)});
        }
    }
    return degenerate;
}

template <typename Real, typename Kernel>
std::size_t raster_wsr(const std::vector<PreparedSplat>& prepared, const Scene& scene, const Camera& cam,
                       Real alpha_floor, int workers, Kernel&& kernel, Image& image) {
    const bool stable = scene.weight_model.kind == WeightKind::Exp;
    const auto splats = simd::make_raster_splats<Real>(prepared, stable);
    std::vector<std::size_t> degenerate(static_cast<std::size_t>(std::max(1, workers)), 0);
    for_each_band(cam.height, workers, [&](int band, int y0, int y1) {
        simd::BandAccumulator<Real> acc;
        acc.reset(cam.width, y0, y1, stable);
        kernel(std::span<const simd::RasterSplat<Real>>(splats), alpha_floor, acc);
        degenerate[static_cast<std::size_t>(band)] = resolve_band(acc, scene, image);
    });
    return std::accumulate(degenerate.begin(), degenerate.end(), std::size_t{0});
}

}  // namespace

template <typename Real>
std::vector<simd::RasterSplat<Real>> simd::make_raster_splats(const std::vector<PreparedSplat>& splats, bool stable) {
    std::vector<simd::RasterSplat<Real>> out;
    out.reserve(splats.size());
    for (const PreparedSplat& s : splats) {
        if (!stable && s.weight == 0.0) continue;
        simd::RasterSplat<Real> r{};
        r.mean_x = static_cast<Real>(s.proj.mean2d.x);
        r.mean_y = static_cast<Real>(s.proj.mean2d.y);
        r.conic_a = static_cast<Real>(s.proj.conic.a);
        r.conic_b = static_cast<Real>(s.proj.conic.b);
        r.conic_c = static_cast<Real>(s.proj.conic.c);
        r.red = static_cast<Real>(s.color.x);
        r.green = static_cast<Real>(s.color.y);
        r.blue = static_cast<Real>(s.color.z);
        r.amplitude = static_cast<Real>(stable ? s.opacity : s.opacity * s.weight);
        r.exponent = static_cast<Real>(s.exponent);
        r.x0 = s.x0;
        r.x1 = s.x1;
        r.y0 = s.y0;
        r.y1 = s.y1;
        out.push_back(r);
    }
    return out;
}

template std::vector<simd::RasterSplat<float>> simd::make_raster_splats<float>(const std::vector<PreparedSplat>&, bool);
template std::vector<simd::RasterSplat<double>> simd::make_raster_splats<double>(const std::vector<PreparedSplat>&, bool);

void RenderOptions::validate() const {
    if (!(alpha_floor >= 0.0)) throw std::invalid_argument("alpha_floor must be >= 0");
}

int resolve_worker_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("WSR_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

double exp_weight_exponent(const WeightModel& model, double depth) {
    if (!(depth > 0.0)) throw std::invalid_argument("EXP weight needs depth > 0");
    return model.sigma * std::pow(depth, model.beta);
}

double weight_eval(const WeightModel& model, double depth, double lc_weight) {
    switch (model.kind) {
        case WeightKind::Dir: return 1.0;
        case WeightKind::Exp: return std::exp(-exp_weight_exponent(model, depth));
        case WeightKind::Lc: return std::max(0.0, 1.0 - depth / model.sigma) * lc_weight;
    }
    return 1.0;
}

std::vector<PreparedSplat> prepare_splats(const Scene& scene, const Camera& cam, const RenderOptions& opts) {
    const Vec3 center = cam.center();
    std::vector<PreparedSplat> out;
    out.reserve(scene.elements.size());
    for (std::size_t i = 0; i < scene.elements.size(); ++i) {
        const GaussianElement& e = scene.elements[i];
        PreparedSplat s;
        s.proj = project_gaussian(cam, e);
        if (!s.proj.visible) continue;
        s.index = i;
        s.view_dir = normalized(e.position - center);
        s.color = sh_eval_color(e.color_sh, s.view_dir);
        s.opacity = sh_eval_opacity(e.opacity_sh, s.view_dir);
        if (scene.weight_model.kind == WeightKind::Exp) {
            s.exponent = exp_weight_exponent(scene.weight_model, s.proj.depth);
            s.weight = std::exp(-s.exponent);
        } else {
            s.weight = weight_eval(scene.weight_model, s.proj.depth, e.lc_weight);
        }
        if (opts.clip_footprint) {
            const double r = s.proj.radius;
            s.x0 = std::max(0, static_cast<int>(std::ceil(s.proj.mean2d.x - r - 0.5)));
            s.x1 = std::min(cam.width, static_cast<int>(std::floor(s.proj.mean2d.x + r - 0.5)) + 1);
            s.y0 = std::max(0, static_cast<int>(std::ceil(s.proj.mean2d.y - r - 0.5)));
            s.y1 = std::min(cam.height, static_cast<int>(std::floor(s.proj.mean2d.y + r - 0.5)) + 1);
            if (s.x0 >= s.x1 || s.y0 >= s.y1) continue;
        } else {
            s.x0 = 0;
            s.x1 = cam.width;
            s.y0 = 0;
            s.y1 = cam.height;
        }
        out.push_back(s);
    }
    if (!opts.deterministic_order) {
        std::mt19937_64 rng(opts.shuffle_seed);
        std::shuffle(out.begin(), out.end(), rng);
    }
    return out;
}

Image render_wsr(const Scene& scene, const Camera& cam, const RenderOptions& opts, RenderStats* stats) {
    scene.validate();
    cam.validate();
    opts.validate();
    const int workers = resolve_worker_count(opts.workers);

    auto start = Clock::now();
    const auto prepared = prepare_splats(scene, cam, opts);
    const double project_seconds = seconds_since(start);

    Image image(cam.width, cam.height);
    start = Clock::now();
    std::size_t degenerate = 0;
    std::string kernel_name = "scalar-f64";
    if (opts.precision == Precision::F64) {
        degenerate = raster_wsr<double>(prepared, scene, cam, opts.alpha_floor, workers,
                                        [](auto splats, double floor, auto& acc) { simd::raster_band_scalar(splats, floor, acc); },
                                        image);
    } else {
        const simd::RasterBandF32 kernel = simd::select_raster_f32(opts.kernel, &kernel_name);
        degenerate = raster_wsr<float>(prepared, scene, cam, static_cast<float>(opts.alpha_floor), workers, kernel, image);
    }
    if (stats) {
        stats->visible = prepared.size();
        stats->degenerate_pixels = degenerate;
        stats->project_seconds = project_seconds;
        stats->sort_seconds = 0.0;
        stats->raster_seconds = seconds_since(start);
        stats->sorted = false;
        stats->kernel = kernel_name;
    }
    return image;
}

Image render_sorted_reference(const Scene& scene, const Camera& cam, const RenderOptions& opts, RenderStats* stats) {
    scene.validate();
    cam.validate();
    opts.validate();

    auto start = Clock::now();
    RenderOptions ordered = opts;
    ordered.deterministic_order = true;
    auto splats = prepare_splats(scene, cam, ordered);
    const double project_seconds = seconds_since(start);

    start = Clock::now();
    sort_by_depth(splats);
    const double sort_seconds = seconds_since(start);

    start = Clock::now();
    const std::size_t n = static_cast<std::size_t>(cam.width) * static_cast<std::size_t>(cam.height);
    std::vector<double> transmittance(n, 1.0);
    std::vector<unsigned char> done(n, 0);
    Image image(cam.width, cam.height);
    for (const PreparedSplat& s : splats) {
        for (int y = s.y0; y < s.y1; ++y) {
            const double dy = y + 0.5 - s.proj.mean2d.y;
            for (int x = s.x0; x < s.x1; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * static_cast<std::size_t>(cam.width) + static_cast<std::size_t>(x);
                if (done[p]) continue;
                const double dx = x + 0.5 - s.proj.mean2d.x;
                const double power = -0.5 * (s.proj.conic.a * dx * dx + s.proj.conic.c * dy * dy) - s.proj.conic.b * dx * dy;
                const double alpha = std::min(0.99, s.opacity * std::exp(power));
                if (alpha < opts.alpha_floor || !(alpha >= 0.0)) continue;
                const double next = transmittance[p] * (1.0 - alpha);
                if (next < 1e-4) {
                    done[p] = 1;
                    continue;
                }
                const double w = alpha * transmittance[p];
                const std::size_t o = p * 3;
                image.pixels[o] += w * s.color.x;
                image.pixels[o + 1] += w * s.color.y;
                image.pixels[o + 2] += w * s.color.z;
                transmittance[p] = next;
            }
        }
    }
    const Vec3& bg = scene.background_color;
    for (std::size_t p = 0; p < n; ++p) {
        const std::size_t o = p * 3;
        image.pixels[o] = std::clamp(image.pixels[o] + transmittance[p] * bg.x, 0.0, 1.0);
        image.pixels[o + 1] = std::clamp(image.pixels[o + 1] + transmittance[p] * bg.y, 0.0, 1.0);
        image.pixels[o + 2] = std::clamp(image.pixels[o + 2] + transmittance[p] * bg.z, 0.0, 1.0);
    }
    if (stats) {
        stats->visible = splats.size();
        stats->degenerate_pixels = 0;
        stats->project_seconds = project_seconds;
        stats->sort_seconds = sort_seconds;
        stats->raster_seconds = seconds_since(start);
        stats->sorted = true;
        stats->kernel = "scalar-f64";
    }
    return image;
}

std::vector<std::size_t> depth_order(const Scene& scene, const Camera& cam) {
    RenderOptions all_visible;
    all_visible.clip_footprint = false;
    auto splats = prepare_splats(scene, cam, all_visible);
    sort_by_depth(splats);
    std::vector<std::size_t> order;
    order.reserve(splats.size());
    for (const PreparedSplat& s : splats) order.push_back(s.index);
    return order;
}

std::size_t depth_order_call_count() { return g_depth_order_calls.load(); }

}  // namespace wsr
