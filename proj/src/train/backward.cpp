#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "wsr/accumulator.hpp"
#include "wsr/covariance.hpp"
#include "wsr/sh.hpp"
#include "wsr/simd/raster_kernels.hpp"
#include "wsr/train.hpp"

namespace wsr {

namespace {

constexpr int kBlockRows = 16;

// fn(i) for i in [0, n), items handed out in order to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
}

double log_add_exp(double a, double b) {
    const double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

PixelSums sums_from(const simd::BandAccumulator<double>& acc, std::size_t i, const Scene& scene) {
    PixelSums p;
    if (acc.stable) {
        if (std::isfinite(acc.mu[i])) {
            p.mu = acc.mu[i];
            p.num = {acc.num_r[i], acc.num_g[i], acc.num_b[i]};
            p.den = acc.den[i];
        }
    } else {
        p.num = {acc.num_r[i] + acc.comp_r[i], acc.num_g[i] + acc.comp_g[i], acc.num_b[i] + acc.comp_b[i]};
        p.den = acc.den[i] + acc.comp_d[i];
    }
    bool bad = false;
    p.color = weighted_quotient(p.mu, p.num, p.den, scene.background_color, scene.background_weight, &bad);
    p.degenerate = bad;
    if (bad) return p;

    // -log(w_B + sum a w) in the natural frame.
    const double wb = scene.background_weight;
    double log_total_normalized;
    if (wb == 0.0)
        log_total_normalized = std::log(p.den);
    else if (p.den > 0.0)
        log_total_normalized = log_add_exp(std::log(wb) + p.mu, std::log(p.den));
    else if (p.den == 0.0)
        log_total_normalized = std::log(wb) + p.mu;
    else
        log_total_normalized = std::log(wb * std::exp(p.mu) + p.den);
    p.log_inv_total = p.mu - log_total_normalized;
    return p;
}

struct SplatGrad {
    double mean_x = 0, mean_y = 0;
    double conic_a = 0, conic_b = 0, conic_c = 0;
    double opacity = 0;
    std::array<double, 3> color{};
    double weight = 0;  // dL/dw (DIR, LC) or dL/d exponent (EXP)
};

struct GlobalGrad {
    double sigma = 0, beta = 0;
};

// Per-pixel inputs to the gradient pass.
struct PixelGrad {
    std::array<double, 3> g{};  // dL/dr, zero where the output was clamped
    double log_inv_total = 0;
    bool active = false;
};

SplatGrad accumulate_splat(const PreparedSplat& s, const std::vector<PixelGrad>& pixels, const std::vector<PixelSums>& sums,
                           int width, double alpha_floor, bool stable) {
    SplatGrad out;
    const double u = s.opacity;
    for (int y = s.y0; y < s.y1; ++y) {
        const double dy = y + 0.5 - s.proj.mean2d.y;
        for (int x = s.x0; x < s.x1; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
            const PixelGrad& pg = pixels[p];
            if (!pg.active) continue;
            const double dx = x + 0.5 - s.proj.mean2d.x;
            const double power = -0.5 * (s.proj.conic.a * dx * dx + s.proj.conic.c * dy * dy) - s.proj.conic.b * dx * dy;
            const double g = std::exp(power);
            if (g < alpha_floor) continue;

            const Vec3& r = sums[p].color;
            const double q = pg.g[0] * (s.color.x - r.x) + pg.g[1] * (s.color.y - r.y) + pg.g[2] * (s.color.z - r.z);
            // w / W in the natural frame
            const double wr = stable ? std::exp(pg.log_inv_total - s.exponent) : s.weight * std::exp(pg.log_inv_total);
            const double alpha = u * g;

            out.opacity += q * g * wr;
            for (std::size_t l = 0; l < 3; ++l) out.color[l] += pg.g[l] * alpha * wr;
            if (stable)
                out.weight -= q * alpha * wr;
            else
                out.weight += q * alpha * std::exp(pg.log_inv_total);

            const double dg = q * u * wr * g;  // dL/d power
            out.mean_x += dg * (s.proj.conic.a * dx + s.proj.conic.b * dy);
            out.mean_y += dg * (s.proj.conic.b * dx + s.proj.conic.c * dy);
            out.conic_a += -0.5 * dg * dx * dx;
            out.conic_b += -dg * dx * dy;
            out.conic_c += -0.5 * dg * dy * dy;
        }
    }
    return out;
}

// 2x3 matrix helpers for the projection Jacobian.
struct Mat23 {
    double m[2][3] = {};
};

// Chains one splat's screen-space gradient to its element parameters.
GlobalGrad chain_to_params(const PreparedSplat& s, const SplatGrad& sg, const Scene& scene, const Camera& cam,
                           const ParamView& view, std::span<double> grads) {
    const GaussianElement& e = scene.elements[s.index];
    const std::size_t base = s.index * view.element_stride();
    double* gp = grads.data() + base + view.class_offset(ParamClass::Position);
    double* gq = grads.data() + base + view.class_offset(ParamClass::Rotation);
    double* gs = grads.data() + base + view.class_offset(ParamClass::LogScale);
    double* gc = grads.data() + base + view.class_offset(ParamClass::ColorSh);
    double* go = grads.data() + base + view.class_offset(ParamClass::OpacitySh);
    double* gv = grads.data() + base + view.class_offset(ParamClass::LcWeight);
    GlobalGrad global;

    const Vec3 t = s.proj.cam_point;
    const double iz = 1.0 / t.z;
    Vec3 dt;

    // Weight model.
    const WeightModel& wm = scene.weight_model;
    const double d = s.proj.depth;
    if (wm.kind == WeightKind::Lc) {
        const double lin = 1.0 - d / wm.sigma;
        if (lin > 0.0) {
            gv[0] += sg.weight * lin;
            dt.z += sg.weight * (-e.lc_weight / wm.sigma);
            global.sigma += sg.weight * e.lc_weight * d / (wm.sigma * wm.sigma);
        }
    } else if (wm.kind == WeightKind::Exp) {
        const double db = std::pow(d, wm.beta);
        global.sigma += sg.weight * db;
        global.beta += sg.weight * wm.sigma * db * std::log(d);
        dt.z += sg.weight * wm.sigma * wm.beta * db / d;
    }

    // Mean.
    dt.x += sg.mean_x * cam.fx * iz;
    dt.y += sg.mean_y * cam.fy * iz;
    dt.z += -sg.mean_x * cam.fx * t.x * iz * iz - sg.mean_y * cam.fy * t.y * iz * iz;

    // Conic -> 2D covariance: G_cov = -K G_K K.
    const Sym2& k = s.proj.conic;
    const double gk00 = sg.conic_a, gk01 = 0.5 * sg.conic_b, gk11 = sg.conic_c;
    // T = G_K K
    const double t00 = gk00 * k.a + gk01 * k.b, t01 = gk00 * k.b + gk01 * k.c;
    const double t10 = gk01 * k.a + gk11 * k.b, t11 = gk01 * k.b + gk11 * k.c;
    const double c00 = -(k.a * t00 + k.b * t10);
    const double c01 = -(k.a * t01 + k.b * t11);
    const double c11 = -(k.b * t01 + k.c * t11);
    const double gcov[2][2] = {{c00, c01}, {c01, c11}};

    // Rebuild the forward chain.
    const Vec3 scale{std::exp(e.log_scale.x), std::exp(e.log_scale.y), std::exp(e.log_scale.z)};
    const double qn = norm(e.rotation);
    const Quat q = normalize_quat(e.rotation);
    const Mat3 rq = rotation_from_unit_quat(q);
    Mat3 m = rq;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) *= scale[static_cast<std::size_t>(j)];
    const Mat3 sigma = m * transpose(m);
    const Mat3& rc = cam.rotation;
    const Mat3 v = rc * sigma * transpose(rc);

    Mat23 jac;
    jac.m[0][0] = cam.fx * iz;
    jac.m[0][2] = -cam.fx * t.x * iz * iz;
    jac.m[1][1] = cam.fy * iz;
    jac.m[1][2] = -cam.fy * t.y * iz * iz;

    // G_V = J^T G_cov J
    Mat3 gv3;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            double acc = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) acc += jac.m[i][a] * gcov[i][j] * jac.m[j][b];
            gv3(a, b) = acc;
        }
    // G_J = 2 G_cov J V
    Mat23 jv;
    for (int i = 0; i < 2; ++i)
        for (int b = 0; b < 3; ++b) {
            double acc = 0.0;
            for (int a = 0; a < 3; ++a) acc += jac.m[i][a] * v(a, b);
            jv.m[i][b] = acc;
        }
    Mat23 gj;
    for (int i = 0; i < 2; ++i)
        for (int b = 0; b < 3; ++b) gj.m[i][b] = 2.0 * (gcov[i][0] * jv.m[0][b] + gcov[i][1] * jv.m[1][b]);

    dt.x += gj.m[0][2] * (-cam.fx * iz * iz);
    dt.y += gj.m[1][2] * (-cam.fy * iz * iz);
    dt.z += gj.m[0][0] * (-cam.fx * iz * iz) + gj.m[0][2] * (2.0 * cam.fx * t.x * iz * iz * iz) +
            gj.m[1][1] * (-cam.fy * iz * iz) + gj.m[1][2] * (2.0 * cam.fy * t.y * iz * iz * iz);

    // World covariance, then M = R S.
    const Mat3 gsigma = transpose(rc) * gv3 * rc;
    const Mat3 gm = gsigma * m;  // times 2 below
    Mat3 grq;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double g = 2.0 * gm(i, j);
            grq(i, j) = g * scale[static_cast<std::size_t>(j)];
            gs[j] += g * rq(i, j) * scale[static_cast<std::size_t>(j)];
        }

    const double w = q.w, x = q.x, y = q.y, z = q.z;
    const auto& G = grq;
    const double dw = 2.0 * (-z * G(0, 1) + y * G(0, 2) + z * G(1, 0) - x * G(1, 2) - y * G(2, 0) + x * G(2, 1));
    const double dx = 2.0 * (y * G(0, 1) + z * G(0, 2) + y * G(1, 0) - 2.0 * x * G(1, 1) - w * G(1, 2) + z * G(2, 0) +
                             w * G(2, 1) - 2.0 * x * G(2, 2));
    const double dy = 2.0 * (-2.0 * y * G(0, 0) + x * G(0, 1) + w * G(0, 2) + x * G(1, 0) + z * G(1, 2) - w * G(2, 0) +
                             z * G(2, 1) - 2.0 * y * G(2, 2));
    const double dz = 2.0 * (-2.0 * z * G(0, 0) - w * G(0, 1) + x * G(0, 2) + w * G(1, 0) - 2.0 * z * G(1, 1) +
                             y * G(1, 2) + x * G(2, 0) + y * G(2, 1));
    const double proj_dot = w * dw + x * dx + y * dy + z * dz;
    gq[0] += (dw - w * proj_dot) / qn;
    gq[1] += (dx - x * proj_dot) / qn;
    gq[2] += (dy - y * proj_dot) / qn;
    gq[3] += (dz - z * proj_dot) / qn;

    // SH: coefficients and view direction.
    const int dc = scene.sh_degree_color, dop = scene.sh_degree_opacity;
    const ShBasisJacobian jb = sh_basis_jacobian(std::max(dc, dop), s.view_dir);
    const std::size_t nc = sh_basis_count(dc), no = sh_basis_count(dop);
    Vec3 ddir;
    for (int ch = 0; ch < 3; ++ch) {
        double raw = 0.5;
        for (std::size_t kk = 0; kk < nc; ++kk) raw += e.color_sh(ch, kk) * jb.value[kk];
        if (raw < 0.0) continue;
        const double g = sg.color[static_cast<std::size_t>(ch)];
        for (std::size_t kk = 0; kk < nc; ++kk) {
            gc[static_cast<std::size_t>(ch) * nc + kk] += g * jb.value[kk];
            ddir.x += g * e.color_sh(ch, kk) * jb.dx[kk];
            ddir.y += g * e.color_sh(ch, kk) * jb.dy[kk];
            ddir.z += g * e.color_sh(ch, kk) * jb.dz[kk];
        }
    }
    for (std::size_t kk = 0; kk < no; ++kk) {
        go[kk] += sg.opacity * jb.value[kk];
        ddir.x += sg.opacity * e.opacity_sh(0, kk) * jb.dx[kk];
        ddir.y += sg.opacity * e.opacity_sh(0, kk) * jb.dy[kk];
        ddir.z += sg.opacity * e.opacity_sh(0, kk) * jb.dz[kk];
    }
    const double dist = norm(e.position - cam.center());
    const Vec3 dp_dir = (ddir - s.view_dir * dot(s.view_dir, ddir)) * (1.0 / dist);

    const Vec3 dp = transpose(rc) * dt + dp_dir;
    gp[0] += dp.x;
    gp[1] += dp.y;
    gp[2] += dp.z;
    return global;
}

void check_finite(std::span<const double> grads, const ParamView& view) {
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (std::isfinite(grads[i])) continue;
        const ParamSlot slot = view.slot(i);
        std::string where = std::string(to_string(slot.cls));
        if (slot.cls != ParamClass::Sigma && slot.cls != ParamClass::Beta && slot.cls != ParamClass::BackgroundWeight)
            where = "element " + std::to_string(slot.element) + " " + where;
        throw std::runtime_error("non-finite gradient at " + where + "[" + std::to_string(slot.component) + "]");
    }
}

}  // namespace

BackwardResult backward_wsr(const Scene& scene, const Camera& cam, const Image& target, const BackwardOptions& opts) {
    scene.validate();
    cam.validate();
    opts.render.validate();
    if (target.width != cam.width || target.height != cam.height)
        throw std::invalid_argument("target image size does not match camera " + cam.id);
    const int workers = resolve_worker_count(opts.render.workers);
    const bool stable = scene.weight_model.kind == WeightKind::Exp;

    BackwardResult result;
    const auto prepared = prepare_splats(scene, cam, opts.render);
    const auto raster = simd::make_raster_splats<double>(prepared, stable);

    // Pass 1: forward sums per pixel.
    const int width = cam.width, height = cam.height;
    const std::size_t npix = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    result.rendered = Image(width, height);
    result.pixel_sums.resize(npix);
    const std::size_t blocks = static_cast<std::size_t>((height + kBlockRows - 1) / kBlockRows);
    parallel_for(blocks, workers, [&](std::size_t b) {
        const int y0 = static_cast<int>(b) * kBlockRows;
        const int y1 = std::min(height, y0 + kBlockRows);
        simd::BandAccumulator<double> acc;
        acc.reset(width, y0, y1, stable);
        simd::raster_band_scalar(std::span<const simd::RasterSplat<double>>(raster), opts.render.alpha_floor, acc);
        for (int y = y0; y < y1; ++y)
            for (int x = 0; x < width; ++x) {
                const std::size_t p = static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
                PixelSums ps = sums_from(acc, acc.index(x, y), scene);
                result.rendered.set_pixel(x, y, {std::clamp(ps.color.x, 0.0, 1.0), std::clamp(ps.color.y, 0.0, 1.0),
                                                 std::clamp(ps.color.z, 0.0, 1.0)});
                result.pixel_sums[p] = ps;
            }
    });

    std::vector<double> dl_dimage(result.rendered.pixels.size());
    result.loss = loss_with_gradient(result.rendered, target, dl_dimage, opts.ssim_lambda);

    std::vector<PixelGrad> pixels(npix);
    double dwb = 0.0;
    const Vec3& cb = scene.background_color;
    for (std::size_t p = 0; p < npix; ++p) {
        const PixelSums& ps = result.pixel_sums[p];
        if (ps.degenerate) continue;
        PixelGrad& pg = pixels[p];
        bool any = false;
        for (std::size_t l = 0; l < 3; ++l) {
            const double r = ps.color[l];
            pg.g[l] = (r >= 0.0 && r <= 1.0) ? dl_dimage[p * 3 + l] : 0.0;
            any = any || pg.g[l] != 0.0;
        }
        if (!any) continue;
        pg.active = true;
        pg.log_inv_total = ps.log_inv_total;
        const double inv_total = std::exp(ps.log_inv_total);
        dwb += (pg.g[0] * (cb.x - ps.color.x) + pg.g[1] * (cb.y - ps.color.y) + pg.g[2] * (cb.z - ps.color.z)) * inv_total;
    }

    // Pass 2: splat-major, each splat owns its parameter slots.
    const ParamView view(scene);
    result.grads.values.assign(view.size(), 0.0);
    std::vector<GlobalGrad> globals(prepared.size());
    result.mean2d_grad.assign(scene.elements.size(), Vec2{});
    result.radius.assign(scene.elements.size(), 0.0);
    result.visible.assign(scene.elements.size(), 0);
    parallel_for(prepared.size(), workers, [&](std::size_t j) {
        const PreparedSplat& s = prepared[j];
        const SplatGrad sg = accumulate_splat(s, pixels, result.pixel_sums, width, opts.render.alpha_floor, stable);
        globals[j] = chain_to_params(s, sg, scene, cam, view, result.grads.values);
        result.mean2d_grad[s.index] = {sg.mean_x, sg.mean_y};
        result.radius[s.index] = s.proj.radius;
        result.visible[s.index] = 1;
    });

    double dsigma = 0.0, dbeta = 0.0;
    for (const GlobalGrad& g : globals) {
        dsigma += g.sigma;
        dbeta += g.beta;
    }
    if (view.has_class(ParamClass::Sigma)) result.grads.values[view.index({ParamClass::Sigma, 0, 0})] = dsigma;
    if (view.has_class(ParamClass::Beta)) result.grads.values[view.index({ParamClass::Beta, 0, 0})] = dbeta;
    result.grads.values[view.index({ParamClass::BackgroundWeight, 0, 0})] = dwb;

    if (opts.check_finite) check_finite(result.grads.values, view);
    return result;
}

double evaluate_loss(const Scene& scene, const Camera& cam, const Image& target, const BackwardOptions& opts) {
    RenderOptions ro = opts.render;
    ro.precision = Precision::F64;
    return loss(render_wsr(scene, cam, ro), target, opts.ssim_lambda);
}

}  // namespace wsr
