#include "wsr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wsr {

namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void require_same_size(const Image& a, const Image& b) {
    if (!a.same_size(b)) throw std::invalid_argument("image sizes differ");
}

using Real = long double;

// Plane of one channel, row-major.
std::vector<Real> channel_plane(const Image& img, int c) {
    std::vector<Real> out(img.pixel_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = img.pixels[i * 3 + static_cast<std::size_t>(c)];
    return out;
}

// Valid correlation with the separable window: (h - 10) x (w - 10) output.
std::vector<Real> filter_valid(const std::vector<Real>& src, int w, int h, const std::vector<Real>& k) {
    const int ow = w - kWindow + 1, oh = h - kWindow + 1;
    std::vector<Real> tmp(static_cast<std::size_t>(ow) * static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            Real s = 0.0;
            for (int i = 0; i < kWindow; ++i) s += k[static_cast<std::size_t>(i)] * src[static_cast<std::size_t>(y * w + x + i)];
            tmp[static_cast<std::size_t>(y * ow + x)] = s;
        }
    std::vector<Real> out(static_cast<std::size_t>(ow) * static_cast<std::size_t>(oh));
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            Real s = 0.0;
            for (int i = 0; i < kWindow; ++i) s += k[static_cast<std::size_t>(i)] * tmp[static_cast<std::size_t>((y + i) * ow + x)];
            out[static_cast<std::size_t>(y * ow + x)] = s;
        }
    return out;
}

// Adjoint of filter_valid: scatters an (h - 10) x (w - 10) map back to w x h.
std::vector<Real> filter_adjoint(const std::vector<Real>& src, int w, int h, const std::vector<Real>& k) {
    const int ow = w - kWindow + 1, oh = h - kWindow + 1;
    std::vector<Real> tmp(static_cast<std::size_t>(ow) * static_cast<std::size_t>(h), 0.0);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            const Real v = src[static_cast<std::size_t>(y * ow + x)];
            for (int i = 0; i < kWindow; ++i) tmp[static_cast<std::size_t>((y + i) * ow + x)] += k[static_cast<std::size_t>(i)] * v;
        }
    std::vector<Real> out(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            const Real v = tmp[static_cast<std::size_t>(y * ow + x)];
            for (int i = 0; i < kWindow; ++i) out[static_cast<std::size_t>(y * w + x + i)] += k[static_cast<std::size_t>(i)] * v;
        }
    return out;
}

double ssim_impl(const Image& a, const Image& b, std::span<double> grad_a) {
    require_same_size(a, b);
    if (a.width < kWindow || a.height < kWindow) throw std::invalid_argument("ssim needs images of at least 11x11");
    const bool want_grad = !grad_a.empty();
    if (want_grad && grad_a.size() != a.pixels.size()) throw std::invalid_argument("ssim gradient buffer size mismatch");

    const auto k64 = ssim_window_1d();
    const std::vector<Real> k(k64.begin(), k64.end());
    const int w = a.width, h = a.height;
    const std::size_t positions = static_cast<std::size_t>(w - kWindow + 1) * static_cast<std::size_t>(h - kWindow + 1);
    const Real norm = 1.0L / (3.0L * static_cast<Real>(positions));
    Real total = 0.0;

    for (int c = 0; c < 3; ++c) {
        const auto x = channel_plane(a, c);
        const auto y = channel_plane(b, c);
        std::vector<Real> xx(x.size()), yy(x.size()), xy(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        const auto mx = filter_valid(x, w, h, k);
        const auto my = filter_valid(y, w, h, k);
        const auto exx = filter_valid(xx, w, h, k);
        const auto eyy = filter_valid(yy, w, h, k);
        const auto exy = filter_valid(xy, w, h, k);

        std::vector<Real> d_mu, d_exx, d_exy;
        if (want_grad) {
            d_mu.resize(positions);
            d_exx.resize(positions);
            d_exy.resize(positions);
        }
        for (std::size_t p = 0; p < positions; ++p) {
            const Real vx = exx[p] - mx[p] * mx[p];
            const Real vy = eyy[p] - my[p] * my[p];
            const Real cxy = exy[p] - mx[p] * my[p];
            const Real a1 = 2.0 * mx[p] * my[p] + kC1;
            const Real a2 = 2.0 * cxy + kC2;
            const Real b1 = mx[p] * mx[p] + my[p] * my[p] + kC1;
            const Real b2 = vx + vy + kC2;
            const Real s = (a1 * a2) / (b1 * b2);
            total += s;
            if (want_grad) {
                const Real ds_dvx = -s / b2;
                const Real ds_dcxy = 2.0 * a1 / (b1 * b2);
                const Real ds_dmx = 2.0 * my[p] * a2 / (b1 * b2) - 2.0 * mx[p] * s / b1;
                d_mu[p] = ds_dmx + ds_dvx * (-2.0 * mx[p]) + ds_dcxy * (-my[p]);
                d_exx[p] = ds_dvx;
                d_exy[p] = ds_dcxy;
            }
        }
        if (want_grad) {
            const auto g_mu = filter_adjoint(d_mu, w, h, k);
            const auto g_xx = filter_adjoint(d_exx, w, h, k);
            const auto g_xy = filter_adjoint(d_exy, w, h, k);
            for (std::size_t i = 0; i < x.size(); ++i)
                grad_a[i * 3 + static_cast<std::size_t>(c)] = static_cast<double>(norm * (g_mu[i] + 2.0 * x[i] * g_xx[i] + y[i] * g_xy[i]));
        }
    }
    return static_cast<double>(total * norm);
}

}  // namespace

std::vector<double> ssim_window_1d() {
    std::vector<double> k(kWindow);
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kWindow / 2;
        k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kWindowSigma * kWindowSigma));
        sum += k[static_cast<std::size_t>(i)];
    }
    for (double& v : k) v /= sum;
    return k;
}

double psnr(const Image& a, const Image& b) {
    require_same_size(a, b);
    if (a.pixels.empty()) throw std::invalid_argument("psnr of empty images");
    double se = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = a.pixels[i] - b.pixels[i];
        se += d * d;
    }
    const double mse = se / static_cast<double>(a.pixels.size());
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b) { return ssim_impl(a, b, {}); }

double ssim_with_gradient(const Image& a, const Image& b, std::span<double> grad_a) {
    if (grad_a.empty()) throw std::invalid_argument("ssim gradient buffer is empty");
    return ssim_impl(a, b, grad_a);
}

std::string to_string(RendererKind kind) { return kind == RendererKind::Wsr ? "wsr" : "sorted"; }

double PoppingReport::median_delta() const {
    if (deltas.empty()) return 0.0;
    std::vector<double> d = deltas;
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
    if (d.size() % 2 == 1) return d[mid];
    const double hi = d[mid];
    const double lo = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

double max_abs_diff(const Image& a, const Image& b) {
    require_same_size(a, b);
    double m = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) m = std::max(m, std::abs(a.pixels[i] - b.pixels[i]));
    return m;
}

double mean_abs_diff(const Image& a, const Image& b) {
    require_same_size(a, b);
    if (a.pixels.empty()) return 0.0;
    long double s = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) s += std::abs(a.pixels[i] - b.pixels[i]);
    return static_cast<double>(s / static_cast<long double>(a.pixels.size()));
}

PoppingReport popping_metric(const Scene& scene, std::span<const Camera> path, RendererKind renderer,
                             const RenderOptions& opts) {
    if (path.size() < 2) throw std::invalid_argument("popping_metric needs at least two cameras");
    PoppingReport report;
    report.renderer = to_string(renderer);
    auto render = [&](const Camera& cam) {
        return renderer == RendererKind::Wsr ? render_wsr(scene, cam, opts) : render_sorted_reference(scene, cam, opts);
    };
    Image prev = render(path[0]);
    for (std::size_t k = 1; k < path.size(); ++k) {
        Image cur = render(path[k]);
        const double d = max_abs_diff(prev, cur);
        report.deltas.push_back(d);
        if (d > report.max_delta) {
            report.max_delta = d;
            report.max_index = k - 1;
        }
        prev = std::move(cur);
    }
    return report;
}

}  // namespace wsr
