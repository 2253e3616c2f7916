#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "support.hpp"
#include "wsr/metrics.hpp"
#include "wsr/synth.hpp"

using namespace wsr;

namespace {

// Brute-force SSIM: explicit 2D window at every valid position.
double naive_ssim(const Image& a, const Image& b) {
    double w2[11][11], total = 0.0;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) total += (w2[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5)));
    const double c1 = 1e-4, c2 = 9e-4;
    double sum = 0.0;
    int count = 0;
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y + 11 <= a.height; ++y)
            for (int x = 0; x + 11 <= a.width; ++x) {
                double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
                for (int i = 0; i < 11; ++i)
                    for (int j = 0; j < 11; ++j) {
                        const double w = w2[i][j] / total;
                        const double va = a.at(x + j, y + i, c), vb = b.at(x + j, y + i, c);
                        ma += w * va;
                        mb += w * vb;
                        saa += w * va * va;
                        sbb += w * vb * vb;
                        sab += w * va * vb;
                    }
                const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
                sum += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++count;
            }
    return sum / count;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("psnr closed form and cap") {
    const Image a(8, 8, {0.5, 0.5, 0.5}), b(8, 8, {0.6, 0.6, 0.6});
    CHECK(psnr(a, b) == doctest::Approx(20.0));
    CHECK(psnr(a, a) == kPsnrCap);
    CHECK_THROWS_AS(psnr(a, Image(4, 8)), std::invalid_argument);
}

TEST_CASE("ssim matches brute-force windows") {
    std::mt19937_64 rng(50);
    const Image a = test::random_image(rng, 17, 14);
    Image b = a;
    for (double& v : b.pixels) v = std::clamp(v + test::uniform(rng, -0.2, 0.2), 0.0, 1.0);
    CHECK(ssim(a, b) == doctest::Approx(naive_ssim(a, b)).epsilon(1e-12));
    CHECK(ssim(a, a) == doctest::Approx(1.0));
    const auto w = ssim_window_1d();
    CHECK(w.size() == 11);
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(ssim(Image(10, 20), Image(10, 20)), std::invalid_argument);
}

TEST_CASE("ssim of constant images") {
    const Image a(12, 12, {0.2, 0.2, 0.2}), b(12, 12, {0.4, 0.4, 0.4});
    const double want = (2 * 0.2 * 0.4 + 1e-4) / (0.04 + 0.16 + 1e-4);
    CHECK(ssim(a, b) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("ssim gradient matches central differences") {
    std::mt19937_64 rng(51);
    Image a = test::random_image(rng, 14, 13);
    const Image b = test::random_image(rng, 14, 13);
    std::vector<double> grad(a.pixels.size());
    const double s = ssim_with_gradient(a, b, grad);
    CHECK(s == doctest::Approx(ssim(a, b)).epsilon(1e-14));
    for (std::size_t i = 0; i < a.pixels.size(); i += 5) {
        const double x = a.pixels[i], h = 1e-6;
        a.pixels[i] = x + h;
        const double up = ssim(a, b);
        a.pixels[i] = x - h;
        const double down = ssim(a, b);
        a.pixels[i] = x;
        CHECK(grad[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-4).scale(1e-5));
    }
}

TEST_CASE("popping report on a short sweep") {
    const SynthData data = synth_two_splat();
    const std::vector<Camera> path(data.cameras.begin() + 27, data.cameras.begin() + 34);
    const PoppingReport sorted = popping_metric(data.scene, path, RendererKind::Sorted);
    const PoppingReport wsr = popping_metric(data.scene, path, RendererKind::Wsr);
    CHECK(sorted.deltas.size() == 6);
    CHECK(sorted.renderer == "sorted");
    CHECK(sorted.max_index == 2);
    CHECK(sorted.max_delta > 10 * sorted.median_delta());
    CHECK(wsr.max_delta < 0.1 * sorted.max_delta);
    CHECK_THROWS_AS(popping_metric(data.scene, std::span(path).first(1), RendererKind::Wsr), std::invalid_argument);
}

TEST_CASE("median of deltas") {
    PoppingReport r;
    r.deltas = {4, 1, 3};
    CHECK(r.median_delta() == 3.0);
    r.deltas = {4, 1, 3, 2};
    CHECK(r.median_delta() == 2.5);
}

}
