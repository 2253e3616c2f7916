#include <cmath>
#include <stdexcept>
#include <vector>

#include "wsr/metrics.hpp"
#include "wsr/train.hpp"

namespace wsr {

namespace {

void check_inputs(const Image& rendered, const Image& target, double ssim_lambda) {
    if (!rendered.same_size(target)) throw std::invalid_argument("loss: image sizes differ");
    if (rendered.pixels.empty()) throw std::invalid_argument("loss: empty image");
    if (!(ssim_lambda >= 0.0 && ssim_lambda <= 1.0)) throw std::invalid_argument("loss: ssim_lambda must be in [0, 1]");
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

double loss(const Image& rendered, const Image& target, double ssim_lambda) {
    check_inputs(rendered, target, ssim_lambda);
    const double l1 = mean_abs_diff(rendered, target);
    if (ssim_lambda == 0.0) return l1;
    return (1.0 - ssim_lambda) * l1 + ssim_lambda * (1.0 - ssim(rendered, target));
}

double loss_with_gradient(const Image& rendered, const Image& target, std::span<double> grad, double ssim_lambda) {
    check_inputs(rendered, target, ssim_lambda);
    if (grad.size() != rendered.pixels.size()) throw std::invalid_argument("loss: gradient buffer size mismatch");
    const double n = static_cast<double>(rendered.pixels.size());
    const double l1 = mean_abs_diff(rendered, target);
    const double w1 = 1.0 - ssim_lambda;
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = w1 * sign(rendered.pixels[i] - target.pixels[i]) / n;
    if (ssim_lambda == 0.0) return l1;

    std::vector<double> ds(grad.size());
    const double s = ssim_with_gradient(rendered, target, ds);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] -= ssim_lambda * ds[i];
    return w1 * l1 + ssim_lambda * (1.0 - s);
}

}  // namespace wsr
