#include "wsr/sh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wsr {

namespace {

constexpr double kC2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                           -1.0925484305920792, 0.5462742152960396};
constexpr double kC3[7] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
                           0.3731763325901154, -0.4570457994644658, 1.445305721320277,
                           -0.5900435899266435};

void check_degree(int degree) {
    if (degree < 0 || degree > kMaxShDegree)
        throw std::invalid_argument("sh degree out of range [0,3]: " + std::to_string(degree));
}

void check_unit(const Vec3& dir) {
    const double n = norm(dir);
    if (!(std::abs(n - 1.0) <= 1e-6)) throw std::invalid_argument("sh direction is not unit length");
}

}  // namespace

ShCoeffs::ShCoeffs(int degree, int channels) : degree_(degree), channels_(channels) {
    check_degree(degree);
    if (channels < 1 || channels > 3) throw std::invalid_argument("sh channels must be in [1,3]");
}

ShCoeffs::ShCoeffs(int degree, int channels, std::span<const double> values) : ShCoeffs(degree, channels) {
    if (values.size() != size())
        throw std::invalid_argument("sh coefficient count " + std::to_string(values.size()) + " != " +
                                    std::to_string(size()));
    std::copy(values.begin(), values.end(), data_.begin());
}

bool operator==(const ShCoeffs& a, const ShCoeffs& b) {
    if (a.degree_ != b.degree_ || a.channels_ != b.channels_) return false;
    const auto va = a.values();
    const auto vb = b.values();
    return std::equal(va.begin(), va.end(), vb.begin());
}

void sh_basis_into(int degree, const Vec3& dir, std::span<double> out) {
    const double x = dir.x, y = dir.y, z = dir.z;
    out[0] = kShC0;
    if (degree < 1) return;
    out[1] = -kShC1 * y;
    out[2] = kShC1 * z;
    out[3] = -kShC1 * x;
    if (degree < 2) return;
    const double xx = x * x, yy = y * y, zz = z * z;
    out[4] = kC2[0] * x * y;
    out[5] = kC2[1] * y * z;
    out[6] = kC2[2] * (2.0 * zz - xx - yy);
    out[7] = kC2[3] * x * z;
    out[8] = kC2[4] * (xx - yy);
    if (degree < 3) return;
    out[9] = kC3[0] * y * (3.0 * xx - yy);
    out[10] = kC3[1] * x * y * z;
    out[11] = kC3[2] * y * (4.0 * zz - xx - yy);
    out[12] = kC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
    out[13] = kC3[4] * x * (4.0 * zz - xx - yy);
    out[14] = kC3[5] * z * (xx - yy);
    out[15] = kC3[6] * x * (xx - 3.0 * yy);
}

std::vector<double> sh_basis(int degree, const Vec3& dir) {
    check_degree(degree);
    check_unit(dir);
    std::vector<double> out(sh_basis_count(degree));
    sh_basis_into(degree, dir, out);
    return out;
}

ShBasisJacobian sh_basis_jacobian(int degree, const Vec3& dir) {
    ShBasisJacobian j;
    sh_basis_into(degree, dir, j.value);
    if (degree < 1) return j;
    const double x = dir.x, y = dir.y, z = dir.z;
    j.dy[1] = -kShC1;
    j.dz[2] = kShC1;
    j.dx[3] = -kShC1;
    if (degree < 2) return j;
    const double xx = x * x, yy = y * y, zz = z * z;
    j.dx[4] = kC2[0] * y;
    j.dy[4] = kC2[0] * x;
    j.dy[5] = kC2[1] * z;
    j.dz[5] = kC2[1] * y;
    j.dx[6] = -2.0 * kC2[2] * x;
    j.dy[6] = -2.0 * kC2[2] * y;
    j.dz[6] = 4.0 * kC2[2] * z;
    j.dx[7] = kC2[3] * z;
    j.dz[7] = kC2[3] * x;
    j.dx[8] = 2.0 * kC2[4] * x;
    j.dy[8] = -2.0 * kC2[4] * y;
    if (degree < 3) return j;
    j.dx[9] = kC3[0] * 6.0 * x * y;
    j.dy[9] = kC3[0] * (3.0 * xx - 3.0 * yy);
    j.dx[10] = kC3[1] * y * z;
    j.dy[10] = kC3[1] * x * z;
    j.dz[10] = kC3[1] * x * y;
    j.dx[11] = kC3[2] * (-2.0 * x * y);
    j.dy[11] = kC3[2] * (4.0 * zz - xx - 3.0 * yy);
    j.dz[11] = kC3[2] * 8.0 * y * z;
    j.dx[12] = kC3[3] * (-6.0 * x * z);
    j.dy[12] = kC3[3] * (-6.0 * y * z);
    j.dz[12] = kC3[3] * (6.0 * zz - 3.0 * xx - 3.0 * yy);
    j.dx[13] = kC3[4] * (4.0 * zz - 3.0 * xx - yy);
    j.dy[13] = kC3[4] * (-2.0 * x * y);
    j.dz[13] = kC3[4] * 8.0 * x * z;
    j.dx[14] = kC3[5] * 2.0 * x * z;
    j.dy[14] = kC3[5] * (-2.0 * y * z);
    j.dz[14] = kC3[5] * (xx - yy);
    j.dx[15] = kC3[6] * (3.0 * xx - 3.0 * yy);
    j.dy[15] = kC3[6] * (-6.0 * x * y);
    return j;
}

namespace {

double channel_dot(const ShCoeffs& coeffs, int channel, std::span<const double> basis) {
    double s = 0.0;
    for (std::size_t k = 0; k < coeffs.basis_count(); ++k) s += basis[k] * coeffs(channel, k);
    return s;
}

}  // namespace

Vec3 sh_eval_color(const ShCoeffs& coeffs, const Vec3& dir) {
    if (coeffs.channels() != 3) throw std::invalid_argument("color sh needs 3 channels");
    std::array<double, kMaxShBasis> basis{};
    sh_basis_into(coeffs.degree(), dir, basis);
    Vec3 c;
    for (int ch = 0; ch < 3; ++ch) c[static_cast<std::size_t>(ch)] = std::max(0.0, channel_dot(coeffs, ch, basis) + 0.5);
    return c;
}

double sh_eval_opacity(const ShCoeffs& coeffs, const Vec3& dir) {
    if (coeffs.channels() != 1) throw std::invalid_argument("opacity sh needs 1 channel");
    std::array<double, kMaxShBasis> basis{};
    sh_basis_into(coeffs.degree(), dir, basis);
    return channel_dot(coeffs, 0, basis);
}

Vec3 compact_color_eval(const Vec3& base, const Vec3& specular, const ShCoeffs& h, const Vec3& dir) {
    if (h.channels() != 1) throw std::invalid_argument("compact color intensity sh needs 1 channel");
    std::array<double, kMaxShBasis> basis{};
    sh_basis_into(h.degree(), dir, basis);
    const double x = channel_dot(h, 0, basis);
    return {std::max(0.0, base.x + x * specular.x), std::max(0.0, base.y + x * specular.y),
            std::max(0.0, base.z + x * specular.z)};
}

}  // namespace wsr
