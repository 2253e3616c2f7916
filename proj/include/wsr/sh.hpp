#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "wsr/math.hpp"

namespace wsr {

inline constexpr int kMaxShDegree = 3;
inline constexpr std::size_t kMaxShBasis = 16;

inline constexpr double kShC0 = 0.28209479177387814;  // 1/(2*sqrt(pi))
inline constexpr double kShC1 = 0.4886025119029199;   // sqrt(3/(4*pi))

constexpr std::size_t sh_basis_count(int degree) {
    return static_cast<std::size_t>((degree + 1) * (degree + 1));
}

/// Real SH coefficients for one or more channels, stored channel-major:
/// values[channel * basis_count + k]. Fixed inline storage, no heap.
class ShCoeffs {
public:
    ShCoeffs() = default;
    /// Zero coefficients. Throws std::invalid_argument on bad degree/channels.
    ShCoeffs(int degree, int channels);
    /// Throws std::invalid_argument if values.size() != channels * (degree+1)^2.
    ShCoeffs(int degree, int channels, std::span<const double> values);

    int degree() const { return degree_; }
    int channels() const { return channels_; }
    std::size_t basis_count() const { return sh_basis_count(degree_); }
    std::size_t size() const { return basis_count() * static_cast<std::size_t>(channels_); }

    double& operator()(int channel, std::size_t k) { return data_[static_cast<std::size_t>(channel) * basis_count() + k]; }
    double operator()(int channel, std::size_t k) const { return data_[static_cast<std::size_t>(channel) * basis_count() + k]; }

    std::span<double> values() { return {data_.data(), size()}; }
    std::span<const double> values() const { return {data_.data(), size()}; }

    friend bool operator==(const ShCoeffs& a, const ShCoeffs& b);

private:
    int degree_ = 0;
    int channels_ = 1;
    std::array<double, 3 * kMaxShBasis> data_{};
};

/// Real SH basis in band-major order (l = 0..degree, m = -l..l), 3DGS sign
/// convention. Validates degree and unit length (1e-6).
std::vector<double> sh_basis(int degree, const Vec3& dir);

/// Unchecked variant for hot loops; writes (degree+1)^2 values into out.
void sh_basis_into(int degree, const Vec3& dir, std::span<double> out);

/// Basis values plus their partial derivatives with respect to the (unnormalized)
/// polynomial arguments x, y, z.
struct ShBasisJacobian {
    std::array<double, kMaxShBasis> value{};
    std::array<double, kMaxShBasis> dx{};
    std::array<double, kMaxShBasis> dy{};
    std::array<double, kMaxShBasis> dz{};
};
ShBasisJacobian sh_basis_jacobian(int degree, const Vec3& dir);

/// View-dependent color: dot(basis, coeffs) + 0.5, clamped at zero per channel.
Vec3 sh_eval_color(const ShCoeffs& coeffs, const Vec3& dir);

/// View-dependent maximum opacity: dot(basis, coeffs), raw (no offset, no clamp).
double sh_eval_opacity(const ShCoeffs& coeffs, const Vec3& dir);

/// Specular-style compact color a + x(dir) * b where x is the scalar SH of h.
Vec3 compact_color_eval(const Vec3& base, const Vec3& specular, const ShCoeffs& h, const Vec3& dir);

}  // namespace wsr
