#pragma once

#include "wsr/math.hpp"

namespace wsr {

/// Upper triangle of a symmetric 3x3 covariance (squared world units).
struct Cov3D {
    double xx = 0.0, xy = 0.0, xz = 0.0, yy = 0.0, yz = 0.0, zz = 0.0;

    Mat3 matrix() const { return Mat3{{xx, xy, xz, xy, yy, yz, xz, yz, zz}}; }
    static Cov3D from_matrix(const Mat3& m) { return {m(0, 0), m(0, 1), m(0, 2), m(1, 1), m(1, 2), m(2, 2)}; }
};

/// Normalizes q. Throws std::invalid_argument when ||q|| <= 1e-9.
Quat normalize_quat(const Quat& q);

/// R(q) diag(s^2) R(q)^T. q is normalized internally; s must be strictly positive.
Cov3D quat_scale_to_cov(const Quat& q, const Vec3& scale);

}  // namespace wsr
