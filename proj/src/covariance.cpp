#include "wsr/covariance.hpp"

#include <stdexcept>

namespace wsr {

Quat normalize_quat(const Quat& q) {
    const double n = norm(q);
    if (!(n > 1e-9)) throw std::invalid_argument("quaternion norm must exceed 1e-9");
    return {q.w / n, q.x / n, q.y / n, q.z / n};
}

Cov3D quat_scale_to_cov(const Quat& q, const Vec3& scale) {
    if (!(scale.x > 0.0 && scale.y > 0.0 && scale.z > 0.0))
        throw std::invalid_argument("scales must be positive");
    const Mat3 r = rotation_from_unit_quat(normalize_quat(q));
    // M = R S, Sigma = M M^T
    Mat3 m = r;
    for (int i = 0; i < 3; ++i) {
        m(i, 0) *= scale.x;
        m(i, 1) *= scale.y;
        m(i, 2) *= scale.z;
    }
    return Cov3D::from_matrix(m * transpose(m));
}

}  // namespace wsr
