#include "wsr/camera.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wsr/covariance.hpp"

namespace wsr {

double orthonormality_error(const Mat3& r) {
    const Mat3 p = r * transpose(r);
    double err = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) err = std::max(err, std::abs(p(i, j) - (i == j ? 1.0 : 0.0)));
    return err;
}

void Camera::validate(double tolerance) const {
    const std::string where = "camera '" + id + "': ";
    if (width <= 0 || height <= 0) throw std::invalid_argument(where + "image size must be positive");
    if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument(where + "focal lengths must be positive");
    if (!(near_plane > 0.0) || !(near_plane < far_plane))
        throw std::invalid_argument(where + "need 0 < near < far");
    if (!(orthonormality_error(rotation) <= tolerance))
        throw std::invalid_argument(where + "rotation is not orthonormal");
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, int width, int height,
                       double fov_y_radians, double near_plane, double far_plane) {
    const Vec3 forward = normalized(target - eye);
    const Vec3 right = normalized(cross(forward, up));
    const Vec3 down = cross(forward, right);
    Camera cam;
    cam.width = width;
    cam.height = height;
    cam.fy = 0.5 * height / std::tan(0.5 * fov_y_radians);
    cam.fx = cam.fy;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    cam.rotation = Mat3{{right.x, right.y, right.z, down.x, down.y, down.z, forward.x, forward.y, forward.z}};
    cam.translation = -(cam.rotation * eye);
    cam.near_plane = near_plane;
    cam.far_plane = far_plane;
    return cam;
}

std::pair<Vec3, double> world_to_camera(const Camera& cam, const Vec3& p) {
    const Vec3 x = cam.rotation * p + cam.translation;
    return {x, x.z};
}

SplatProjection project_gaussian(const Camera& cam, const GaussianElement& element) {
    SplatProjection out;
    const auto [t, depth] = world_to_camera(cam, element.position);
    out.cam_point = t;
    out.depth = depth;
    if (!(depth > cam.near_plane) || !(depth < cam.far_plane)) return out;

    const Vec3 scale{std::exp(element.log_scale.x), std::exp(element.log_scale.y), std::exp(element.log_scale.z)};
    const Mat3 sigma = quat_scale_to_cov(element.rotation, scale).matrix();
    const Mat3 view_cov = cam.rotation * sigma * transpose(cam.rotation);

    const double iz = 1.0 / t.z;
    const double j00 = cam.fx * iz, j02 = -cam.fx * t.x * iz * iz;
    const double j11 = cam.fy * iz, j12 = -cam.fy * t.y * iz * iz;
    // cov2d = J V J^T with J = [[j00, 0, j02], [0, j11, j12]]
    const double a = j00 * (j00 * view_cov(0, 0) + j02 * view_cov(2, 0)) + j02 * (j00 * view_cov(0, 2) + j02 * view_cov(2, 2));
    const double b = j00 * (j11 * view_cov(0, 1) + j12 * view_cov(0, 2)) + j02 * (j11 * view_cov(2, 1) + j12 * view_cov(2, 2));
    const double c = j11 * (j11 * view_cov(1, 1) + j12 * view_cov(2, 1)) + j12 * (j11 * view_cov(1, 2) + j12 * view_cov(2, 2));

    out.cov2d = {a + kCovarianceFloor, b, c + kCovarianceFloor};
    const double d = det(out.cov2d);
    if (!(d > 0.0)) return out;
    out.conic = inverse(out.cov2d);
    out.mean2d = {cam.fx * t.x * iz + cam.cx, cam.fy * t.y * iz + cam.cy};

    const double mid = 0.5 * (out.cov2d.a + out.cov2d.c);
    const double lambda_max = mid + std::sqrt(std::max(0.1, mid * mid - d));
    out.radius = kFootprintSigmas * std::sqrt(lambda_max);

    out.visible = out.mean2d.x + out.radius > 0.0 && out.mean2d.x - out.radius < cam.width &&
                  out.mean2d.y + out.radius > 0.0 && out.mean2d.y - out.radius < cam.height;
    return out;
}

std::vector<std::size_t> frustum_cull(const Camera& cam, const Scene& scene) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < scene.elements.size(); ++i)
        if (project_gaussian(cam, scene.elements[i]).visible) out.push_back(i);
    return out;
}

}  // namespace wsr
