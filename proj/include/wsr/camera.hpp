#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "wsr/math.hpp"
#include "wsr/scene.hpp"

namespace wsr {

/// Pinhole camera, world-to-camera extrinsics. Camera space looks down +z
/// with x right and y down (image rows grow downward).
struct Camera {
    std::string id = "0";
    int width = 0;
    int height = 0;
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    Mat3 rotation = Mat3::identity();
    Vec3 translation;
    double near_plane = 0.01;
    double far_plane = 1000.0;

    /// Camera center in world space, -R^T t.
    Vec3 center() const { return -(transpose(rotation) * translation); }

    /// Throws std::invalid_argument naming the camera id on bad intrinsics,
    /// clip planes, or a rotation that is not orthonormal within `tolerance`.
    void validate(double tolerance = 1e-6) const;

    static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, int width, int height,
                          double fov_y_radians, double near_plane = 0.01, double far_plane = 1000.0);
};

/// Max |R R^T - I| entry.
double orthonormality_error(const Mat3& r);

struct SplatProjection {
    Vec2 mean2d;
    Sym2 cov2d;
    Sym2 conic;
    Vec3 cam_point;
    double depth = 0.0;
    double radius = 0.0;
    bool visible = false;
};

/// Screen-space covariance floor added to every footprint (pixels^2).
inline constexpr double kCovarianceFloor = 0.3;
/// Footprint radius in standard deviations.
inline constexpr double kFootprintSigmas = 3.0;

/// Returns (R p + t, z).
std::pair<Vec3, double> world_to_camera(const Camera& cam, const Vec3& p);

SplatProjection project_gaussian(const Camera& cam, const GaussianElement& element);

/// Visible element indices in input order.
std::vector<std::size_t> frustum_cull(const Camera& cam, const Scene& scene);

}  // namespace wsr
