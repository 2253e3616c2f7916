#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wsr/camera.hpp"
#include "wsr/image.hpp"
#include "wsr/scene.hpp"

namespace wsr {

struct SynthData {
    Scene scene;
    std::vector<Camera> cameras;
    std::vector<Image> images;  // sorted-reference renders, one per camera
};

inline constexpr std::size_t kTwoSplatFrames = 61;
inline constexpr std::uint64_t kToySeed = 20;

/// A white and a black splat straddling the origin along x over a gray
/// background. The camera sweeps 61 frames through +-30 degrees around the y
/// axis; their depth order flips at the middle frame.
SynthData synth_two_splat();

/// 20 opaque-ish splats in [-0.8, 0.8]^3 (degree-0 SH), 12 cameras on a ring,
/// 64x64 targets rendered with the sorted reference.
SynthData synth_toy20(std::uint64_t seed = kToySeed);

/// Camera on a circle of `radius` around the y axis at `elevation` (radians),
/// looking at the origin.
Camera orbit_camera(double azimuth, double elevation, double radius, int width, int height, double fov_y);

SynthData synth_preset(const std::string& name);

/// Writes scene.ply (+ sidecar), cameras.json, and images/<id>.png.
void write_synth(const SynthData& data, const std::filesystem::path& dir);

}  // namespace wsr
