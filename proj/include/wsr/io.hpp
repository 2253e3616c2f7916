#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wsr/camera.hpp"
#include "wsr/image.hpp"
#include "wsr/scene.hpp"

namespace wsr {

/// Malformed input; `offset` is the byte position where parsing stopped.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// PLY -----------------------------------------------------------------------

/// Binary little-endian PLY with the 3DGS vertex layout plus o_rest_* and lc_v.
/// Globals go to `<path>.wsr.json`.
void save_ply(const Scene& scene, const std::filesystem::path& path);

/// Reads WSR or plain 3DGS files. Files without lc_v are treated as 3DGS
/// checkpoints: the stored logit o becomes a degree-0 opacity coefficient
/// sigmoid(o) / C0. The sidecar is optional.
Scene load_ply(const std::filesystem::path& path);

/// In-memory variants (the sidecar text may be empty).
std::vector<std::uint8_t> encode_ply(const Scene& scene);
std::string encode_sidecar(const Scene& scene);
Scene decode_ply(std::span<const std::uint8_t> bytes, const std::string& sidecar_json = {});

std::filesystem::path sidecar_path(const std::filesystem::path& ply_path);

// Cameras -------------------------------------------------------------------

inline constexpr double kCameraRotationTolerance = 1e-4;

std::vector<Camera> load_cameras(const std::filesystem::path& path);
std::vector<Camera> parse_cameras(const std::string& json_text);
void save_cameras(std::span<const Camera> cameras, const std::filesystem::path& path);
std::string encode_cameras(std::span<const Camera> cameras);

// Images --------------------------------------------------------------------

/// PNG (8-bit) or PPM (P6, maxval 255), chosen by extension. Values map to v / 255.
Image read_image(const std::filesystem::path& path);
/// Quantizes with round-half-away-from-zero after clamping to [0, 1].
void write_image(const Image& image, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_ppm(const Image& image);
Image decode_ppm(std::span<const std::uint8_t> bytes);
std::uint8_t quantize_unit(double v);

// Viewer export -------------------------------------------------------------

inline constexpr std::uint32_t kWsplatVersion = 1;
inline constexpr std::size_t kWsplatHeaderBytes = 40;

struct WsplatHeader {
    std::uint32_t version = kWsplatVersion;
    std::uint32_t count = 0;
    WeightKind weight_model = WeightKind::Lc;
    int sh_degree_color = 0;
    int sh_degree_opacity = 0;
    float sigma = 0.0f;
    float beta = 0.0f;
    float background_weight = 0.0f;
    float background_color[3] = {0.0f, 0.0f, 0.0f};

    /// f32 values per splat record.
    std::size_t record_floats() const;
};

std::vector<std::uint8_t> encode_wsplat(const Scene& scene);
void export_wsplat(const Scene& scene, const std::filesystem::path& path);

/// Reader mirroring the viewer's parser: checks magic, version, degrees, and
/// the exact payload size.
WsplatHeader parse_wsplat_header(std::span<const std::uint8_t> bytes);
Scene parse_wsplat(std::span<const std::uint8_t> bytes);
Scene read_wsplat(const std::filesystem::path& path);

// Files ---------------------------------------------------------------------

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace wsr
