#include "wsr/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace wsr {

namespace {

using json = nlohmann::json;

static_assert(std::endian::native == std::endian::little, "little-endian host required");

void put_f32(std::vector<std::uint8_t>& out, double v) {
    const float f = static_cast<float>(v);
    std::uint8_t b[4];
    std::memcpy(b, &f, 4);
    out.insert(out.end(), b, b + 4);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    std::uint8_t b[4];
    std::memcpy(b, &v, 4);
    out.insert(out.end(), b, b + 4);
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    void need(std::size_t n, const char* what) const {
        if (remaining() < n) throw ParseError(std::string("truncated ") + what, pos_);
    }
    template <typename T>
    T get(const char* what) {
        need(sizeof(T), what);
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    // Header line without the trailing '\n'.
    std::string line() {
        const std::size_t start = pos_;
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
        if (pos_ == bytes_.size()) throw ParseError("unterminated header line", start);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + start), pos_ - start);
        ++pos_;
        if (!s.empty() && s.back() == '\r') s.pop_back();
        return s;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::vector<std::string> split_words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

int degree_from_rest(std::size_t rest_per_channel, const char* what, std::size_t offset) {
    for (int d = 0; d <= kMaxShDegree; ++d)
        if (sh_basis_count(d) - 1 == rest_per_channel) return d;
    throw ParseError(std::string("unsupported number of ") + what + " fields", offset);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

// PLY -----------------------------------------------------------------------

std::filesystem::path sidecar_path(const std::filesystem::path& ply_path) {
    return std::filesystem::path(ply_path.string() + ".wsr.json");
}

std::vector<std::uint8_t> encode_ply(const Scene& scene) {
    scene.validate();
    const std::size_t nc = sh_basis_count(scene.sh_degree_color);
    const std::size_t no = sh_basis_count(scene.sh_degree_opacity);
    std::ostringstream h;
    h << "ply\nformat binary_little_endian 1.0\nelement vertex " << scene.elements.size() << "\n";
    for (const char* p : {"x", "y", "z", "nx", "ny", "nz"}) h << "property float " << p << "\n";
    for (int c = 0; c < 3; ++c) h << "property float f_dc_" << c << "\n";
    for (std::size_t i = 0; i < 3 * (nc - 1); ++i) h << "property float f_rest_" << i << "\n";
    h << "property float opacity\n";
    for (int c = 0; c < 3; ++c) h << "property float scale_" << c << "\n";
    for (int c = 0; c < 4; ++c) h << "property float rot_" << c << "\n";
    for (std::size_t i = 0; i + 1 < no; ++i) h << "property float o_rest_" << i << "\n";
    h << "property float lc_v\nend_header\n";
    const std::string header = h.str();

    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + scene.elements.size() * 4 * (17 + 3 * nc + no));
    for (const GaussianElement& e : scene.elements) {
        put_f32(out, e.position.x);
        put_f32(out, e.position.y);
        put_f32(out, e.position.z);
        for (int i = 0; i < 3; ++i) put_f32(out, 0.0);
        for (int c = 0; c < 3; ++c) put_f32(out, e.color_sh(c, 0));
        for (int c = 0; c < 3; ++c)
            for (std::size_t k = 1; k < nc; ++k) put_f32(out, e.color_sh(c, k));
        put_f32(out, e.opacity_sh(0, 0));
        put_f32(out, e.log_scale.x);
        put_f32(out, e.log_scale.y);
        put_f32(out, e.log_scale.z);
        put_f32(out, e.rotation.w);
        put_f32(out, e.rotation.x);
        put_f32(out, e.rotation.y);
        put_f32(out, e.rotation.z);
        for (std::size_t k = 1; k < no; ++k) put_f32(out, e.opacity_sh(0, k));
        put_f32(out, e.lc_weight);
    }
    return out;
}

std::string encode_sidecar(const Scene& scene) {
    json j;
    j["weight_model"] = std::string(to_string(scene.weight_model.kind));
    j["sigma"] = scene.weight_model.sigma;
    j["beta"] = scene.weight_model.beta;
    j["background_weight"] = scene.background_weight;
    j["background_color"] = {scene.background_color.x, scene.background_color.y, scene.background_color.z};
    j["sh_degree_color"] = scene.sh_degree_color;
    j["sh_degree_opacity"] = scene.sh_degree_opacity;
    return j.dump(2) + "\n";
}

Scene decode_ply(std::span<const std::uint8_t> bytes, const std::string& sidecar_json) {
    Reader r(bytes);
    if (r.line() != "ply") throw ParseError("missing ply magic", 0);
    std::size_t count = 0;
    bool have_vertex = false, in_vertex = false, have_format = false;
    struct Prop {
        std::string name;
        bool is_double;
    };
    std::vector<Prop> props;
    for (;;) {
        const std::size_t at = r.offset();
        const std::string ln = r.line();
        const auto w = split_words(ln);
        if (w.empty() || w[0] == "comment" || w[0] == "obj_info") continue;
        if (w[0] == "end_header") break;
        if (w[0] == "format") {
            if (w.size() < 2 || w[1] != "binary_little_endian") throw ParseError("only binary_little_endian PLY is supported", at);
            have_format = true;
        } else if (w[0] == "element") {
            if (w.size() != 3) throw ParseError("malformed element line", at);
            if (w[1] == "vertex") {
                try {
                    count = static_cast<std::size_t>(std::stoull(w[2]));
                } catch (const std::exception&) {
                    throw ParseError("bad vertex count", at);
                }
                have_vertex = in_vertex = true;
            } else {
                throw ParseError("unsupported element '" + w[1] + "'", at);
            }
        } else if (w[0] == "property") {
            if (!in_vertex) throw ParseError("property outside the vertex element", at);
            if (w.size() != 3) throw ParseError("unsupported property declaration", at);
            if (w[1] == "float" || w[1] == "float32")
                props.push_back({w[2], false});
            else if (w[1] == "double" || w[1] == "float64")
                props.push_back({w[2], true});
            else
                throw ParseError("unsupported property type '" + w[1] + "'", at);
        } else {
            throw ParseError("unknown header keyword '" + w[0] + "'", at);
        }
    }
    if (!have_format) throw ParseError("missing format line", r.offset());
    if (!have_vertex) throw ParseError("missing vertex element", r.offset());

    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < props.size(); ++i) column[props[i].name] = i;
    auto require = [&](const std::string& name) {
        const auto it = column.find(name);
        if (it == column.end()) throw ParseError("missing required property '" + name + "'", r.offset());
        return it->second;
    };
    std::size_t color_rest = 0, opacity_rest = 0;
    while (column.count("f_rest_" + std::to_string(color_rest))) ++color_rest;
    while (column.count("o_rest_" + std::to_string(opacity_rest))) ++opacity_rest;
    if (color_rest % 3 != 0) throw ParseError("f_rest fields are not a multiple of 3", r.offset());
    const bool wsr_file = column.count("lc_v") > 0;

    Scene scene;
    json side;
    if (!sidecar_json.empty()) {
        try {
            side = json::parse(sidecar_json);
            if (side.contains("weight_model"))
                scene.weight_model.kind = parse_weight_kind(side.at("weight_model").get<std::string>());
            scene.weight_model.sigma = side.value("sigma", scene.weight_model.sigma);
            scene.weight_model.beta = side.value("beta", scene.weight_model.beta);
            scene.background_weight = side.value("background_weight", scene.background_weight);
            if (side.contains("background_color")) {
                const auto& c = side.at("background_color");
                if (!c.is_array() || c.size() != 3) throw std::invalid_argument("background_color needs 3 values");
                scene.background_color = {c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
            }
        } catch (const json::exception& ex) {
            throw std::invalid_argument(std::string("bad sidecar json: ") + ex.what());
        }
    }
    scene.sh_degree_color = degree_from_rest(color_rest / 3, "f_rest", r.offset());
    if (wsr_file)
        scene.sh_degree_opacity = degree_from_rest(opacity_rest, "o_rest", r.offset());
    else
        scene.sh_degree_opacity = side.is_object() ? side.value("sh_degree_opacity", 0) : 0;
    if (side.is_object() && side.contains("sh_degree_color") && side.at("sh_degree_color").get<int>() != scene.sh_degree_color)
        throw std::invalid_argument("sidecar color degree disagrees with the PLY fields");

    const std::size_t cx = require("x"), cy = require("y"), cz = require("z");
    const std::size_t cdc[3] = {require("f_dc_0"), require("f_dc_1"), require("f_dc_2")};
    const std::size_t cop = require("opacity");
    const std::size_t csc[3] = {require("scale_0"), require("scale_1"), require("scale_2")};
    const std::size_t crot[4] = {require("rot_0"), require("rot_1"), require("rot_2"), require("rot_3")};

    std::size_t stride = 0;
    std::vector<std::size_t> col_offset(props.size());
    for (std::size_t i = 0; i < props.size(); ++i) {
        col_offset[i] = stride;
        stride += props[i].is_double ? 8 : 4;
    }
    const std::size_t data_start = r.offset();
    if (count > 0 && stride > 0 && r.remaining() / stride < count)
        throw ParseError("truncated vertex data: expected " + std::to_string(count) + " records",
                         data_start + (r.remaining() / stride) * stride);
    if (r.remaining() != count * stride) throw ParseError("trailing bytes after vertex data", data_start + count * stride);

    const std::uint8_t* base = bytes.data() + data_start;
    std::vector<double> row(props.size());
    const std::size_t nc = sh_basis_count(scene.sh_degree_color);
    const std::size_t no = sh_basis_count(scene.sh_degree_opacity);
    scene.elements.reserve(count);
    for (std::size_t v = 0; v < count; ++v) {
        const std::uint8_t* rec = base + v * stride;
        for (std::size_t i = 0; i < props.size(); ++i) {
            if (props[i].is_double) {
                double d;
                std::memcpy(&d, rec + col_offset[i], 8);
                row[i] = d;
            } else {
                float f;
                std::memcpy(&f, rec + col_offset[i], 4);
                row[i] = f;
            }
        }
        GaussianElement e = scene.make_element();
        e.position = {row[cx], row[cy], row[cz]};
        for (int c = 0; c < 3; ++c) e.color_sh(c, 0) = row[cdc[c]];
        for (int c = 0; c < 3; ++c)
            for (std::size_t k = 1; k < nc; ++k)
                e.color_sh(c, k) = row[column["f_rest_" + std::to_string(static_cast<std::size_t>(c) * (nc - 1) + k - 1)]];
        e.log_scale = {row[csc[0]], row[csc[1]], row[csc[2]]};
        e.rotation = {row[crot[0]], row[crot[1]], row[crot[2]], row[crot[3]]};
        if (wsr_file) {
            e.opacity_sh(0, 0) = row[cop];
            for (std::size_t k = 1; k < no; ++k) e.opacity_sh(0, k) = row[column["o_rest_" + std::to_string(k - 1)]];
            e.lc_weight = row[column["lc_v"]];
        } else {
            e.opacity_sh(0, 0) = sigmoid(row[cop]) / kShC0;
        }
        scene.elements.push_back(e);
    }
    scene.validate();
    return scene;
}

void save_ply(const Scene& scene, const std::filesystem::path& path) {
    write_file_bytes(path, encode_ply(scene));
    write_text_file(sidecar_path(path), encode_sidecar(scene));
}

Scene load_ply(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    const auto side = sidecar_path(path);
    const std::string sidecar = std::filesystem::exists(side) ? read_text_file(side) : std::string();
    return decode_ply(bytes, sidecar);
}

// Cameras -------------------------------------------------------------------

std::vector<Camera> parse_cameras(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& ex) {
        throw std::invalid_argument(std::string("camera json: ") + ex.what());
    }
    if (!j.is_array()) throw std::invalid_argument("camera json must be an array");
    std::vector<Camera> cams;
    cams.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& c = j[i];
        Camera cam;
        try {
            if (c.contains("id")) cam.id = c["id"].is_string() ? c["id"].get<std::string>() : c["id"].dump();
            else cam.id = std::to_string(i);
            cam.width = c.at("width").get<int>();
            cam.height = c.at("height").get<int>();
            cam.fx = c.at("fx").get<double>();
            cam.fy = c.at("fy").get<double>();
            cam.cx = c.at("cx").get<double>();
            cam.cy = c.at("cy").get<double>();
            const auto rot = c.at("rotation").get<std::vector<double>>();
            const auto tr = c.at("translation").get<std::vector<double>>();
            if (rot.size() != 9) throw std::invalid_argument("camera " + cam.id + ": rotation needs 9 values");
            if (tr.size() != 3) throw std::invalid_argument("camera " + cam.id + ": translation needs 3 values");
            std::copy(rot.begin(), rot.end(), cam.rotation.m.begin());
            cam.translation = {tr[0], tr[1], tr[2]};
            cam.near_plane = c.value("near", cam.near_plane);
            cam.far_plane = c.value("far", cam.far_plane);
        } catch (const json::exception& ex) {
            throw std::invalid_argument("camera " + cam.id + ": " + ex.what());
        }
        cam.validate(kCameraRotationTolerance);
        cams.push_back(cam);
    }
    return cams;
}

std::vector<Camera> load_cameras(const std::filesystem::path& path) { return parse_cameras(read_text_file(path)); }

std::string encode_cameras(std::span<const Camera> cameras) {
    json j = json::array();
    for (const Camera& c : cameras) {
        j.push_back({{"id", c.id},
                     {"width", c.width},
                     {"height", c.height},
                     {"fx", c.fx},
                     {"fy", c.fy},
                     {"cx", c.cx},
                     {"cy", c.cy},
                     {"rotation", c.rotation.m},
                     {"translation", {c.translation.x, c.translation.y, c.translation.z}},
                     {"near", c.near_plane},
                     {"far", c.far_plane}});
    }
    return j.dump(2) + "\n";
}

void save_cameras(std::span<const Camera> cameras, const std::filesystem::path& path) {
    write_text_file(path, encode_cameras(cameras));
}

// Images --------------------------------------------------------------------

std::uint8_t quantize_unit(double v) {
    if (!(v > 0.0)) return 0;
    if (v >= 1.0) return 255;
    return static_cast<std::uint8_t>(std::round(v * 255.0));
}

std::vector<std::uint8_t> encode_ppm(const Image& image) {
    const std::string header = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + image.pixels.size());
    for (double v : image.pixels) out.push_back(quantize_unit(v));
    return out;
}

Image decode_ppm(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    auto token = [&]() {
        for (;;) {
            while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
            if (pos < bytes.size() && bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) ++pos;
        if (start == pos) throw ParseError("truncated PPM header", start);
        return std::string(reinterpret_cast<const char*>(bytes.data() + start), pos - start);
    };
    if (token() != "P6") throw ParseError("not a binary PPM (P6)", 0);
    auto number = [&]() {
        const std::size_t at = pos;
        const std::string t = token();
        if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; }) || t.size() > 9)
            throw ParseError("bad PPM header number", at);
        return std::stoi(t);
    };
    const int w = number(), h = number(), maxval = number();
    if (w <= 0 || h <= 0) throw ParseError("PPM dimensions must be positive", pos);
    if (maxval != 255) throw ParseError("only 8-bit PPM (maxval 255) is supported", pos);
    if (pos >= bytes.size()) throw ParseError("truncated PPM header", pos);
    ++pos;  // single whitespace before raster
    const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
    if (bytes.size() - pos < need) throw ParseError("truncated PPM raster", bytes.size());
    Image img(w, h);
    for (std::size_t i = 0; i < need; ++i) img.pixels[i] = bytes[pos + i] / 255.0;
    return img;
}

namespace {

Image read_png(const std::filesystem::path& path) {
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str()))
        throw std::runtime_error("png: " + path.string() + ": " + img.message);
    img.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, data.data(), 0, nullptr)) {
        png_image_free(&img);
        throw std::runtime_error("png: " + path.string() + ": " + img.message);
    }
    Image out(static_cast<int>(img.width), static_cast<int>(img.height));
    for (std::size_t i = 0; i < data.size(); ++i) out.pixels[i] = data[i] / 255.0;
    return out;
}

void write_png(const Image& image, const std::filesystem::path& path) {
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width);
    img.height = static_cast<png_uint_32>(image.height);
    img.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> data(image.pixels.size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = quantize_unit(image.pixels[i]);
    if (!png_image_write_to_file(&img, path.c_str(), 0, data.data(), 0, nullptr))
        throw std::runtime_error("png: " + path.string() + ": " + img.message);
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
    const std::string ext = lower(path.extension().string());
    if (ext == ".png") return read_png(path);
    if (ext == ".ppm") return decode_ppm(read_file_bytes(path));
    throw std::invalid_argument("unsupported image format: " + path.string());
}

void write_image(const Image& image, const std::filesystem::path& path) {
    if (image.width <= 0 || image.height <= 0) throw std::invalid_argument("cannot write an empty image");
    const std::string ext = lower(path.extension().string());
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    if (ext == ".png") return write_png(image, path);
    if (ext == ".ppm") return write_file_bytes(path, encode_ppm(image));
    throw std::invalid_argument("unsupported image format: " + path.string());
}

// Viewer export -------------------------------------------------------------

std::size_t WsplatHeader::record_floats() const {
    return 3 + 4 + 3 + 3 * sh_basis_count(sh_degree_color) + sh_basis_count(sh_degree_opacity) + 1;
}

std::vector<std::uint8_t> encode_wsplat(const Scene& scene) {
    scene.validate();
    std::vector<std::uint8_t> out = {'W', 'S', 'P', 'L'};
    put_u32(out, kWsplatVersion);
    put_u32(out, static_cast<std::uint32_t>(scene.elements.size()));
    out.push_back(static_cast<std::uint8_t>(scene.weight_model.kind));
    out.push_back(static_cast<std::uint8_t>(scene.sh_degree_color));
    out.push_back(static_cast<std::uint8_t>(scene.sh_degree_opacity));
    out.push_back(0);
    put_f32(out, scene.weight_model.sigma);
    put_f32(out, scene.weight_model.beta);
    put_f32(out, scene.background_weight);
    put_f32(out, scene.background_color.x);
    put_f32(out, scene.background_color.y);
    put_f32(out, scene.background_color.z);
    for (const GaussianElement& e : scene.elements) {
        for (std::size_t i = 0; i < 3; ++i) put_f32(out, e.position[i]);
        put_f32(out, e.rotation.w);
        put_f32(out, e.rotation.x);
        put_f32(out, e.rotation.y);
        put_f32(out, e.rotation.z);
        for (std::size_t i = 0; i < 3; ++i) put_f32(out, e.log_scale[i]);
        for (double v : e.color_sh.values()) put_f32(out, v);
        for (double v : e.opacity_sh.values()) put_f32(out, v);
        put_f32(out, e.lc_weight);
    }
    return out;
}

void export_wsplat(const Scene& scene, const std::filesystem::path& path) { write_file_bytes(path, encode_wsplat(scene)); }

WsplatHeader parse_wsplat_header(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    r.need(4, "magic");
    if (std::memcmp(bytes.data(), "WSPL", 4) != 0) throw ParseError("bad wsplat magic", 0);
    r.get<std::uint32_t>("magic");
    WsplatHeader h;
    h.version = r.get<std::uint32_t>("version");
    if (h.version != kWsplatVersion) throw ParseError("unsupported wsplat version " + std::to_string(h.version), 4);
    h.count = r.get<std::uint32_t>("count");
    const auto model = r.get<std::uint8_t>("weight model");
    if (model > 2) throw ParseError("unknown weight model " + std::to_string(model), 12);
    h.weight_model = static_cast<WeightKind>(model);
    h.sh_degree_color = r.get<std::uint8_t>("color degree");
    h.sh_degree_opacity = r.get<std::uint8_t>("opacity degree");
    if (h.sh_degree_color > kMaxShDegree) throw ParseError("color degree above 3", 13);
    if (h.sh_degree_opacity > kMaxShDegree) throw ParseError("opacity degree above 3", 14);
    r.get<std::uint8_t>("reserved");
    h.sigma = r.get<float>("globals");
    h.beta = r.get<float>("globals");
    h.background_weight = r.get<float>("globals");
    for (float& c : h.background_color) c = r.get<float>("globals");
    return h;
}

Scene parse_wsplat(std::span<const std::uint8_t> bytes) {
    const WsplatHeader h = parse_wsplat_header(bytes);
    const std::size_t stride = h.record_floats() * 4;
    const std::size_t payload = bytes.size() - kWsplatHeaderBytes;
    if (payload / stride < h.count)
        throw ParseError("truncated wsplat records", kWsplatHeaderBytes + (payload / stride) * stride);
    if (payload != static_cast<std::size_t>(h.count) * stride)
        throw ParseError("trailing bytes after wsplat records", kWsplatHeaderBytes + h.count * stride);

    Scene scene;
    scene.weight_model = {h.weight_model, h.sigma, h.beta};
    scene.sh_degree_color = h.sh_degree_color;
    scene.sh_degree_opacity = h.sh_degree_opacity;
    scene.background_weight = h.background_weight;
    scene.background_color = {h.background_color[0], h.background_color[1], h.background_color[2]};
    Reader r(bytes);
    for (int i = 0; i < 10; ++i) r.get<float>("header");
    scene.elements.reserve(h.count);
    for (std::uint32_t n = 0; n < h.count; ++n) {
        GaussianElement e = scene.make_element();
        for (std::size_t i = 0; i < 3; ++i) e.position[i] = r.get<float>("record");
        e.rotation.w = r.get<float>("record");
        e.rotation.x = r.get<float>("record");
        e.rotation.y = r.get<float>("record");
        e.rotation.z = r.get<float>("record");
        for (std::size_t i = 0; i < 3; ++i) e.log_scale[i] = r.get<float>("record");
        for (double& v : e.color_sh.values()) v = r.get<float>("record");
        for (double& v : e.opacity_sh.values()) v = r.get<float>("record");
        e.lc_weight = r.get<float>("record");
        scene.elements.push_back(e);
    }
    return scene;
}

Scene read_wsplat(const std::filesystem::path& path) { return parse_wsplat(read_file_bytes(path)); }

// Files ---------------------------------------------------------------------

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    write_file_bytes(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace wsr
