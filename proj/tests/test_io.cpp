#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include "support.hpp"
#include "wsr/io.hpp"
#include "wsr/metrics.hpp"
#include "wsr/render.hpp"

using namespace wsr;

namespace {

const std::filesystem::path kData = WSR_TEST_DATA;

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "wsr_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

void append_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint8_t b[4];
    std::memcpy(b, &v, 4);
    out.insert(out.end(), b, b + 4);
}

void check_same(const Scene& a, const Scene& b, double tol) {
    REQUIRE(a.elements.size() == b.elements.size());
    CHECK(a.sh_degree_color == b.sh_degree_color);
    CHECK(a.sh_degree_opacity == b.sh_degree_opacity);
    const ParamView va(a), vb(b);
    REQUIRE(va.size() == vb.size());
    const auto ga = va.gather(a), gb = vb.gather(b);
    for (std::size_t i = 0; i < ga.size(); ++i) CHECK(std::abs(ga[i] - gb[i]) <= tol);
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("golden PLY decodes to the expected fields and re-encodes byte for byte") {
    const auto bytes = read_file_bytes(kData / "golden_two.ply");
    const Scene s = load_ply(kData / "golden_two.ply");
    REQUIRE(s.elements.size() == 2);
    CHECK(s.weight_model.kind == WeightKind::Exp);
    CHECK(s.weight_model.sigma == 0.25);
    CHECK(s.weight_model.beta == 1.5);
    CHECK(s.background_weight == 0.5);
    CHECK(s.background_color.z == 1.0);
    CHECK(s.sh_degree_color == 1);
    CHECK(s.sh_degree_opacity == 1);
    const GaussianElement& e0 = s.elements[0];
    CHECK(e0.position.y == -0.25);
    CHECK(e0.log_scale.z == -3.0);
    CHECK(e0.color_sh(0, 0) == -0.5);
    CHECK(e0.color_sh(1, 2) == 0.25);  // (1*4 + 2) * 0.125 - 0.5
    CHECK(e0.color_sh(2, 3) == 0.875);
    CHECK(e0.opacity_sh(0, 0) == 2.0);
    CHECK(e0.opacity_sh(0, 3) == 0.25);
    CHECK(e0.lc_weight == 0.75);
    CHECK(s.elements[1].rotation.z == 0.5);
    CHECK(encode_ply(s) == bytes);
}

TEST_CASE("PLY round trip through files") {
    std::mt19937_64 rng(60);
    for (int dc = 0; dc <= 3; ++dc) {
        const Scene s = test::random_scene(rng, 7, WeightModel::lc(4.0), dc, 3 - dc);
        const auto path = scratch("round_" + std::to_string(dc) + ".ply");
        save_ply(s, path);
        const Scene back = load_ply(path);
        check_same(s, back, 1e-6);
        CHECK(back.weight_model.kind == WeightKind::Lc);
        CHECK(back.weight_model.sigma == 4.0);
        CHECK(back.background_weight == doctest::Approx(s.background_weight));
    }
}

TEST_CASE("3DGS checkpoints map the opacity logit to a degree-0 coefficient") {
    std::string h = "ply\nformat binary_little_endian 1.0\nelement vertex 1\n";
    for (const char* p : {"x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity", "scale_0", "scale_1", "scale_2",
                          "rot_0", "rot_1", "rot_2", "rot_3"})
        h += std::string("property float ") + p + "\n";
    h += "end_header\n";
    auto bytes = bytes_of(h);
    for (float v : {1.0f, 2.0f, 3.0f, 0.1f, 0.2f, 0.3f, 0.0f, -1.0f, -1.0f, -1.0f, 1.0f, 0.0f, 0.0f, 0.0f}) append_f32(bytes, v);
    const Scene s = decode_ply(bytes);
    REQUIRE(s.elements.size() == 1);
    CHECK(s.sh_degree_color == 0);
    CHECK(s.sh_degree_opacity == 0);
    CHECK(s.elements[0].opacity_sh(0, 0) * kShC0 == doctest::Approx(0.5));
    CHECK(s.elements[0].position.z == 3.0);
    CHECK(s.elements[0].color_sh(2, 0) == doctest::Approx(0.3));
}

TEST_CASE("truncated PLY data fails at the record boundary") {
    const auto bytes = read_file_bytes(kData / "golden_two.ply");
    const std::size_t record = 30 * 4;
    const std::size_t header = bytes.size() - 2 * record;
    for (std::size_t cut = 1; cut < bytes.size(); ++cut) {
        const std::vector<std::uint8_t> part(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
        try {
            decode_ply(part);
            FAIL("accepted a truncated file at ", cut);
        } catch (const ParseError& e) {
            if (cut > header) CHECK(e.offset() == header + ((cut - header) / record) * record);
        }
    }
    auto longer = bytes;
    longer.push_back(0);
    CHECK_THROWS_AS(decode_ply(longer), ParseError);
}

TEST_CASE("malformed PLY headers") {
    CHECK_THROWS_AS(decode_ply(bytes_of("plx\n")), ParseError);
    CHECK_THROWS_AS(decode_ply(bytes_of("ply\nformat ascii 1.0\nelement vertex 0\nend_header\n")), ParseError);
    CHECK_THROWS_AS(decode_ply(bytes_of("ply\nformat binary_little_endian 1.0\nelement vertex 0\nproperty float x\nend_header\n")),
                    ParseError);
}

TEST_CASE("camera JSON round trip and errors") {
    std::vector<Camera> cams = {orbit_camera(0.4, 0.2, 3.0, 32, 24, 0.9), orbit_camera(-1.0, 0.0, 2.0, 10, 10, 0.5)};
    cams[0].id = "a";
    cams[1].id = "b";
    const auto back = parse_cameras(encode_cameras(cams));
    REQUIRE(back.size() == 2);
    CHECK(back[1].id == "b");
    CHECK(back[0].fx == cams[0].fx);
    CHECK(back[0].rotation.m == cams[0].rotation.m);
    CHECK(back[1].translation.y == cams[1].translation.y);
    CHECK_THROWS_AS(parse_cameras("{}"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_cameras(R"([{"id": "cam7", "width": 4}])"), doctest::Contains("cam7"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_cameras(R"([{"id": "skew", "width": 4, "height": 4, "fx": 1, "fy": 1, "cx": 2, "cy": 2,
        "rotation": [1, 0.1, 0, 0, 1, 0, 0, 0, 1], "translation": [0, 0, 0]}])"),
                         doctest::Contains("skew"), std::invalid_argument);
}

TEST_CASE("PPM bytes") {
    Image img(2, 2);
    img.set_pixel(0, 0, {1.0, 0.0, 0.5});
    img.set_pixel(1, 0, {-0.2, 2.0, 0.25});
    img.set_pixel(0, 1, {0.1, 0.2, 0.3});
    img.set_pixel(1, 1, {0.0, 0.0, 1.0});
    const auto bytes = encode_ppm(img);
    std::vector<std::uint8_t> want = bytes_of("P6\n2 2\n255\n");
    for (int v : {255, 0, 128, 0, 255, 64, 26, 51, 77, 0, 0, 255}) want.push_back(static_cast<std::uint8_t>(v));
    CHECK(bytes == want);
    const Image back = decode_ppm(bytes);
    CHECK(back.at(0, 0, 2) == doctest::Approx(128.0 / 255.0));
    CHECK_THROWS_AS(decode_ppm(std::span(bytes).first(bytes.size() - 1)), ParseError);
    CHECK(quantize_unit(-1.0) == 0);
    CHECK(quantize_unit(2.0) == 255);
    CHECK(quantize_unit(0.5) == 128);
}

TEST_CASE("PNG and PPM files round trip at 8 bits") {
    std::mt19937_64 rng(61);
    Image img(9, 5);
    for (double& v : img.pixels) v = static_cast<double>(rng() % 256) / 255.0;
    for (const char* name : {"img.png", "img.ppm"}) {
        const auto path = scratch(std::string("nested/") + name);
        std::filesystem::remove_all(path.parent_path());
        write_image(img, path);
        CHECK(max_abs_diff(read_image(path), img) < 1e-12);
    }
    CHECK_THROWS_AS(write_image(img, scratch("img.bmp")), std::invalid_argument);
    CHECK_THROWS(read_image(scratch("missing.png")));
}

TEST_CASE("empty wsplat header bytes") {
    Scene s;
    s.weight_model = WeightModel::lc(10.0);
    s.sh_degree_color = 2;
    s.sh_degree_opacity = 1;
    s.background_weight = 1.0;
    s.background_color = {0.5, 0.25, 0.0};
    const auto bytes = encode_wsplat(s);
    std::vector<std::uint8_t> want = bytes_of("WSPL");
    for (std::uint8_t b : {1, 0, 0, 0, 0, 0, 0, 0, 2, 2, 1, 0}) want.push_back(b);
    for (float f : {10.0f, 0.0f, 1.0f, 0.5f, 0.25f, 0.0f}) append_f32(want, f);
    CHECK(bytes == want);
    CHECK(bytes.size() == kWsplatHeaderBytes);
    const WsplatHeader h = parse_wsplat_header(bytes);
    CHECK(h.count == 0);
    CHECK(h.record_floats() == 3 + 4 + 3 + 27 + 4 + 1);
    CHECK(parse_wsplat(bytes).elements.empty());
}

TEST_CASE("wsplat export round trips at f32 and renders the same") {
    std::mt19937_64 rng(62);
    const Scene s = test::random_scene(rng, 25, WeightModel::exp(0.3, 0.9), 3, 2);
    const auto path = scratch("scene.wsplat");
    export_wsplat(s, path);
    const Scene back = read_wsplat(path);
    check_same(s, back, 1e-6);
    CHECK(back.weight_model.kind == WeightKind::Exp);
    CHECK(back.weight_model.beta == doctest::Approx(0.9));
    const Camera cam = test::random_camera(rng, 24, 24);
    CHECK(max_abs_diff(render_wsr(s, cam), render_wsr(back, cam)) < 1e-5);
}

TEST_CASE("corrupted wsplat files are rejected") {
    std::mt19937_64 rng(63);
    const auto good = encode_wsplat(test::random_scene(rng, 2, WeightModel::dir(), 0, 0));
    auto bad = good;
    bad[0] = 'X';
    CHECK_THROWS_WITH_AS(parse_wsplat(bad), doctest::Contains("magic"), ParseError);
    bad = good;
    bad[4] = 2;
    CHECK_THROWS_WITH_AS(parse_wsplat(bad), doctest::Contains("version"), ParseError);
    bad = good;
    bad[13] = 4;
    CHECK_THROWS_AS(parse_wsplat(bad), ParseError);
    CHECK_THROWS_AS(parse_wsplat(std::span(good).first(good.size() - 4)), ParseError);
    CHECK_THROWS_AS(parse_wsplat(std::span(good).first(20)), ParseError);
    bad = good;
    bad.push_back(0);
    CHECK_THROWS_AS(parse_wsplat(bad), ParseError);
}

}
