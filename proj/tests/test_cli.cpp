#include <doctest.h>

#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "wsr/cli.hpp"
#include "wsr/io.hpp"
#include "wsr/metrics.hpp"
#include "wsr/synth.hpp"

using namespace wsr;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "wsr_cli_tests" / name;
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 2, runtime errors exit 1") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"render", "--scene", "x.ply"}).code == kExitUsage);
    CHECK(run({"synth", "--preset", "toy21", "--out", "x"}).code == kExitUsage);
    const Run missing = run({"render", "--scene", "/nonexistent.ply", "--cameras", "/nonexistent.json", "--out", "/tmp/x"});
    CHECK(missing.code == kExitRuntime);
    CHECK(missing.err.find("error") != std::string::npos);
    CHECK(run({"train", "--scene", "synth"}).code == kExitUsage);
    CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("empty scene renders to the background color") {
    const auto dir = fresh_dir("empty");
    Scene s;
    s.background_color = {0.2, 0.4, 0.6};
    save_ply(s, dir / "empty.ply");
    Camera cam = orbit_camera(0.0, 0.0, 3.0, 12, 10, 0.8);
    cam.id = "only";
    save_cameras(std::vector<Camera>{cam}, dir / "cams.json");
    for (const char* renderer : {"wsr", "sorted"}) {
        const auto out = dir / renderer;
        REQUIRE(run({"render", "--scene", (dir / "empty.ply").string(), "--cameras", (dir / "cams.json").string(), "--out",
                     out.string(), "--renderer", renderer})
                    .code == kExitOk);
        const Image img = read_image(out / "only.png");
        CHECK(max_abs_diff(img, Image(12, 10, {51 / 255.0, 102 / 255.0, 153 / 255.0})) < 1e-12);
    }
}

TEST_CASE("synth, eval, export, bench, and popping work together") {
    const auto dir = fresh_dir("two");
    REQUIRE(run({"synth", "--preset", "two-splat", "--out", dir.string()}).code == kExitOk);
    CHECK(std::filesystem::exists(dir / "images" / "frame_60.png"));
    const std::string ply = (dir / "scene.ply").string(), cams = (dir / "cameras.json").string();

    const Run ev = run({"eval", "--scene", ply, "--cameras", cams, "--images", (dir / "images").string(), "--renderer", "sorted"});
    CHECK(ev.code == kExitOk);
    CHECK(ev.out.find("mean") != std::string::npos);

    REQUIRE(run({"export", "--scene", ply, "--out", (dir / "two.wsplat").string()}).code == kExitOk);
    CHECK(read_wsplat(dir / "two.wsplat").elements.size() == 2);

    const Run wsr = run({"bench", "--scene", ply, "--cameras", cams, "--renderer", "wsr", "--repeat", "1"});
    REQUIRE(wsr.code == kExitOk);
    const auto jw = nlohmann::json::parse(wsr.out);
    CHECK_FALSE(jw["stages"].contains("sort"));
    CHECK(jw["stages"].contains("rasterize"));
    const auto js = nlohmann::json::parse(run({"bench", "--scene", ply, "--cameras", cams, "--renderer", "sorted", "--repeat", "1"}).out);
    CHECK(js["stages"].contains("sort"));

    const auto report = dir / "reports" / "popping.json";
    REQUIRE(run({"popping", "--scene", ply, "--path", cams, "--out", report.string()}).code == kExitOk);
    const auto jp = nlohmann::json::parse(read_text_file(report));
    CHECK(jp["sorted_spike_over_median"].get<double>() >= 10.0);
    CHECK(jp["wsr_max_over_sorted_spike"].get<double>() <= 0.1);
}

TEST_CASE("train writes a scene and honors overrides") {
    const auto dir = fresh_dir("train");
    REQUIRE(run({"synth", "--preset", "toy20", "--out", dir.string()}).code == kExitOk);
    write_text_file(dir / "run.toml", "iterations = 30\ninitial_points = 20\neval_interval = 10\n");
    const Run r = run({"train", "--config", (dir / "run.toml").string(), "--scene", "synth", "--cameras",
                       (dir / "cameras.json").string(), "--images", (dir / "images").string(), "--out",
                       (dir / "out" / "fit.ply").string(), "--set", "weight_model=dir", "--set", "sh_degree_color=1"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("iter 30") != std::string::npos);
    const Scene s = load_ply(dir / "out" / "fit.ply");
    CHECK(s.weight_model.kind == WeightKind::Dir);
    CHECK(s.sh_degree_color == 1);
    CHECK(run({"train", "--cameras", (dir / "cameras.json").string(), "--images", (dir / "images").string(), "--out",
               (dir / "x.ply").string(), "--set", "bogus=1"})
              .code == kExitRuntime);
}

TEST_CASE("gradcheck on toy20 passes") {
    const Run r = run({"gradcheck", "--scene", "synth", "--model", "lc"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("max error") != std::string::npos);
}

}
