#include "wsr/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "wsr/config.hpp"
#include "wsr/io.hpp"
#include "wsr/metrics.hpp"
#include "wsr/synth.hpp"

namespace wsr {

namespace {

using json = nlohmann::json;

Precision parse_precision(const std::string& s) {
    if (s == "f32") return Precision::F32;
    if (s == "f64") return Precision::F64;
    throw std::invalid_argument("precision must be f32 or f64");
}

RendererKind parse_renderer(const std::string& s) {
    if (s == "wsr") return RendererKind::Wsr;
    if (s == "sorted") return RendererKind::Sorted;
    throw std::invalid_argument("renderer must be wsr or sorted");
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Image render_with(RendererKind kind, const Scene& scene, const Camera& cam, const RenderOptions& opts,
                  RenderStats* stats = nullptr) {
    return kind == RendererKind::Wsr ? render_wsr(scene, cam, opts, stats) : render_sorted_reference(scene, cam, opts, stats);
}

json popping_json(const PoppingReport& r) {
    return {{"renderer", r.renderer},
            {"max_delta", r.max_delta},
            {"max_index", r.max_index},
            {"median_delta", r.median_delta()},
            {"deltas", r.deltas}};
}

// Raises SH degrees and perturbs every parameter class so the check covers them all.
Scene gradcheck_scene(const Scene& base, WeightKind kind, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> small(-0.05, 0.05);
    Scene s = base;
    s.weight_model = WeightModel::initial(kind);
    const int dc = std::max(2, base.sh_degree_color), dop = std::max(2, base.sh_degree_opacity);
    s.sh_degree_color = dc;
    s.sh_degree_opacity = dop;
    for (GaussianElement& e : s.elements) {
        ShCoeffs color(dc, 3), opacity(dop, 1);
        for (int c = 0; c < 3; ++c)
            for (std::size_t k = 0; k < color.basis_count(); ++k)
                color(c, k) = k < e.color_sh.basis_count() ? e.color_sh(c, k) : small(rng);
        for (std::size_t k = 0; k < opacity.basis_count(); ++k)
            opacity(0, k) = k < e.opacity_sh.basis_count() ? e.opacity_sh(0, k) : small(rng);
        e.color_sh = color;
        e.opacity_sh = opacity;
        e.lc_weight = 0.1 + small(rng);
    }
    return s;
}

struct Common {
    std::string scene, cameras, images, out, renderer = "wsr", precision = "f32";
    int workers = 0;
};

void add_workers(CLI::App* cmd, Common& c) {
    cmd->add_option("--workers", c.workers, "Worker threads (0 = WSR_WORKERS or all cores)")->check(CLI::NonNegativeNumber);
}

RenderOptions render_options(const Common& c) {
    RenderOptions o;
    o.precision = parse_precision(c.precision);
    o.workers = c.workers;
    return o;
}

int cmd_train(const Common& c, const std::string& config_path, const std::vector<std::string>& overrides,
              std::ostream& out) {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    // Flags override config values.
    if (!c.scene.empty()) cfg.scene = c.scene;
    if (!c.cameras.empty()) cfg.cameras = c.cameras;
    if (!c.images.empty()) cfg.images = c.images;
    if (!c.out.empty()) cfg.out = c.out;
    apply_config_overrides(cfg, overrides);
    if (cfg.cameras.empty() || cfg.images.empty() || cfg.out.empty())
        throw CLI::ValidationError("train", "--cameras, --images and --out are required (flags or config)");
    cfg.train.render.workers = c.workers ? c.workers : cfg.train.render.workers;

    const Dataset data = load_dataset(cfg.cameras, cfg.images);
    Scene initial;
    const Scene* start = nullptr;
    if (!cfg.scene.empty() && cfg.scene != "synth") {
        initial = load_ply(cfg.scene);
        start = &initial;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const TrainResult result = train(data, cfg.train, start, [&](const TrainLogEntry& e) {
        out << "iter " << e.iteration << " loss " << std::setprecision(6) << e.loss << " psnr " << e.psnr
            << " elements " << e.elements << "\n";
    });
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    save_ply(result.scene, cfg.out);
    out << "wrote " << cfg.out << " (" << result.scene.elements.size() << " elements, " << std::setprecision(3) << secs
        << " s)\n";
    return kExitOk;
}

int cmd_render(const Common& c, std::ostream& out) {
    const Scene scene = load_ply(c.scene);
    const auto cams = load_cameras(c.cameras);
    const RenderOptions opts = render_options(c);
    const RendererKind kind = parse_renderer(c.renderer);
    std::filesystem::create_directories(c.out);
    for (const Camera& cam : cams) {
        const auto path = std::filesystem::path(c.out) / (cam.id + ".png");
        write_image(render_with(kind, scene, cam, opts), path);
        out << path.string() << "\n";
    }
    return kExitOk;
}

int cmd_eval(const Common& c, std::ostream& out) {
    const Scene scene = load_ply(c.scene);
    const Dataset data = load_dataset(c.cameras, c.images);
    const RenderOptions opts = render_options(c);
    const RendererKind kind = parse_renderer(c.renderer);
    out << std::left << std::setw(16) << "view" << std::setw(10) << "psnr" << "ssim\n" << std::fixed;
    double sp = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < data.cameras.size(); ++i) {
        const Image img = render_with(kind, scene, data.cameras[i], opts);
        const double p = psnr(img, data.images[i]), s = ssim(img, data.images[i]);
        sp += p;
        ss += s;
        out << std::setw(16) << data.cameras[i].id << std::setw(10) << std::setprecision(3) << p << std::setprecision(4)
            << s << "\n";
    }
    const double n = static_cast<double>(data.cameras.size());
    out << std::setw(16) << "mean" << std::setw(10) << std::setprecision(3) << sp / n << std::setprecision(4) << ss / n
        << "\n";
    return kExitOk;
}

int cmd_bench(const Common& c, int repeat, std::ostream& out) {
    const Scene scene = load_ply(c.scene);
    const auto cams = load_cameras(c.cameras);
    const RenderOptions opts = render_options(c);
    const RendererKind kind = parse_renderer(c.renderer);
    std::vector<double> project, sort, raster, total;
    std::string kernel;
    std::size_t visible = 0;
    for (int r = 0; r < repeat; ++r) {
        double p = 0, s = 0, q = 0;
        const auto t0 = std::chrono::steady_clock::now();
        for (const Camera& cam : cams) {
            RenderStats st;
            render_with(kind, scene, cam, opts, &st);
            p += st.project_seconds;
            s += st.sort_seconds;
            q += st.raster_seconds;
            kernel = st.kernel;
            visible += st.visible;
        }
        total.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        project.push_back(p);
        sort.push_back(s);
        raster.push_back(q);
    }
    json stages = json::object();
    stages["project"] = median(project);
    if (kind == RendererKind::Sorted) stages["sort"] = median(sort);
    stages["rasterize"] = median(raster);
    json j = {{"renderer", c.renderer},
              {"kernel", kernel},
              {"precision", c.precision},
              {"views", cams.size()},
              {"repeat", repeat},
              {"elements", scene.elements.size()},
              {"visible_per_view", cams.empty() ? 0.0 : double(visible) / double(cams.size() * std::size_t(repeat))},
              {"stages", stages},
              {"total", median(total)}};
    out << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_popping(const Common& c, const std::string& path, std::ostream& out) {
    const Scene scene = load_ply(c.scene);
    const auto cams = load_cameras(path);
    const RenderOptions opts = render_options(c);
    const PoppingReport w = popping_metric(scene, cams, RendererKind::Wsr, opts);
    const PoppingReport s = popping_metric(scene, cams, RendererKind::Sorted, opts);
    const double sorted_median = s.median_delta();
    json j = {{"frames", cams.size()},
              {"wsr", popping_json(w)},
              {"sorted", popping_json(s)},
              {"sorted_spike_over_median", sorted_median > 0 ? s.max_delta / sorted_median : INFINITY},
              {"wsr_max_over_sorted_spike", s.max_delta > 0 ? w.max_delta / s.max_delta : 0.0}};
    write_text_file(c.out, j.dump(2) + "\n");
    out << "wsr max delta " << w.max_delta << ", sorted max delta " << s.max_delta << " (median " << sorted_median
        << ")\n";
    return kExitOk;
}

int cmd_gradcheck(const Common& c, const std::string& model, std::uint64_t seed, std::ostream& out) {
    const WeightKind kind = parse_weight_kind(model);
    Scene base;
    Camera cam;
    Image target;
    if (c.scene == "synth") {
        const SynthData toy = synth_toy20();
        base = toy.scene;
        cam = toy.cameras[0];
        target = toy.images[0];
    } else {
        base = load_ply(c.scene);
        if (!c.cameras.empty()) {
            const auto cams = load_cameras(c.cameras);
            if (cams.empty()) throw std::invalid_argument("camera file is empty");
            cam = cams[0];
        } else {
            cam = orbit_camera(0.0, 0.3, 3.5, 64, 64, 0.8);
        }
        target = c.images.empty() ? Image(cam.width, cam.height, {0.5, 0.5, 0.5})
                                  : read_image(std::filesystem::path(c.images) / (cam.id + ".png"));
    }
    const Scene scene = gradcheck_scene(base, kind, seed);
    BackwardOptions opts = gradcheck_options();
    opts.render.workers = c.workers;
    target = gradcheck_target(scene, cam, target, 0.1, opts);
    std::vector<std::size_t> slots(ParamView(scene).size());
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    const FdReport report = finite_diff_check(scene, cam, target, slots, 1e-5, opts);
    const FdSlotResult& worst = report.slots[report.worst];
    out << "model " << model << ": " << slots.size() << " parameters, max error " << std::scientific
        << std::setprecision(3) << report.max_error << " at " << to_string(worst.slot.cls) << " element "
        << worst.slot.element << " component " << worst.slot.component << " (analytic " << worst.analytic
        << ", numeric " << worst.numeric << ")\n";
    return report.max_error < 1e-4 ? kExitOk : kExitRuntime;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& cameras, const std::filesystem::path& images) {
    Dataset d;
    d.cameras = load_cameras(cameras);
    for (const Camera& cam : d.cameras) {
        std::filesystem::path p = images / (cam.id + ".png");
        if (!std::filesystem::exists(p)) p = images / (cam.id + ".ppm");
        if (!std::filesystem::exists(p))
            throw std::runtime_error("no image for camera " + cam.id + " in " + images.string());
        d.images.push_back(read_image(p));
    }
    return d;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sort-free Gaussian splatting with weighted-sum rendering"};
    app.require_subcommand(1);
    Common c;

    auto* train_cmd = app.add_subcommand("train", "Optimize a scene against posed images");
    std::string config_path;
    std::vector<std::string> overrides;
    train_cmd->add_option("--config", config_path, "TOML-style or JSON run config")->check(CLI::ExistingFile);
    train_cmd->add_option("--scene", c.scene, "Initial PLY, or 'synth' for random init");
    train_cmd->add_option("--cameras", c.cameras, "Camera JSON");
    train_cmd->add_option("--images", c.images, "Directory of <camera id>.png");
    train_cmd->add_option("--out", c.out, "Output PLY");
    train_cmd->add_option("--set", overrides, "Config override, key=value (repeatable)");
    add_workers(train_cmd, c);

    auto* render_cmd = app.add_subcommand("render", "Render one PNG per camera");
    render_cmd->add_option("--scene", c.scene)->required();
    render_cmd->add_option("--cameras", c.cameras)->required();
    render_cmd->add_option("--out", c.out, "Output directory")->required();
    render_cmd->add_option("--renderer", c.renderer)->check(CLI::IsMember({"wsr", "sorted"}));
    render_cmd->add_option("--precision", c.precision)->check(CLI::IsMember({"f32", "f64"}));
    add_workers(render_cmd, c);

    auto* eval_cmd = app.add_subcommand("eval", "PSNR/SSIM per view");
    eval_cmd->add_option("--scene", c.scene)->required();
    eval_cmd->add_option("--cameras", c.cameras)->required();
    eval_cmd->add_option("--images", c.images)->required();
    eval_cmd->add_option("--renderer", c.renderer)->check(CLI::IsMember({"wsr", "sorted"}));
    eval_cmd->add_option("--precision", c.precision)->check(CLI::IsMember({"f32", "f64"}));
    add_workers(eval_cmd, c);

    auto* export_cmd = app.add_subcommand("export", "Write the .wsplat viewer file");
    export_cmd->add_option("--scene", c.scene)->required();
    export_cmd->add_option("--out", c.out)->required();

    auto* bench_cmd = app.add_subcommand("bench", "Per-stage timings as JSON");
    int repeat = 5;
    bench_cmd->add_option("--scene", c.scene)->required();
    bench_cmd->add_option("--cameras", c.cameras)->required();
    bench_cmd->add_option("--renderer", c.renderer)->check(CLI::IsMember({"wsr", "sorted"}));
    bench_cmd->add_option("--repeat", repeat)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--precision", c.precision)->check(CLI::IsMember({"f32", "f64"}));
    add_workers(bench_cmd, c);

    auto* popping_cmd = app.add_subcommand("popping", "Frame-delta report for both renderers");
    std::string path;
    popping_cmd->add_option("--scene", c.scene)->required();
    popping_cmd->add_option("--path", path, "Camera path JSON")->required();
    popping_cmd->add_option("--out", c.out, "Report JSON")->required();
    popping_cmd->add_option("--precision", c.precision)->check(CLI::IsMember({"f32", "f64"}));
    add_workers(popping_cmd, c);

    auto* grad_cmd = app.add_subcommand("gradcheck", "Analytic vs finite-difference gradients");
    std::string model = "lc";
    std::uint64_t seed = 0;
    grad_cmd->add_option("--scene", c.scene, "PLY or 'synth' (toy20)")->required();
    grad_cmd->add_option("--model", model)->check(CLI::IsMember({"dir", "exp", "lc"}));
    grad_cmd->add_option("--cameras", c.cameras);
    grad_cmd->add_option("--images", c.images);
    grad_cmd->add_option("--seed", seed);
    add_workers(grad_cmd, c);

    auto* synth_cmd = app.add_subcommand("synth", "Write a deterministic test scene");
    std::string preset;
    synth_cmd->add_option("--preset", preset)->required()->check(CLI::IsMember({"two-splat", "toy20"}));
    synth_cmd->add_option("--out", c.out, "Output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return kExitUsage;
    }

    try {
        if (*train_cmd) return cmd_train(c, config_path, overrides, out);
        if (*render_cmd) return cmd_render(c, out);
        if (*eval_cmd) return cmd_eval(c, out);
        if (*export_cmd) {
            export_wsplat(load_ply(c.scene), c.out);
            out << "wrote " << c.out << "\n";
            return kExitOk;
        }
        if (*bench_cmd) return cmd_bench(c, repeat, out);
        if (*popping_cmd) return cmd_popping(c, path, out);
        if (*grad_cmd) return cmd_gradcheck(c, model, seed, out);
        if (*synth_cmd) {
            write_synth(synth_preset(preset), c.out);
            out << "wrote " << preset << " to " << c.out << "\n";
            return kExitOk;
        }
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace wsr
