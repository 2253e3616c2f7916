#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "support.hpp"
#include "wsr/metrics.hpp"
#include "wsr/render.hpp"
#include "wsr/synth.hpp"
#include "wsr/train.hpp"

using namespace wsr;

namespace {

std::vector<std::size_t> all_slots(const Scene& s) {
    std::vector<std::size_t> v(ParamView(s).size());
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

Dataset toy_dataset(std::size_t views) {
    const SynthData toy = synth_toy20();
    Dataset d;
    for (std::size_t i = 0; i < views; ++i) {
        d.cameras.push_back(toy.cameras[i * toy.cameras.size() / views]);
        d.images.push_back(toy.images[i * toy.cameras.size() / views]);
    }
    return d;
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("loss gradient matches per-pixel central differences") {
    std::mt19937_64 rng(40);
    const Image target = test::random_image(rng, 13, 12);
    Image r = test::random_image(rng, 13, 12);
    for (double lambda : {0.0, 0.2, 1.0}) {
        std::vector<double> grad(r.pixels.size());
        const double l = loss_with_gradient(r, target, grad, lambda);
        CHECK(l == doctest::Approx(loss(r, target, lambda)).epsilon(1e-15));
        for (std::size_t i = 0; i < r.pixels.size(); i += 7) {
            const double x = r.pixels[i], h = 1e-6;
            r.pixels[i] = x + h;
            const double up = loss(r, target, lambda);
            r.pixels[i] = x - h;
            const double down = loss(r, target, lambda);
            r.pixels[i] = x;
            CHECK(grad[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-5).scale(1e-4));
        }
    }
}

TEST_CASE("loss blends L1 and D-SSIM") {
    std::mt19937_64 rng(41);
    const Image a = test::random_image(rng, 16, 16), b = test::random_image(rng, 16, 16);
    CHECK(loss(a, b, 0.0) == doctest::Approx(mean_abs_diff(a, b)));
    CHECK(loss(a, b, 0.2) == doctest::Approx(0.8 * mean_abs_diff(a, b) + 0.2 * (1.0 - ssim(a, b))));
    CHECK(loss(a, a) == 0.0);
    CHECK_THROWS_AS(loss(a, Image(4, 4)), std::invalid_argument);
}

TEST_CASE("backward loss equals the loss of the forward render") {
    std::mt19937_64 rng(42);
    for (WeightKind k : {WeightKind::Dir, WeightKind::Exp, WeightKind::Lc}) {
        const test::GradientCase c = test::random_gradient_case(rng, k);
        BackwardOptions o;
        const BackwardResult b = backward_wsr(c.scene, c.camera, c.target, o);
        RenderOptions ro = o.render;
        CHECK(std::abs(b.loss - loss(render_wsr(c.scene, c.camera, ro), c.target)) < 1e-12);
        CHECK(max_abs_diff(b.rendered, render_wsr(c.scene, c.camera, ro)) == 0.0);
    }
}

TEST_CASE("analytic gradients match finite differences for every class") {
    std::mt19937_64 rng(43);
    for (WeightKind k : {WeightKind::Dir, WeightKind::Exp, WeightKind::Lc}) {
        const test::GradientCase c = test::random_gradient_case(rng, k, 2, 1);
        const FdReport r = finite_diff_check(c.scene, c.camera, c.target, all_slots(c.scene), 1e-5, gradcheck_options());
        INFO(to_string(k), " worst ", to_string(r.slots[r.worst].slot.cls), " ", r.slots[r.worst].analytic, " vs ",
             r.slots[r.worst].numeric);
        CHECK(r.max_error < 1e-4);
    }
}

TEST_CASE("gradients follow element permutations") {
    std::mt19937_64 rng(44);
    for (WeightKind k : {WeightKind::Dir, WeightKind::Exp, WeightKind::Lc}) {
        const test::GradientCase c = test::random_gradient_case(rng, k);
        Scene perm = c.scene;
        std::vector<std::size_t> order(perm.elements.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i = 0; i < order.size(); ++i) perm.elements[i] = c.scene.elements[order[i]];
        const BackwardResult a = backward_wsr(c.scene, c.camera, c.target, gradcheck_options());
        const BackwardResult b = backward_wsr(perm, c.camera, c.target, gradcheck_options());
        const ParamView v(c.scene);
        const std::size_t stride = v.element_stride();
        for (std::size_t i = 0; i < order.size(); ++i)
            for (std::size_t j = 0; j < stride; ++j)
                CHECK(std::abs(b.grads.values[i * stride + j] - a.grads.values[order[i] * stride + j]) < 1e-10);
        for (std::size_t g = 0; g < v.global_count(); ++g)
            CHECK(std::abs(b.grads.values[order.size() * stride + g] - a.grads.values[order.size() * stride + g]) < 1e-10);
    }
}

TEST_CASE("gradients do not depend on the worker count") {
    std::mt19937_64 rng(45);
    const test::GradientCase c = test::random_gradient_case(rng, WeightKind::Exp);
    BackwardOptions one = gradcheck_options(), four = gradcheck_options();
    one.render.workers = 1;
    four.render.workers = 4;
    CHECK(backward_wsr(c.scene, c.camera, c.target, one).grads.values ==
          backward_wsr(c.scene, c.camera, c.target, four).grads.values);
}

TEST_CASE("adam matches the textbook update bit for bit") {
    std::mt19937_64 rng(46);
    Scene s = test::random_scene(rng, 3, WeightModel::exp(), 1, 0);
    const ParamView v(s);
    LearningRates lr;
    lr.position_decay_steps = 10;
    AdamState state;
    std::vector<double> theta = v.gather(s), m(theta.size(), 0.0), sec(theta.size(), 0.0);
    for (int t = 1; t <= 5; ++t) {
        Gradients g;
        g.values.resize(theta.size());
        for (double& x : g.values) x = test::uniform(rng, -1, 1);
        adam_step(s, g, state, lr);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double alpha = lr.for_class(v.slot(i).cls, static_cast<std::size_t>(t - 1));
            m[i] = 0.9 * m[i] + (1 - 0.9) * g.values[i];
            sec[i] = 0.999 * sec[i] + (1 - 0.999) * (g.values[i] * g.values[i]);
            const double mh = m[i] / (1 - std::pow(0.9, t));
            const double vh = sec[i] / (1 - std::pow(0.999, t));
            theta[i] = theta[i] - alpha * mh / (std::sqrt(vh) + 1e-15);
        }
        CHECK(v.gather(s) == theta);
    }
    CHECK(state.step == 5);
    Gradients wrong;
    wrong.values.resize(2);
    CHECK_THROWS_AS(adam_step(s, wrong, state, lr), std::invalid_argument);
}

TEST_CASE("position learning rate decays log-linearly") {
    LearningRates lr;
    CHECK(lr.position_at(0) == doctest::Approx(1.6e-4));
    CHECK(lr.position_at(30000) == doctest::Approx(1.6e-6));
    CHECK(lr.position_at(15000) == doctest::Approx(1.6e-5));
    CHECK(lr.position_at(90000) == doctest::Approx(1.6e-6));
    CHECK(lr.for_class(ParamClass::Beta, 0) == lr.globals);
}

TEST_CASE("densify clones small hot elements, splits large ones, and drops huge ones") {
    Scene s;
    s.sh_degree_color = 0;
    s.sh_degree_opacity = 0;
    for (double scale : {0.001, 0.5, 0.001, 0.001}) {
        GaussianElement e = s.make_element();
        e.log_scale = {std::log(scale), std::log(scale), std::log(scale)};
        s.elements.push_back(e);
    }
    GradStats st;
    st.reset(4);
    for (std::size_t i = 0; i < 4; ++i) {
        st.count[i] = 2;
        st.grad_norm_sum[i] = i == 2 ? 0.0 : 1.0;
        st.max_radius[i] = i == 3 ? 1000.0 : 5.0;
        st.position_grad_sum[i] = {1.0, 0.0, 0.0};
    }
    DensifyConfig cfg;
    const DensifyResult r = densify(s, st, cfg, 2.0, 7);
    CHECK(r.cloned == 1);
    CHECK(r.split == 1);
    CHECK(r.removed == 1);
    REQUIRE(r.scene.elements.size() == 5);
    CHECK(r.source == std::vector<std::size_t>{0, 2, 0, 1, 1});
    CHECK(r.fresh == std::vector<unsigned char>{0, 0, 1, 1, 1});
    // The clone moves against the accumulated position gradient.
    CHECK(r.scene.elements[2].position.x == doctest::Approx(-0.0005));
    CHECK(r.scene.elements[3].log_scale.x == doctest::Approx(std::log(0.5) - std::log(1.6)));
    CHECK(densify(s, st, cfg, 2.0, 7).scene.elements[4].position.y == r.scene.elements[4].position.y);

    AdamState state;
    state.first.assign(ParamView(s).size(), 0.0);
    state.second = state.first;
    for (std::size_t i = 0; i < state.first.size(); ++i) state.first[i] = static_cast<double>(i);
    const ParamView before(s), after(r.scene);
    remap_adam_state(state, before, after, r);
    REQUIRE(state.first.size() == after.size());
    CHECK(state.first[after.element_stride()] == static_cast<double>(2 * before.element_stride()));
    CHECK(state.first[2 * after.element_stride()] == 0.0);
    CHECK(state.first.back() == static_cast<double>(before.size() - 1));
}

TEST_CASE("grad stats scale screen gradients to normalized device units") {
    BackwardResult b;
    b.visible = {1, 0};
    b.mean2d_grad = {{3.0 / 32.0, 4.0 / 32.0}, {1.0, 1.0}};
    b.radius = {2.5, 9.0};
    Camera cam = orbit_camera(0, 0, 3, 64, 64, 0.8);
    GradStats st;
    st.reset(2);
    const std::vector<double> pos(2 * 7, 1.0);
    st.add(b, cam, pos);
    CHECK(st.mean_grad(0) == doctest::Approx(5.0));
    CHECK(st.count[1] == 0);
    CHECK(st.max_radius[0] == 2.5);
}

TEST_CASE("zero iterations return the initial scene unchanged") {
    const Dataset d = toy_dataset(2);
    const SynthData toy = synth_toy20();
    TrainConfig cfg;
    cfg.iterations = 0;
    const TrainResult r = train(d, cfg, &toy.scene);
    CHECK(r.log.empty());
    CHECK(ParamView(r.scene).gather(r.scene) == ParamView(toy.scene).gather(toy.scene));
}

TEST_CASE("training is deterministic for a seed") {
    const Dataset d = toy_dataset(3);
    TrainConfig cfg;
    cfg.iterations = 120;
    cfg.initial_points = 30;
    cfg.eval_interval = 40;
    cfg.densify.start = 50;
    cfg.densify.interval = 50;
    cfg.sh_degree_color = 1;
    cfg.sh_degree_opacity = 1;
    const TrainResult a = train(d, cfg), b = train(d, cfg);
    REQUIRE(a.log.size() == 3);
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].loss == b.log[i].loss);
        CHECK(a.log[i].psnr == b.log[i].psnr);
        CHECK(a.log[i].elements == b.log[i].elements);
    }
    CHECK(ParamView(a.scene).gather(a.scene) == ParamView(b.scene).gather(b.scene));
    cfg.render.workers = 2;
    const TrainResult c = train(d, cfg);
    CHECK(ParamView(c.scene).gather(c.scene) == ParamView(a.scene).gather(a.scene));
}

TEST_CASE("full-batch descent lowers the smoothed loss") {
    const Dataset d = toy_dataset(4);
    RandomSceneOptions ro;
    ro.sh_degree_color = 0;
    ro.sh_degree_opacity = 0;
    Scene s = scene_new_random(40, {{-1, -1, -1}, {1, 1, 1}}, 3, ro);
    AdamState state;
    LearningRates lr;
    BackwardOptions o;
    std::vector<double> losses;
    for (int step = 0; step < 50; ++step) {
        Gradients total;
        total.values.assign(ParamView(s).size(), 0.0);
        double l = 0.0;
        for (std::size_t v = 0; v < d.cameras.size(); ++v) {
            const BackwardResult b = backward_wsr(s, d.cameras[v], d.images[v], o);
            l += b.loss;
            for (std::size_t i = 0; i < total.values.size(); ++i) total.values[i] += b.grads.values[i];
        }
        losses.push_back(l);
        adam_step(s, total, state, lr);
    }
    // Means over windows of ten steps.
    for (std::size_t w = 1; w < 5; ++w) {
        const double prev = std::accumulate(losses.begin() + static_cast<std::ptrdiff_t>(10 * (w - 1)),
                                            losses.begin() + static_cast<std::ptrdiff_t>(10 * w), 0.0);
        const double cur = std::accumulate(losses.begin() + static_cast<std::ptrdiff_t>(10 * w),
                                           losses.begin() + static_cast<std::ptrdiff_t>(10 * (w + 1)), 0.0);
        CHECK(cur < prev);
    }
}

TEST_CASE("dataset problems are rejected") {
    Dataset d = toy_dataset(2);
    d.images.pop_back();
    CHECK_THROWS_AS(train(d, TrainConfig{}), std::invalid_argument);
    CHECK_THROWS_AS(train(Dataset{}, TrainConfig{}), std::invalid_argument);
}

}
