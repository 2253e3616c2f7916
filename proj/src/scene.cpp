#include "wsr/scene.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace wsr {

std::string_view to_string(WeightKind kind) {
    switch (kind) {
        case WeightKind::Dir: return "dir";
        case WeightKind::Exp: return "exp";
        case WeightKind::Lc: return "lc";
    }
    return "?";
}

WeightKind parse_weight_kind(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "dir") return WeightKind::Dir;
    if (lower == "exp") return WeightKind::Exp;
    if (lower == "lc") return WeightKind::Lc;
    throw std::invalid_argument("unknown weight model '" + std::string(name) + "' (expected dir|exp|lc)");
}

WeightModel WeightModel::initial(WeightKind kind) {
    switch (kind) {
        case WeightKind::Dir: return dir();
        case WeightKind::Exp: return exp(0.1, 0.8);
        case WeightKind::Lc: return lc(10.0);
    }
    return dir();
}

void WeightModel::validate() const {
    switch (kind) {
        case WeightKind::Dir: return;
        case WeightKind::Exp:
            if (!(sigma > 0.0) || !(beta > 0.0)) throw std::invalid_argument("EXP weight needs sigma > 0 and beta > 0");
            return;
        case WeightKind::Lc:
            if (!(sigma > 0.0)) throw std::invalid_argument("LC weight needs sigma > 0");
            return;
    }
}

void Scene::validate() const {
    if (sh_degree_color < 0 || sh_degree_color > kMaxShDegree || sh_degree_opacity < 0 ||
        sh_degree_opacity > kMaxShDegree)
        throw std::invalid_argument("scene sh degrees must be in [0,3]");
    if (!std::isfinite(background_weight) || background_weight < 0.0)
        throw std::invalid_argument("background weight must be finite and >= 0");
    weight_model.validate();
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const auto& e = elements[i];
        const std::string where = "element " + std::to_string(i) + ": ";
        if (e.color_sh.degree() != sh_degree_color || e.color_sh.channels() != 3)
            throw std::invalid_argument(where + "color sh shape does not match scene");
        if (e.opacity_sh.degree() != sh_degree_opacity || e.opacity_sh.channels() != 1)
            throw std::invalid_argument(where + "opacity sh shape does not match scene");
        for (std::size_t k = 0; k < 3; ++k) {
            const double s = std::exp(e.log_scale[k]);
            if (!std::isfinite(s) || !(s > 0.0)) throw std::invalid_argument(where + "scale not finite and positive");
        }
        if (!(norm(e.rotation) > 1e-9)) throw std::invalid_argument(where + "zero quaternion");
    }
}

GaussianElement Scene::make_element() const {
    GaussianElement e;
    e.color_sh = ShCoeffs(sh_degree_color, 3);
    e.opacity_sh = ShCoeffs(sh_degree_opacity, 1);
    return e;
}

Scene scene_new_random(std::size_t n, const Aabb& bounds, std::uint64_t seed, const RandomSceneOptions& options) {
    if (n == 0) throw std::invalid_argument("scene_new_random needs n >= 1");
    Scene scene;
    scene.weight_model = WeightModel::initial(options.weight_kind);
    scene.sh_degree_color = options.sh_degree_color;
    scene.sh_degree_opacity = options.sh_degree_opacity;
    scene.background_color = options.background_color;
    scene.background_weight = options.background_weight;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    const double base_log_scale = std::log(options.scale_fraction * bounds.diagonal());
    scene.elements.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        GaussianElement e = scene.make_element();
        e.position = {uniform(bounds.min.x, bounds.max.x), uniform(bounds.min.y, bounds.max.y),
                      uniform(bounds.min.z, bounds.max.z)};
        e.rotation = {1.0, uniform(-0.1, 0.1), uniform(-0.1, 0.1), uniform(-0.1, 0.1)};
        e.log_scale = {base_log_scale + uniform(-0.1, 0.1), base_log_scale + uniform(-0.1, 0.1),
                       base_log_scale + uniform(-0.1, 0.1)};
        for (int c = 0; c < 3; ++c) e.color_sh(c, 0) = uniform(-0.25, 0.25) / kShC0;
        e.opacity_sh(0, 0) = options.initial_opacity / kShC0;
        e.lc_weight = 0.1;
        scene.elements.push_back(e);
    }
    return scene;
}

std::size_t scene_param_count(const Scene& scene) { return ParamView(scene).size(); }

std::string_view to_string(ParamClass cls) {
    switch (cls) {
        case ParamClass::Position: return "position";
        case ParamClass::Rotation: return "rotation";
        case ParamClass::LogScale: return "log_scale";
        case ParamClass::ColorSh: return "color_sh";
        case ParamClass::OpacitySh: return "opacity_sh";
        case ParamClass::LcWeight: return "lc_weight";
        case ParamClass::Sigma: return "sigma";
        case ParamClass::Beta: return "beta";
        case ParamClass::BackgroundWeight: return "background_weight";
    }
    return "?";
}

ParamView::ParamView(const Scene& scene)
    : kind_(scene.weight_model.kind),
      element_count_(scene.elements.size()),
      color_width_(3 * sh_basis_count(scene.sh_degree_color)),
      opacity_width_(sh_basis_count(scene.sh_degree_opacity)),
      stride_(3 + 4 + 3 + color_width_ + opacity_width_ + 1) {}

std::size_t ParamView::global_count() const {
    switch (kind_) {
        case WeightKind::Dir: return 1;
        case WeightKind::Exp: return 3;
        case WeightKind::Lc: return 2;
    }
    return 1;
}

bool ParamView::has_class(ParamClass cls) const {
    switch (cls) {
        case ParamClass::Sigma: return kind_ != WeightKind::Dir;
        case ParamClass::Beta: return kind_ == WeightKind::Exp;
        default: return true;
    }
}

std::size_t ParamView::class_offset(ParamClass cls) const {
    switch (cls) {
        case ParamClass::Position: return 0;
        case ParamClass::Rotation: return 3;
        case ParamClass::LogScale: return 7;
        case ParamClass::ColorSh: return 10;
        case ParamClass::OpacitySh: return 10 + color_width_;
        case ParamClass::LcWeight: return 10 + color_width_ + opacity_width_;
        case ParamClass::Sigma: return 0;
        case ParamClass::Beta: return 1;
        case ParamClass::BackgroundWeight: return global_count() - 1;
    }
    return 0;
}

std::size_t ParamView::class_width(ParamClass cls) const {
    switch (cls) {
        case ParamClass::Position: return 3;
        case ParamClass::Rotation: return 4;
        case ParamClass::LogScale: return 3;
        case ParamClass::ColorSh: return color_width_;
        case ParamClass::OpacitySh: return opacity_width_;
        case ParamClass::LcWeight: return 1;
        default: return has_class(cls) ? 1 : 0;
    }
}

std::size_t ParamView::index(const ParamSlot& slot) const {
    switch (slot.cls) {
        case ParamClass::Sigma:
        case ParamClass::Beta:
        case ParamClass::BackgroundWeight:
            if (!has_class(slot.cls)) throw std::invalid_argument("parameter class not present for this weight model");
            return element_count_ * stride_ + class_offset(slot.cls);
        default:
            if (slot.element >= element_count_ || slot.component >= class_width(slot.cls))
                throw std::out_of_range("parameter slot out of range");
            return slot.element * stride_ + class_offset(slot.cls) + slot.component;
    }
}

ParamSlot ParamView::slot(std::size_t index) const {
    if (index >= size()) throw std::out_of_range("parameter index out of range");
    const std::size_t element_part = element_count_ * stride_;
    if (index >= element_part) {
        const std::size_t g = index - element_part;
        if (g == global_count() - 1) return {ParamClass::BackgroundWeight, 0, 0};
        return {g == 0 ? ParamClass::Sigma : ParamClass::Beta, 0, 0};
    }
    const std::size_t element = index / stride_;
    const std::size_t local = index % stride_;
    static constexpr ParamClass kOrder[] = {ParamClass::Position, ParamClass::Rotation, ParamClass::LogScale,
                                            ParamClass::ColorSh, ParamClass::OpacitySh, ParamClass::LcWeight};
    for (ParamClass cls : kOrder) {
        const std::size_t off = class_offset(cls);
        if (local < off + class_width(cls)) return {cls, element, local - off};
    }
    throw std::logic_error("parameter layout inconsistent");
}

double* ParamView::locate(Scene& scene, std::size_t index) const {
    const ParamSlot s = slot(index);
    switch (s.cls) {
        case ParamClass::Sigma: return &scene.weight_model.sigma;
        case ParamClass::Beta: return &scene.weight_model.beta;
        case ParamClass::BackgroundWeight: return &scene.background_weight;
        default: break;
    }
    GaussianElement& e = scene.elements[s.element];
    switch (s.cls) {
        case ParamClass::Position: return &e.position[s.component];
        case ParamClass::Rotation: {
            double* q[] = {&e.rotation.w, &e.rotation.x, &e.rotation.y, &e.rotation.z};
            return q[s.component];
        }
        case ParamClass::LogScale: return &e.log_scale[s.component];
        case ParamClass::ColorSh: return &e.color_sh.values()[s.component];
        case ParamClass::OpacitySh: return &e.opacity_sh.values()[s.component];
        case ParamClass::LcWeight: return &e.lc_weight;
        default: break;
    }
    throw std::logic_error("unreachable parameter class");
}

double ParamView::get(const Scene& scene, std::size_t index) const {
    return *locate(const_cast<Scene&>(scene), index);
}

void ParamView::set(Scene& scene, std::size_t index, double value) const { *locate(scene, index) = value; }

std::vector<double> ParamView::gather(const Scene& scene) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < element_count_; ++i) {
        const GaussianElement& e = scene.elements[i];
        double* o = out.data() + i * stride_;
        o[0] = e.position.x;
        o[1] = e.position.y;
        o[2] = e.position.z;
        o[3] = e.rotation.w;
        o[4] = e.rotation.x;
        o[5] = e.rotation.y;
        o[6] = e.rotation.z;
        o[7] = e.log_scale.x;
        o[8] = e.log_scale.y;
        o[9] = e.log_scale.z;
        std::copy(e.color_sh.values().begin(), e.color_sh.values().end(), o + 10);
        std::copy(e.opacity_sh.values().begin(), e.opacity_sh.values().end(), o + 10 + color_width_);
        o[stride_ - 1] = e.lc_weight;
    }
    double* g = out.data() + element_count_ * stride_;
    if (has_class(ParamClass::Sigma)) g[0] = scene.weight_model.sigma;
    if (has_class(ParamClass::Beta)) g[1] = scene.weight_model.beta;
    g[global_count() - 1] = scene.background_weight;
    return out;
}

void ParamView::scatter(std::span<const double> values, Scene& scene) const {
    if (values.size() != size() || scene.elements.size() != element_count_)
        throw std::invalid_argument("parameter vector does not match scene layout");
    for (std::size_t i = 0; i < element_count_; ++i) {
        GaussianElement& e = scene.elements[i];
        const double* v = values.data() + i * stride_;
        e.position = {v[0], v[1], v[2]};
        e.rotation = {v[3], v[4], v[5], v[6]};
        e.log_scale = {v[7], v[8], v[9]};
        std::copy(v + 10, v + 10 + color_width_, e.color_sh.values().begin());
        std::copy(v + 10 + color_width_, v + 10 + color_width_ + opacity_width_, e.opacity_sh.values().begin());
        e.lc_weight = v[stride_ - 1];
    }
    const double* g = values.data() + element_count_ * stride_;
    if (has_class(ParamClass::Sigma)) scene.weight_model.sigma = g[0];
    if (has_class(ParamClass::Beta)) scene.weight_model.beta = g[1];
    scene.background_weight = g[global_count() - 1];
}

}  // namespace wsr
