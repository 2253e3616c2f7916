#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "wsr/math.hpp"
#include "wsr/sh.hpp"

namespace wsr {

struct GaussianElement {
    Vec3 position;
    Quat rotation;
    Vec3 log_scale;
    ShCoeffs color_sh{0, 3};
    ShCoeffs opacity_sh{0, 1};
    double lc_weight = 0.1;
};

enum class WeightKind : std::uint8_t { Dir = 0, Exp = 1, Lc = 2 };

std::string_view to_string(WeightKind kind);
/// Accepts "dir", "exp", "lc" (any case). Throws std::invalid_argument otherwise.
WeightKind parse_weight_kind(std::string_view name);

struct WeightModel {
    WeightKind kind = WeightKind::Lc;
    double sigma = 10.0;
    double beta = 0.8;

    static WeightModel dir() { return {WeightKind::Dir, 0.0, 0.0}; }
    static WeightModel exp(double sigma = 0.1, double beta = 0.8) { return {WeightKind::Exp, sigma, beta}; }
    static WeightModel lc(double sigma = 10.0) { return {WeightKind::Lc, sigma, 0.0}; }
    /// Initial values used when training starts: EXP sigma=0.1 beta=0.8, LC sigma=10.
    static WeightModel initial(WeightKind kind);

    /// Throws std::invalid_argument when the variant's parameters are out of range.
    void validate() const;
};

struct Scene {
    std::vector<GaussianElement> elements;
    WeightModel weight_model;
    Vec3 background_color{0.0, 0.0, 0.0};
    double background_weight = 1.0;
    int sh_degree_color = 3;
    int sh_degree_opacity = 3;

    /// Checks degrees, per-element shapes, positive finite scales, nonzero
    /// quaternions, and the background weight. Throws std::invalid_argument.
    void validate() const;

    /// Element with zeroed coefficients at this scene's SH degrees.
    GaussianElement make_element() const;
};

struct Aabb {
    Vec3 min;
    Vec3 max;
    double diagonal() const { return norm(max - min); }
};

struct RandomSceneOptions {
    WeightKind weight_kind = WeightKind::Lc;
    int sh_degree_color = 3;
    int sh_degree_opacity = 3;
    double initial_opacity = 0.5;
    double background_weight = 1.0;
    Vec3 background_color{0.0, 0.0, 0.0};
    double scale_fraction = 0.05;
};

/// Deterministic random scene: uniform positions in bounds, near-identity
/// rotations, log_scale around log(scale_fraction * diagonal), degree-0 color.
/// Throws std::invalid_argument when n == 0.
Scene scene_new_random(std::size_t n, const Aabb& bounds, std::uint64_t seed, const RandomSceneOptions& options = {});

std::size_t scene_param_count(const Scene& scene);

enum class ParamClass : std::uint8_t {
    Position,
    Rotation,
    LogScale,
    ColorSh,
    OpacitySh,
    LcWeight,
    Sigma,
    Beta,
    BackgroundWeight,
};

std::string_view to_string(ParamClass cls);

struct ParamSlot {
    ParamClass cls = ParamClass::Position;
    std::size_t element = 0;  // ignored for global classes
    std::size_t component = 0;
};

/// Flat enumeration of every trainable scalar. Per element:
/// position(3) rotation(4) log_scale(3) color_sh(3*(Dc+1)^2) opacity_sh((Do+1)^2) lc_weight(1),
/// then globals: sigma (EXP, LC), beta (EXP), background weight.
class ParamView {
public:
    explicit ParamView(const Scene& scene);

    std::size_t size() const { return element_count_ * stride_ + global_count(); }
    std::size_t element_count() const { return element_count_; }
    std::size_t element_stride() const { return stride_; }
    std::size_t global_count() const;

    /// Offset of the first component of a class within an element block.
    std::size_t class_offset(ParamClass cls) const;
    std::size_t class_width(ParamClass cls) const;
    bool has_class(ParamClass cls) const;

    std::size_t index(const ParamSlot& slot) const;
    ParamSlot slot(std::size_t index) const;

    std::vector<double> gather(const Scene& scene) const;
    void scatter(std::span<const double> values, Scene& scene) const;

    double get(const Scene& scene, std::size_t index) const;
    void set(Scene& scene, std::size_t index, double value) const;

private:
    double* locate(Scene& scene, std::size_t index) const;

    WeightKind kind_;
    std::size_t element_count_;
    std::size_t color_width_;
    std::size_t opacity_width_;
    std::size_t stride_;
};

}  // namespace wsr
