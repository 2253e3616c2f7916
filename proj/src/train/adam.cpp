#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "wsr/train.hpp"

namespace wsr {

double LearningRates::position_at(std::size_t step) const {
    if (position_decay_steps == 0 || position <= 0.0 || position_final <= 0.0) return position;
    const double t = std::clamp(static_cast<double>(step) / static_cast<double>(position_decay_steps), 0.0, 1.0);
    return std::exp(std::log(position) * (1.0 - t) + std::log(position_final) * t);
}

double LearningRates::for_class(ParamClass cls, std::size_t step) const {
    switch (cls) {
        case ParamClass::Position: return position_at(step);
        case ParamClass::Rotation: return rotation;
        case ParamClass::LogScale: return scale;
        case ParamClass::ColorSh: return color_sh;
        case ParamClass::OpacitySh: return opacity_sh;
        case ParamClass::LcWeight: return lc_weight;
        case ParamClass::Sigma:
        case ParamClass::Beta:
        case ParamClass::BackgroundWeight: return globals;
    }
    return 0.0;
}

void adam_step(Scene& scene, const Gradients& grads, AdamState& state, const LearningRates& lr) {
    const ParamView view(scene);
    const std::size_t n = view.size();
    if (grads.values.size() != n) throw std::invalid_argument("gradient size does not match the scene layout");
    if (state.first.empty() && state.second.empty()) {
        state.first.assign(n, 0.0);
        state.second.assign(n, 0.0);
    }
    if (state.first.size() != n || state.second.size() != n)
        throw std::invalid_argument("optimizer state does not match the scene layout");

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(AdamState::kBeta1, t);
    const double bc2 = 1.0 - std::pow(AdamState::kBeta2, t);

    std::vector<double> params = view.gather(scene);
    static constexpr ParamClass kElementClasses[] = {ParamClass::Position, ParamClass::Rotation, ParamClass::LogScale,
                                                     ParamClass::ColorSh, ParamClass::OpacitySh, ParamClass::LcWeight};
    // Learning rate per slot, by class.
    std::vector<double> rate(n);
    const std::size_t stride = view.element_stride();
    for (ParamClass cls : kElementClasses) {
        const double r = lr.for_class(cls, state.step - 1);
        const std::size_t off = view.class_offset(cls), width = view.class_width(cls);
        for (std::size_t e = 0; e < view.element_count(); ++e)
            std::fill_n(rate.begin() + static_cast<std::ptrdiff_t>(e * stride + off), width, r);
    }
    for (std::size_t i = view.element_count() * stride; i < n; ++i) rate[i] = lr.globals;

    for (std::size_t i = 0; i < n; ++i) {
        const double g = grads.values[i];
        state.first[i] = AdamState::kBeta1 * state.first[i] + (1.0 - AdamState::kBeta1) * g;
        state.second[i] = AdamState::kBeta2 * state.second[i] + (1.0 - AdamState::kBeta2) * (g * g);
        const double m_hat = state.first[i] / bc1;
        const double v_hat = state.second[i] / bc2;
        const double next = params[i] - rate[i] * m_hat / (std::sqrt(v_hat) + AdamState::kEpsilon);
        if (!std::isfinite(next)) {
            const ParamSlot slot = view.slot(i);
            throw std::runtime_error("non-finite update for " + std::string(to_string(slot.cls)) + " of element " +
                                     std::to_string(slot.element) + " component " + std::to_string(slot.component));
        }
        params[i] = next;
    }
    view.scatter(params, scene);
}

void remap_adam_state(AdamState& state, const ParamView& before, const ParamView& after, const DensifyResult& result) {
    if (state.first.empty()) return;
    if (state.first.size() != before.size()) throw std::invalid_argument("optimizer state does not match the scene layout");
    if (result.source.size() != after.element_count()) throw std::invalid_argument("densify result is inconsistent");
    std::vector<double> first(after.size(), 0.0), second(after.size(), 0.0);
    const std::size_t sb = before.element_stride(), sa = after.element_stride();
    for (std::size_t e = 0; e < after.element_count(); ++e) {
        if (result.fresh[e]) continue;
        const std::size_t src = result.source[e];
        std::copy_n(state.first.begin() + static_cast<std::ptrdiff_t>(src * sb), sa,
                    first.begin() + static_cast<std::ptrdiff_t>(e * sa));
        std::copy_n(state.second.begin() + static_cast<std::ptrdiff_t>(src * sb), sa,
                    second.begin() + static_cast<std::ptrdiff_t>(e * sa));
    }
    const std::size_t gb = before.element_count() * sb, ga = after.element_count() * sa;
    for (std::size_t g = 0; g < after.global_count(); ++g) {
        first[ga + g] = state.first[gb + g];
        second[ga + g] = state.second[gb + g];
    }
    state.first = std::move(first);
    state.second = std::move(second);
}

}  // namespace wsr
