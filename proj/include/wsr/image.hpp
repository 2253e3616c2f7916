#pragma once

#include <cstddef>
#include <vector>

#include "wsr/math.hpp"

namespace wsr {

/// Row-major interleaved RGB image with real-valued channels.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(int w, int h, const Vec3& fill = {})
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3) {
        for (std::size_t i = 0; i < pixels.size(); i += 3) {
            pixels[i] = fill.x;
            pixels[i + 1] = fill.y;
            pixels[i + 2] = fill.z;
        }
    }

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
    std::size_t offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
    }
    double& at(int x, int y, int c) { return pixels[offset(x, y) + static_cast<std::size_t>(c)]; }
    double at(int x, int y, int c) const { return pixels[offset(x, y) + static_cast<std::size_t>(c)]; }
    Vec3 pixel(int x, int y) const {
        const std::size_t o = offset(x, y);
        return {pixels[o], pixels[o + 1], pixels[o + 2]};
    }
    void set_pixel(int x, int y, const Vec3& v) {
        const std::size_t o = offset(x, y);
        pixels[o] = v.x;
        pixels[o + 1] = v.y;
        pixels[o + 2] = v.z;
    }
    bool same_size(const Image& o) const { return width == o.width && height == o.height; }
};

}  // namespace wsr
