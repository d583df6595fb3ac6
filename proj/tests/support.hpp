#pragma once

#include "pickact/flow.hpp"
#include "pickact/image.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

namespace testsupport {

// Smooth band-limited texture evaluated analytically, so a shifted copy is
// exact at any subpixel offset.
struct Texture {
    static constexpr int kWaves = 8;
    std::array<double, kWaves> fx{}, fy{}, phase{}, amp{};

    explicit Texture(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> freq(0.08, 0.35), ang(0.0, 2.0 * M_PI), a(0.03, 0.07);
        for (int i = 0; i < kWaves; ++i) {
            const double f = freq(rng), t = ang(rng);
            fx[i] = f * std::cos(t);
            fy[i] = f * std::sin(t);
            phase[i] = ang(rng);
            amp[i] = a(rng);
        }
    }

    double operator()(double x, double y) const {
        double v = 0.5;
        for (int i = 0; i < kWaves; ++i)
            v += amp[i] * std::sin(fx[i] * x + fy[i] * y + phase[i]);
        return v;
    }
};

// Frame showing `tex` moved by (dx, dy): pixel p holds tex(p - d).
inline pickact::GrayFrame render(const Texture& tex, int w, int h, double dx = 0.0, double dy = 0.0) {
    pickact::GrayFrame f(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            f.at(x, y) = static_cast<float>(tex(x - dx, y - dy));
    return f;
}

struct FlowError {
    double mean_epe = 0.0;
    double mean_dx = 0.0;
    double mean_dy = 0.0;
};

inline FlowError interior_error(const pickact::FlowField& f, double dx, double dy, int margin) {
    FlowError e;
    int n = 0;
    for (int y = margin; y < f.height - margin; ++y)
        for (int x = margin; x < f.width - margin; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * f.width + x;
            e.mean_epe += std::hypot(f.dx[i] - dx, f.dy[i] - dy);
            e.mean_dx += f.dx[i];
            e.mean_dy += f.dy[i];
            ++n;
        }
    e.mean_epe /= n;
    e.mean_dx /= n;
    e.mean_dy /= n;
    return e;
}

}  // namespace testsupport
