#pragma once

#include "pickact/image.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace pickact {

/// Coarse-to-fine settings for the Farneback estimator.
///
/// `window_radius` sizes both the polynomial-expansion neighbourhood and the
/// Gaussian window over which the displacement constraints are averaged
/// (a (2r+1)x(2r+1) support in both cases).
struct PyramidConfig {
    int levels = 3;        // total number of levels, including full resolution
    double scale = 0.5;    // size ratio between successive levels
    int window_radius = 7;
    int iterations = 3;    // refinement passes per level
    double poly_sigma = 1.5;
};

void validate(const PyramidConfig& cfg);

/// Dense displacement field mapping prev -> next, in pixels/frame.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<float> dx;
    std::vector<float> dy;

    FlowField() = default;
    FlowField(int w, int h)
        : width(w), height(h), dx(static_cast<std::size_t>(w) * h, 0.0f), dy(static_cast<std::size_t>(w) * h, 0.0f) {}

    std::size_t size() const { return dx.size(); }
    bool operator==(const FlowField&) const = default;
};

/// Per-pixel local quadratic model f(p + u) ~ u^T A u + b^T u + c, with
/// A = [[axx, axy], [axy, ayy]] and b = (bx, by), u in pixel offsets.
struct QuadraticCoeffs {
    int width = 0;
    int height = 0;
    std::vector<double> axx, axy, ayy, bx, by, c;

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

/// Weighted least-squares quadratic fit around every pixel. Pixels closer than
/// `window_radius` to the border copy the coefficients of the nearest pixel
/// whose window fits. Throws DimensionError if the frame is smaller than the window.
QuadraticCoeffs polynomial_expansion(const GrayFrame& frame, const PyramidConfig& cfg);

/// Polynomial expansions of every pyramid level of one frame, finest first.
/// Building these once per frame lets a frame serve as both `prev` and `next`.
struct ExpandedFrame {
    std::vector<QuadraticCoeffs> levels;
};

ExpandedFrame expand_frame(const GrayFrame& frame, const PyramidConfig& cfg);

FlowField estimate_flow(const ExpandedFrame& prev, const ExpandedFrame& next, const PyramidConfig& cfg);
FlowField estimate_flow(const GrayFrame& prev, const GrayFrame& next, const PyramidConfig& cfg = {});

/// Magnitude (pixels/frame) and undirected orientation in degrees, [0, 180).
struct PolarSample {
    double magnitude = 0.0;
    double orientation = 0.0;
    bool operator==(const PolarSample&) const = default;
};

PolarSample to_polar(double dx, double dy);

struct PolarField {
    int width = 0;
    int height = 0;
    std::vector<PolarSample> samples;
};

PolarField to_polar(const FlowField& field);

// Flow cache: "HFLW", u32 width, u32 height, then width*height (dx, dy)
// float32 pairs, row-major, all little-endian.
std::vector<std::uint8_t> encode_flow_cache(const FlowField& field);
FlowField decode_flow_cache(const std::vector<std::uint8_t>& bytes);
void write_flow_cache(const std::filesystem::path& path, const FlowField& field);
FlowField read_flow_cache(const std::filesystem::path& path);

}  // namespace pickact
