#include "pickact/flow.hpp"

#include "pickact/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

namespace pickact {

void validate(const PyramidConfig& cfg) {
    if (cfg.levels < 1)
        throw DataError("pyramid levels must be >= 1");
    if (!(cfg.scale > 0.0 && cfg.scale < 1.0))
        throw DataError("pyramid scale must lie in (0, 1)");
    if (cfg.window_radius < 2)
        throw DataError("window_radius must be >= 2");
    if (cfg.iterations < 1)
        throw DataError("iterations must be >= 1");
    if (!(cfg.poly_sigma > 0.0) || !std::isfinite(cfg.poly_sigma))
        throw DataError("poly_sigma must be > 0");
}

namespace {

// Displacement constraints from pixels whose coefficients were replicated
// from the interior count this much relative to interior pixels.
constexpr double kBorderWeight = 0.2;
// Added to the 2x2 determinant so textureless regions resolve to zero flow.
constexpr double kDetEpsilon = 1e-16;

struct Plane {
    int w = 0;
    int h = 0;
    std::vector<double> v;

    Plane() = default;
    Plane(int width, int height) : w(width), h(height), v(static_cast<std::size_t>(width) * height, 0.0) {}
    double at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
    double& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
};

Plane to_plane(const GrayFrame& f) {
    Plane p(f.width, f.height);
    std::copy(f.data.begin(), f.data.end(), p.v.begin());
    return p;
}

std::vector<double> gaussian_kernel(int radius, double sigma) {
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[i + radius];
    }
    for (double& x : k)
        x /= sum;
    return k;
}

// Separable convolution with replicated borders.
Plane convolve_separable(const Plane& src, const std::vector<double>& k) {
    const int r = static_cast<int>(k.size() / 2);
    const int w = src.w, h = src.h;
    Plane tmp(w, h), out(w, h);
    std::vector<double> row(static_cast<std::size_t>(w + 2 * r));
    for (int y = 0; y < h; ++y) {
        const double* in = &src.v[static_cast<std::size_t>(y) * w];
        for (int x = -r; x < w + r; ++x)
            row[x + r] = in[std::clamp(x, 0, w - 1)];
        double* dst = &tmp.v[static_cast<std::size_t>(y) * w];
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int i = 0; i <= 2 * r; ++i)
                s += k[i] * row[x + i];
            dst[x] = s;
        }
    }
    // vertical pass row by row so the inner loop runs over contiguous memory
    for (int y = 0; y < h; ++y) {
        double* dst = &out.v[static_cast<std::size_t>(y) * w];
        for (int i = -r; i <= r; ++i) {
            const double* in = &tmp.v[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w];
            const double kw = k[i + r];
            for (int x = 0; x < w; ++x)
                dst[x] += kw * in[x];
        }
    }
    return out;
}

Plane gaussian_blur(const Plane& src, double sigma) {
    if (sigma <= 0.0)
        return src;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    return convolve_separable(src, gaussian_kernel(radius, sigma));
}

// Clamped bilinear lookup.
double sample_bilinear(const Plane& p, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(p.w - 1));
    y = std::clamp(y, 0.0, static_cast<double>(p.h - 1));
    const int x0 = std::min(static_cast<int>(x), p.w - 1);
    const int y0 = std::min(static_cast<int>(y), p.h - 1);
    const int x1 = std::min(x0 + 1, p.w - 1);
    const int y1 = std::min(y0 + 1, p.h - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    return (1.0 - fy) * ((1.0 - fx) * p.at(x0, y0) + fx * p.at(x1, y0)) +
           fy * ((1.0 - fx) * p.at(x0, y1) + fx * p.at(x1, y1));
}

Plane resize_bilinear(const Plane& src, int w, int h) {
    if (src.w == w && src.h == h)
        return src;
    Plane out(w, h);
    const double sx = static_cast<double>(src.w) / w;
    const double sy = static_cast<double>(src.h) / h;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(x, y) = sample_bilinear(src, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
    return out;
}

// Basis order: 1, u, v, u^2, v^2, uv.
Eigen::Matrix<double, 6, 6> inverse_normal_matrix(const std::vector<double>& g) {
    const int r = static_cast<int>(g.size() / 2);
    Eigen::Matrix<double, 6, 6> G = Eigen::Matrix<double, 6, 6>::Zero();
    for (int v = -r; v <= r; ++v) {
        for (int u = -r; u <= r; ++u) {
            const double w = g[u + r] * g[v + r];
            const std::array<double, 6> phi{1.0, double(u), double(v), double(u * u), double(v * v), double(u * v)};
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j)
                    G(i, j) += w * phi[i] * phi[j];
        }
    }
    return G.ldlt().solve(Eigen::Matrix<double, 6, 6>::Identity());
}

QuadraticCoeffs expand_plane(const Plane& img, int r, double sigma) {
    const int w = img.w, h = img.h;
    if (w < 2 * r + 1 || h < 2 * r + 1)
        throw DimensionError("frame " + std::to_string(w) + "x" + std::to_string(h) +
                             " is smaller than the expansion window (" + std::to_string(2 * r + 1) + ")");

    const std::vector<double> g = gaussian_kernel(r, sigma);
    std::vector<double> ug(g.size()), uug(g.size());
    for (int u = -r; u <= r; ++u) {
        ug[u + r] = u * g[u + r];
        uug[u + r] = u * u * g[u + r];
    }
    const Eigen::Matrix<double, 6, 6> ginv = inverse_normal_matrix(g);

    QuadraticCoeffs out;
    out.width = w;
    out.height = h;
    for (auto* ch : {&out.axx, &out.axy, &out.ayy, &out.bx, &out.by, &out.c})
        ch->assign(static_cast<std::size_t>(w) * h, 0.0);

    std::vector<double> col0(w), col1(w), col2(w);
    for (int y = r; y < h - r; ++y) {
        std::fill(col0.begin(), col0.end(), 0.0);
        std::fill(col1.begin(), col1.end(), 0.0);
        std::fill(col2.begin(), col2.end(), 0.0);
        for (int v = -r; v <= r; ++v) {
            const double* row = &img.v[static_cast<std::size_t>(y + v) * w];
            const double k0 = g[v + r], k1 = ug[v + r], k2 = uug[v + r];
            for (int x = 0; x < w; ++x) {
                col0[x] += k0 * row[x];
                col1[x] += k1 * row[x];
                col2[x] += k2 * row[x];
            }
        }
        for (int x = r; x < w - r; ++x) {
            Eigen::Matrix<double, 6, 1> m = Eigen::Matrix<double, 6, 1>::Zero();
            for (int u = -r; u <= r; ++u) {
                const int xi = x + u;
                m[0] += g[u + r] * col0[xi];
                m[1] += ug[u + r] * col0[xi];
                m[2] += g[u + r] * col1[xi];
                m[3] += uug[u + r] * col0[xi];
                m[4] += g[u + r] * col2[xi];
                m[5] += ug[u + r] * col1[xi];
            }
            const Eigen::Matrix<double, 6, 1> coef = ginv * m;
            const std::size_t i = out.index(x, y);
            out.c[i] = coef[0];
            out.bx[i] = coef[1];
            out.by[i] = coef[2];
            out.axx[i] = coef[3];
            out.ayy[i] = coef[4];
            out.axy[i] = 0.5 * coef[5];
        }
    }

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int cx = std::clamp(x, r, w - 1 - r);
            const int cy = std::clamp(y, r, h - 1 - r);
            if (cx == x && cy == y)
                continue;
            const std::size_t dst = out.index(x, y), src = out.index(cx, cy);
            for (auto* ch : {&out.axx, &out.axy, &out.ayy, &out.bx, &out.by, &out.c})
                (*ch)[dst] = (*ch)[src];
        }
    }
    return out;
}

struct LevelSize {
    int w;
    int h;
};

std::vector<LevelSize> level_sizes(int w, int h, const PyramidConfig& cfg) {
    std::vector<LevelSize> sizes{{w, h}};
    const int min_side = 2 * cfg.window_radius + 1;
    double s = 1.0;
    for (int k = 1; k < cfg.levels; ++k) {
        s *= cfg.scale;
        const int lw = static_cast<int>(std::lround(w * s));
        const int lh = static_cast<int>(std::lround(h * s));
        if (lw < min_side || lh < min_side)
            break;
        sizes.push_back({lw, lh});
    }
    return sizes;
}

// Bilinear weights for one in-range point, reused across coefficient planes.
struct Bilinear {
    std::size_t i00, i01, i10, i11;
    double w00, w01, w10, w11;

    Bilinear(int w, int h, double x, double y) {
        const int x0 = std::min(static_cast<int>(x), w - 1);
        const int y0 = std::min(static_cast<int>(y), h - 1);
        const int x1 = std::min(x0 + 1, w - 1);
        const int y1 = std::min(y0 + 1, h - 1);
        const double fx = x - x0, fy = y - y0;
        i00 = static_cast<std::size_t>(y0) * w + x0;
        i01 = static_cast<std::size_t>(y0) * w + x1;
        i10 = static_cast<std::size_t>(y1) * w + x0;
        i11 = static_cast<std::size_t>(y1) * w + x1;
        w00 = (1.0 - fy) * (1.0 - fx);
        w01 = (1.0 - fy) * fx;
        w10 = fy * (1.0 - fx);
        w11 = fy * fx;
    }
    double operator()(const std::vector<double>& p) const {
        return w00 * p[i00] + w01 * p[i01] + w10 * p[i10] + w11 * p[i11];
    }
};

// Farneback displacement refinement on one pyramid level; updates (fx, fy) in place.
void refine_level(const QuadraticCoeffs& r0, const QuadraticCoeffs& r1, Plane& fx, Plane& fy,
                  const PyramidConfig& cfg) {
    const int w = r0.width, h = r0.height, r = cfg.window_radius;
    const std::vector<double> avg = gaussian_kernel(r, 0.3 * (2 * r + 1));

    for (int it = 0; it < cfg.iterations; ++it) {
        Plane g11(w, h), g12(w, h), g22(w, h), h1(w, h), h2(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t i = r0.index(x, y);
                const double dx = fx.v[i], dy = fy.v[i];
                const double px = x + dx, py = y + dy;
                if (px < 0.0 || py < 0.0 || px > w - 1 || py > h - 1)
                    continue;
                const bool border = x < r || y < r || x >= w - r || y >= h - r;
                const double weight = border ? kBorderWeight : 1.0;

                const Bilinear bl(w, h, px, py);
                const double axx = 0.5 * (r0.axx[i] + bl(r1.axx));
                const double axy = 0.5 * (r0.axy[i] + bl(r1.axy));
                const double ayy = 0.5 * (r0.ayy[i] + bl(r1.ayy));
                // A d = -(b1 - b0)/2, shifted by the current estimate.
                const double db1 = -0.5 * (bl(r1.bx) - r0.bx[i]) + axx * dx + axy * dy;
                const double db2 = -0.5 * (bl(r1.by) - r0.by[i]) + axy * dx + ayy * dy;

                g11.v[i] = weight * (axx * axx + axy * axy);
                g12.v[i] = weight * axy * (axx + ayy);
                g22.v[i] = weight * (axy * axy + ayy * ayy);
                h1.v[i] = weight * (axx * db1 + axy * db2);
                h2.v[i] = weight * (axy * db1 + ayy * db2);
            }
        }
        g11 = convolve_separable(g11, avg);
        g12 = convolve_separable(g12, avg);
        g22 = convolve_separable(g22, avg);
        h1 = convolve_separable(h1, avg);
        h2 = convolve_separable(h2, avg);
        for (std::size_t i = 0; i < fx.v.size(); ++i) {
            const double det = g11.v[i] * g22.v[i] - g12.v[i] * g12.v[i] + kDetEpsilon;
            fx.v[i] = (g22.v[i] * h1.v[i] - g12.v[i] * h2.v[i]) / det;
            fy.v[i] = (g11.v[i] * h2.v[i] - g12.v[i] * h1.v[i]) / det;
        }
    }
}

}  // namespace

QuadraticCoeffs polynomial_expansion(const GrayFrame& frame, const PyramidConfig& cfg) {
    validate(frame);
    validate(cfg);
    return expand_plane(to_plane(frame), cfg.window_radius, cfg.poly_sigma);
}

ExpandedFrame expand_frame(const GrayFrame& frame, const PyramidConfig& cfg) {
    validate(frame);
    validate(cfg);
    const int r = cfg.window_radius;
    if (frame.width < 2 * r + 1 || frame.height < 2 * r + 1)
        throw DimensionError("frame " + std::to_string(frame.frame_index) + " is smaller than the flow window");

    const Plane base = to_plane(frame);
    ExpandedFrame out;
    for (const LevelSize& ls : level_sizes(frame.width, frame.height, cfg)) {
        if (ls.w == frame.width && ls.h == frame.height) {
            out.levels.push_back(expand_plane(base, r, cfg.poly_sigma));
            continue;
        }
        // Anti-alias against the original before resampling.
        const double ratio = static_cast<double>(frame.width) / ls.w;
        const Plane level = resize_bilinear(gaussian_blur(base, (ratio - 1.0) * 0.5), ls.w, ls.h);
        out.levels.push_back(expand_plane(level, r, cfg.poly_sigma));
    }
    return out;
}

FlowField estimate_flow(const ExpandedFrame& prev, const ExpandedFrame& next, const PyramidConfig& cfg) {
    validate(cfg);
    if (prev.levels.empty() || next.levels.empty() || prev.levels.size() != next.levels.size())
        throw DimensionError("expanded frames have incompatible pyramids");
    for (std::size_t k = 0; k < prev.levels.size(); ++k) {
        if (prev.levels[k].width != next.levels[k].width || prev.levels[k].height != next.levels[k].height)
            throw DimensionError("frame dimensions differ between prev and next");
    }

    Plane fx, fy;
    for (std::size_t k = prev.levels.size(); k-- > 0;) {
        const QuadraticCoeffs& r0 = prev.levels[k];
        if (fx.v.empty()) {
            fx = Plane(r0.width, r0.height);
            fy = Plane(r0.width, r0.height);
        } else {
            const double sx = static_cast<double>(r0.width) / fx.w;
            const double sy = static_cast<double>(r0.height) / fy.h;
            fx = resize_bilinear(fx, r0.width, r0.height);
            fy = resize_bilinear(fy, r0.width, r0.height);
            for (double& v : fx.v)
                v *= sx;
            for (double& v : fy.v)
                v *= sy;
        }
        refine_level(r0, next.levels[k], fx, fy, cfg);
    }

    FlowField out(fx.w, fx.h);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.dx[i] = static_cast<float>(fx.v[i]);
        out.dy[i] = static_cast<float>(fy.v[i]);
    }
    return out;
}

FlowField estimate_flow(const GrayFrame& prev, const GrayFrame& next, const PyramidConfig& cfg) {
    if (prev.width != next.width || prev.height != next.height)
        throw DimensionError("frame " + std::to_string(prev.frame_index) + " and frame " +
                             std::to_string(next.frame_index) + " differ in size");
    return estimate_flow(expand_frame(prev, cfg), expand_frame(next, cfg), cfg);
}

PolarSample to_polar(double dx, double dy) {
    const double mag = std::hypot(dx, dy);
    if (mag == 0.0)
        return {0.0, 0.0};
    double deg = std::atan2(dy, dx) * 180.0 / std::numbers::pi;
    deg = std::fmod(deg, 180.0);
    if (deg < 0.0)
        deg += 180.0;
    if (deg >= 180.0)
        deg = 0.0;
    return {mag, deg};
}

PolarField to_polar(const FlowField& field) {
    PolarField out{field.width, field.height, std::vector<PolarSample>(field.size())};
    for (std::size_t i = 0; i < field.size(); ++i)
        out.samples[i] = to_polar(field.dx[i], field.dy[i]);
    return out;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t off) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b)
        v |= static_cast<std::uint32_t>(in[off + b]) << (8 * b);
    return v;
}

}  // namespace

std::vector<std::uint8_t> encode_flow_cache(const FlowField& field) {
    std::vector<std::uint8_t> out{'H', 'F', 'L', 'W'};
    out.reserve(12 + field.size() * 8);
    put_u32(out, static_cast<std::uint32_t>(field.width));
    put_u32(out, static_cast<std::uint32_t>(field.height));
    for (std::size_t i = 0; i < field.size(); ++i) {
        put_u32(out, std::bit_cast<std::uint32_t>(field.dx[i]));
        put_u32(out, std::bit_cast<std::uint32_t>(field.dy[i]));
    }
    return out;
}

FlowField decode_flow_cache(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 12 || bytes[0] != 'H' || bytes[1] != 'F' || bytes[2] != 'L' || bytes[3] != 'W')
        throw DataError("not a flow cache (bad magic)");
    const std::uint32_t w = get_u32(bytes, 4), h = get_u32(bytes, 8);
    if (w == 0 || h == 0 || bytes.size() != 12 + static_cast<std::size_t>(w) * h * 8)
        throw DataError("flow cache size does not match its header");
    FlowField f(static_cast<int>(w), static_cast<int>(h));
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.dx[i] = std::bit_cast<float>(get_u32(bytes, 12 + 8 * i));
        f.dy[i] = std::bit_cast<float>(get_u32(bytes, 16 + 8 * i));
    }
    return f;
}

void write_flow_cache(const std::filesystem::path& path, const FlowField& field) {
    const std::vector<std::uint8_t> bytes = encode_flow_cache(field);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write flow cache " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

FlowField read_flow_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open flow cache " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_flow_cache(bytes);
}

}  // namespace pickact
