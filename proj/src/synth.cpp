#include "pickact/synth.hpp"

#include "pickact/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <tuple>

namespace pickact {

using nlohmann::json;
namespace fs = std::filesystem;

FlClass truth_label(Activity a) { return a == Activity::Picking ? FlClass::Picking : FlClass::NotPicking; }

std::string_view activity_name(Activity a) { return a == Activity::Picking ? "picking" : "unloading"; }

Activity parse_activity(std::string_view s) {
    if (s == "picking")
        return Activity::Picking;
    if (s == "unloading")
        return Activity::Unloading;
    throw DataError("unknown activity '" + std::string(s) + "'");
}

void validate(const SynthConfig& cfg) {
    if (cfg.width < 32 || cfg.height < 32)
        throw DataError("synthetic frames must be at least 32x32");
    if (cfg.frame_count < 0)
        throw DataError("frame_count must be >= 0");
    if (!(cfg.fps > 0.0))
        throw DataError("fps must be > 0");
    if (!(cfg.noise_sigma >= 0.0))
        throw DataError("noise_sigma must be >= 0");
    if (cfg.blur_radius < 0)
        throw DataError("blur_radius must be >= 0");
    if (cfg.pickers.empty())
        throw DataError("synthetic scene needs at least one picker");
    for (std::size_t p = 0; p < cfg.pickers.size(); ++p) {
        const auto& sched = cfg.pickers[p];
        if (sched.empty() || sched.front().start_frame != 0)
            throw DataError("schedule of picker " + std::to_string(p) + " does not start at frame 0");
        for (std::size_t i = 1; i < sched.size(); ++i) {
            if (sched[i].start_frame <= sched[i - 1].start_frame)
                throw DataError("schedule of picker " + std::to_string(p) + " is not strictly increasing");
            if (sched[i].start_frame >= cfg.frame_count)
                throw DataError("schedule of picker " + std::to_string(p) + " starts a segment past the last frame");
        }
    }
    for (const OcclusionInterval& o : cfg.occlusions) {
        if (o.picker < 0 || o.picker >= static_cast<int>(cfg.pickers.size()))
            throw DataError("occlusion references unknown picker " + std::to_string(o.picker));
        if (o.start < 0 || o.end <= o.start || o.end > cfg.frame_count)
            throw DataError("occlusion interval out of range for picker " + std::to_string(o.picker));
    }
}

std::string synth_config_to_json(const SynthConfig& cfg) {
    json pickers = json::array();
    for (const auto& sched : cfg.pickers) {
        json segs = json::array();
        for (const ActivitySegment& s : sched)
            segs.push_back({{"start", s.start_frame}, {"activity", std::string(activity_name(s.activity))}});
        pickers.push_back(segs);
    }
    json occ = json::array();
    for (const OcclusionInterval& o : cfg.occlusions)
        occ.push_back({{"picker", o.picker}, {"start", o.start}, {"end", o.end}});
    return json{{"width", cfg.width},
                {"height", cfg.height},
                {"frame_count", cfg.frame_count},
                {"fps", cfg.fps},
                {"noise_sigma", cfg.noise_sigma},
                {"blur_radius", cfg.blur_radius},
                {"pickers", pickers},
                {"occlusions", occ}}
        .dump(2);
}

SynthConfig synth_config_from_json(const std::string& text) {
    SynthConfig cfg;
    try {
        const json j = json::parse(text);
        cfg.width = j.value("width", cfg.width);
        cfg.height = j.value("height", cfg.height);
        cfg.frame_count = j.value("frame_count", cfg.frame_count);
        cfg.fps = j.value("fps", cfg.fps);
        cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
        cfg.blur_radius = j.value("blur_radius", cfg.blur_radius);
        for (const json& sched : j.at("pickers")) {
            std::vector<ActivitySegment> segs;
            for (const json& s : sched)
                segs.push_back({s.at("start").get<int>(), parse_activity(s.at("activity").get<std::string>())});
            cfg.pickers.push_back(std::move(segs));
        }
        if (j.contains("occlusions"))
            for (const json& o : j.at("occlusions"))
                cfg.occlusions.push_back({o.at("picker").get<int>(), o.at("start").get<int>(), o.at("end").get<int>()});
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed synthetic config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

SynthConfig mixed_scene_config(int frame_count, int picker_count, std::uint64_t seed, int min_segment,
                               int max_segment) {
    if (frame_count < 2 || picker_count < 1)
        throw DataError("a mixed scene needs at least 2 frames and 1 picker");
    if (min_segment < 1 || max_segment < min_segment)
        throw DataError("segment lengths must satisfy 1 <= min_segment <= max_segment");
    SynthConfig cfg;
    cfg.frame_count = frame_count;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> len(min_segment, max_segment);
    std::bernoulli_distribution coin(0.5);
    for (int p = 0; p < picker_count; ++p) {
        std::vector<ActivitySegment> sched;
        Activity a = coin(rng) ? Activity::Picking : Activity::Unloading;
        for (int start = 0; start < std::max(frame_count, 1); start += len(rng)) {
            sched.push_back({start, a});
            a = a == Activity::Picking ? Activity::Unloading : Activity::Picking;
        }
        cfg.pickers.push_back(std::move(sched));
    }
    return cfg;
}

void add_random_occlusions(SynthConfig& cfg, double fraction, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x0cc1u);
    std::uniform_int_distribution<int> len(3, 6);
    const int target = static_cast<int>(std::lround(fraction * cfg.frame_count));
    for (int p = 0; p < static_cast<int>(cfg.pickers.size()); ++p) {
        std::vector<bool> taken(static_cast<std::size_t>(cfg.frame_count), false);
        int covered = 0;
        for (int attempt = 0; covered < target && attempt < 1000; ++attempt) {
            const int l = std::min(len(rng), target - covered);
            if (cfg.frame_count - l <= 1)
                break;
            const int start = std::uniform_int_distribution<int>(1, cfg.frame_count - l)(rng);
            // keep one visible frame on each side so intervals stay separate
            bool free = true;
            for (int f = std::max(0, start - 1); f < std::min(cfg.frame_count, start + l + 1); ++f)
                free = free && !taken[static_cast<std::size_t>(f)];
            if (!free)
                continue;
            for (int f = start; f < start + l; ++f)
                taken[static_cast<std::size_t>(f)] = true;
            cfg.occlusions.push_back({p, start, start + l});
            covered += l;
        }
    }
    std::sort(cfg.occlusions.begin(), cfg.occlusions.end(), [](const auto& a, const auto& b) {
        return std::tie(a.picker, a.start) < std::tie(b.picker, b.start);
    });
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Per-frame motion parameters. The field inside the blob is
//   v(p) = sign * (s0 + m * yr) * (cos t, sin t),  t = 90deg + g * xr
// with (xr, yr) the offset from the blob centre in radii. Orientation
// extremes sit near 90 +- g, the magnitude spread is about 2m and the mean
// magnitude is s0, so each attribute is steered by one parameter.
struct MotionParams {
    double s0 = 0.0;
    double m = 0.0;
    double g = 0.0;  // radians
};

// Normal law truncated to mean +- 2 sd by rejection (clamping would pile mass on the bounds).
struct ParamLaw {
    double mean, sd;
    double draw(std::mt19937_64& rng) const {
        std::normal_distribution<double> z(0.0, 1.0);
        for (;;) {
            const double d = z(rng);
            if (std::abs(d) <= 2.0) return mean + sd * d;
        }
    }
};

struct ActivityLaw {
    ParamLaw s0, m, g_deg;
};

const ActivityLaw& law(Activity a) {
    static const ActivityLaw picking{{1.3, 0.15}, {0.2, 0.06}, {13.0, 4.0}};
    static const ActivityLaw unloading{{2.4, 0.12}, {0.9, 0.03}, {50.0, 3.0}};
    return a == Activity::Picking ? picking : unloading;
}

constexpr double kTextureMargin = 10.0;  // textured rim outside the mask, pixels
constexpr double kRelax = 0.05;         // pull of the material map back to rigid
constexpr int kWarpMargin = 12;         // pixels kept up to date around the blob

double background(double x, double y) {
    return 0.32 + 0.05 * std::sin(0.13 * x + 0.4) * std::sin(0.11 * y + 1.1) + 0.03 * std::cos(0.07 * x - 0.09 * y);
}

// Twelve plane waves at 15 degree steps keep the texture two-dimensional
// everywhere, so the flow has no aperture-limited patches.
constexpr int kWaves = 12;

double blob_texture(double u, double v, const std::array<double, kWaves>& ph) {
    static constexpr std::array<double, kWaves> freq{0.62, 0.45, 0.55, 0.38, 0.68, 0.5,
                                                     0.41, 0.66, 0.48, 0.58, 0.36, 0.52};
    double t = 0.55;
    for (int k = 0; k < kWaves; ++k) {
        const double a = k * std::numbers::pi / kWaves;
        t += 0.05 * std::sin(freq[k] * (std::cos(a) * u + std::sin(a) * v) + ph[k]);
    }
    return t;
}

Activity activity_at(const std::vector<ActivitySegment>& sched, int frame) {
    Activity a = sched.front().activity;
    for (const ActivitySegment& s : sched)
        if (s.start_frame <= frame)
            a = s.activity;
    return a;
}

bool occluded(const SynthConfig& cfg, int picker, int frame) {
    for (const OcclusionInterval& o : cfg.occlusions)
        if (o.picker == picker && frame >= o.start && frame < o.end)
            return true;
    return false;
}

struct Field {
    double cx, cy, radius;
    int sign;      // +1 or -1
    bool reflect;  // point-reflected about the centre
    MotionParams p;

    void at(double x, double y, double& vx, double& vy) const {
        double xr = std::clamp((x - cx) / radius, -1.5, 1.5);
        double yr = std::clamp((y - cy) / radius, -1.5, 1.5);
        if (reflect) {
            xr = -xr;
            yr = -yr;
        }
        const double s = p.s0 + p.m * yr;
        const double t = 0.5 * std::numbers::pi + p.g * xr;
        vx = sign * s * std::cos(t);
        vy = sign * s * std::sin(t);
    }
};

// Material coordinates (relative to the blob centre) of every pixel. The
// field cycles through v(p), -v(p), -v(-p), v(-p) about a shared centre.
// Every step has the same folded orientation and magnitude statistics, the
// first-order displacement cancels over each pair and the point reflection
// cancels most of the second-order drift; relaxation absorbs the rest.
struct BlobState {
    double cx = 0.0;
    double cy = 0.0;
    double pair_cx = 0.0;
    double pair_cy = 0.0;
    int phase_step = 0;
    std::array<double, kWaves> phase{};
    std::array<double, kWaves> phase_rate{};  // slow texture renewal, rad per frame
    std::vector<double> mu, mv;
};

double bilinear(const std::vector<double>& img, int w, int h, double x, double y) {
    x = std::clamp(x, 0.0, w - 1.0);
    y = std::clamp(y, 0.0, h - 1.0);
    const int x0 = std::min(static_cast<int>(x), w - 2), y0 = std::min(static_cast<int>(y), h - 2);
    const double fx = x - x0, fy = y - y0;
    const auto at = [&](int xx, int yy) { return img[static_cast<std::size_t>(yy) * w + xx]; };
    return (1 - fy) * ((1 - fx) * at(x0, y0) + fx * at(x0 + 1, y0)) +
           fy * ((1 - fx) * at(x0, y0 + 1) + fx * at(x0 + 1, y0 + 1));
}

void advance(BlobState& s, const Field& field, int w, int h, int reach) {
    double vx = 0.0, vy = 0.0;
    field.at(s.cx, s.cy, vx, vy);
    const double ncx = s.cx + vx, ncy = s.cy + vy;
    std::vector<double> nu = s.mu, nv = s.mv;
    const int x0 = std::max(0, static_cast<int>(ncx) - reach), x1 = std::min(w - 1, static_cast<int>(ncx) + reach);
    const int y0 = std::max(0, static_cast<int>(ncy) - reach), y1 = std::min(h - 1, static_cast<int>(ncy) + reach);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            // source q of the material now at (x, y): q + v(q) = p
            double qx = x, qy = y;
            for (int it = 0; it < 4; ++it) {
                field.at(qx, qy, vx, vy);
                qx = x - vx;
                qy = y - vy;
            }
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            nu[i] = (1 - kRelax) * bilinear(s.mu, w, h, qx, qy) + kRelax * (x - ncx);
            nv[i] = (1 - kRelax) * bilinear(s.mv, w, h, qx, qy) + kRelax * (y - ncy);
        }
    }
    s.mu = std::move(nu);
    s.mv = std::move(nv);
    s.cx = ncx;
    s.cy = ncy;
}

void box_blur(GrayFrame& f, int r) {
    if (r <= 0)
        return;
    std::vector<float> tmp(f.data.size());
    const float norm = 1.0f / static_cast<float>(2 * r + 1);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            float s = 0.0f;
            for (int i = -r; i <= r; ++i)
                s += f.at(std::clamp(x + i, 0, f.width - 1), y);
            tmp[static_cast<std::size_t>(y) * f.width + x] = s * norm;
        }
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            float s = 0.0f;
            for (int i = -r; i <= r; ++i)
                s += tmp[static_cast<std::size_t>(std::clamp(y + i, 0, f.height - 1)) * f.width + x];
            f.at(x, y) = s * norm;
        }
}

}  // namespace

SyntheticScene render_synthetic(const SynthConfig& cfg, std::uint64_t seed) {
    validate(cfg);
    const int w = cfg.width, h = cfg.height;
    const std::size_t n_pickers = cfg.pickers.size();
    const double lane_half = 0.5 * w / static_cast<double>(n_pickers);
    const double radius = std::min(0.13 * h, 0.8 * lane_half - kTextureMargin);
    const double tex_radius = radius + kTextureMargin;
    const int reach = static_cast<int>(tex_radius) + kWarpMargin;

    SyntheticScene scene;
    scene.fps = cfg.fps;
    std::vector<std::mt19937_64> motion_rng;
    std::vector<BlobState> state(n_pickers);
    std::mt19937_64 setup(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (std::size_t p = 0; p < n_pickers; ++p) {
        scene.pickers.push_back(static_cast<int>(p));
        motion_rng.emplace_back(seed * 0x9E3779B97F4A7C15ULL + 0x51ed27u * (p + 1));
        BlobState& s = state[p];
        s.cx = lane_half * (2.0 * static_cast<double>(p) + 1.0);
        s.cy = 0.5 * h;
        s.phase_step = static_cast<int>(setup() % 4);
        for (double& ph : s.phase)
            ph = phase(setup);
        std::uniform_real_distribution<double> rate(0.01, 0.03);
        for (double& pr : s.phase_rate)
            pr = (setup() % 2 ? 1.0 : -1.0) * rate(setup);
        s.mu.resize(static_cast<std::size_t>(w) * h);
        s.mv.resize(s.mu.size());
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                s.mu[static_cast<std::size_t>(y) * w + x] = x - s.cx;
                s.mv[static_cast<std::size_t>(y) * w + x] = y - s.cy;
            }
        scene.truth[static_cast<int>(p)].reserve(static_cast<std::size_t>(cfg.frame_count));
    }
    std::mt19937_64 noise_rng(seed ^ 0xA5A5A5A5DEADBEEFULL);
    std::normal_distribution<double> noise(0.0, 1.0);

    for (int f = 0; f < cfg.frame_count; ++f) {
        GrayFrame frame(w, h, f);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                frame.at(x, y) = static_cast<float>(background(x, y));

        for (std::size_t p = 0; p < n_pickers; ++p) {
            const int pid = static_cast<int>(p);
            const BlobState& s = state[p];
            const bool hidden = occluded(cfg, pid, f);
            MorMask mask(w, h, pid, f);
            const int x0 = std::max(0, static_cast<int>(s.cx) - reach), x1 = std::min(w - 1, static_cast<int>(s.cx) + reach);
            const int y0 = std::max(0, static_cast<int>(s.cy) - reach), y1 = std::min(h - 1, static_cast<int>(s.cy) + reach);
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const std::size_t i = static_cast<std::size_t>(y) * w + x;
                    const double r = std::hypot(s.mu[i], s.mv[i]);
                    const double alpha = std::clamp(tex_radius + 0.5 - r, 0.0, 1.0);
                    if (alpha <= 0.0)
                        continue;
                    const double tex = std::clamp(blob_texture(s.mu[i], s.mv[i], s.phase), 0.0, 1.0);
                    frame.at(x, y) = static_cast<float>(hidden ? 0.15 : alpha * tex + (1.0 - alpha) * frame.at(x, y));
                    // the detector outlines a fixed-size disk around the picker
                    if (!hidden && std::hypot(x - s.cx, y - s.cy) <= radius)
                        mask.set(x, y, true);
                }
            }
            scene.masks.emplace(std::pair{f, pid}, std::move(mask));
            scene.truth[pid].push_back(truth_label(activity_at(cfg.pickers[p], f)));
        }

        box_blur(frame, cfg.blur_radius);
        for (float& v : frame.data) {
            double val = v;
            if (cfg.noise_sigma > 0.0)
                val += cfg.noise_sigma * noise(noise_rng);
            const auto byte = static_cast<std::uint8_t>(std::lround(std::clamp(val, 0.0, 1.0) * 255.0));
            v = static_cast<float>(byte / 255.0);
        }
        scene.frames.push_back(std::move(frame));

        for (std::size_t p = 0; p < n_pickers; ++p) {
            BlobState& s = state[p];
            const ActivityLaw& l = law(activity_at(cfg.pickers[p], f));
            std::mt19937_64& rng = motion_rng[p];
            if (s.phase_step % 2 == 0) {
                s.pair_cx = s.cx;
                s.pair_cy = s.cy;
            }
            static constexpr std::array<int, 4> kSign{1, -1, -1, 1};
            Field field{s.pair_cx, s.pair_cy, radius, kSign[s.phase_step], s.phase_step >= 2, {}};
            field.p.s0 = l.s0.draw(rng);
            field.p.m = l.m.draw(rng);
            field.p.g = l.g_deg.draw(rng) * kDeg;
            advance(s, field, w, h, reach);
            s.phase_step = (s.phase_step + 1) % 4;
            for (int k = 0; k < kWaves; ++k)
                s.phase[static_cast<std::size_t>(k)] += s.phase_rate[static_cast<std::size_t>(k)];
        }
    }
    return scene;
}

DatasetManifest write_dataset(const SyntheticScene& scene, const fs::path& root) {
    DatasetManifest m;
    m.root = root;
    m.fps = scene.fps;
    m.pickers = scene.pickers;
    m.truth = scene.truth;
    fs::create_directories(root / "frames");
    char name[64];
    for (const GrayFrame& f : scene.frames) {
        std::snprintf(name, sizeof name, "frames/frame_%05d.pgm", f.frame_index);
        write_pgm(root / name, raster_from_frame(f));
        m.frames.emplace_back(name);
    }
    for (int p : scene.pickers) {
        std::snprintf(name, sizeof name, "masks/picker_%02d", p);
        fs::create_directories(root / name);
    }
    for (const auto& [key, mask] : scene.masks) {
        std::snprintf(name, sizeof name, "masks/picker_%02d/mask_%05d.pgm", key.second, key.first);
        write_pgm(root / name, raster_from_mask(mask));
        m.masks.emplace(key, fs::path(name));
    }
    write_manifest(m);
    return m;
}

DatasetManifest generate_synthetic(const SynthConfig& cfg, std::uint64_t seed, const fs::path& root) {
    return write_dataset(render_synthetic(cfg, seed), root);
}

}  // namespace pickact
