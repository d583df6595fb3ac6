// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "pickact/config.hpp"
#include "pickact/errors.hpp"
#include "pickact/pipeline.hpp"
#include "pickact/synth.hpp"

#include "support.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace pickact;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!o.pass)
        ++failures;
    std::printf("%s %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << std::fixed << v;
    return s.str();
}

struct SceneRun {
    SyntheticScene scene;
    std::vector<PickerTrack> tracks;
};

SceneRun process(const SynthConfig& cfg, std::uint64_t seed) {
    SceneRun r;
    r.scene = render_synthetic(cfg, seed);
    const PipelineConfig pc;
    const auto flows = compute_flows(r.scene.frames, pc.flow);
    r.tracks = extract_tracks(r.scene.frames, r.scene.masks, r.scene.pickers, flows, pc);
    return r;
}

SynthConfig held_out_config(std::uint64_t seed, double noise, int blur, double occlusion) {
    SceneOptions o;
    o.frame_count = 300;
    o.noise_sigma = noise;
    o.blur_radius = blur;
    o.occlusion_fraction = occlusion;
    return build_scene(o, seed);
}

std::vector<VariantResult> variants(const SceneRun& r, const CalibrationModel& cal) {
    const auto specs = standard_variants();
    return run_variants(track_vectors(r.tracks), r.scene.truth, cal, specs);
}

// Largest delay between a ground-truth switch and the first matching BFL label.
int max_bfl_lag(const SceneRun& r, const CalibrationModel& cal) {
    int worst = 0;
    for (const ActivityTimeline& t : classify_tracks(r.tracks, cal)) {
        const auto& truth = r.scene.truth.at(t.picker_id);
        for (std::size_t f = 1; f < truth.size(); ++f) {
            if (truth[f] == truth[f - 1])
                continue;
            int lag = static_cast<int>(truth.size());
            for (std::size_t g = f; g < truth.size(); ++g)
                if (t.bfl[g].label == to_bfl(truth[f])) {
                    lag = static_cast<int>(g - f);
                    break;
                }
            worst = std::max(worst, lag);
        }
    }
    return worst;
}

Outcome flow_accuracy() {
    const PyramidConfig cfg;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI), sub(1.0, 4.0);
    double worst = 0.0, total = 0.0;
    for (int i = 0; i < 20; ++i) {
        double dx, dy;
        if (i % 2 == 0) {
            // integer shifts of 1..4 px along an axis or a diagonal
            const int m = 1 + (i / 2) % 4;
            const int dir = (i / 8) % 3;
            dx = dir == 1 ? 0 : m;
            dy = dir == 0 ? 0 : (i % 4 == 0 ? m : -m);
        } else {
            const double mag = sub(rng), a = ang(rng);
            dx = mag * std::cos(a);
            dy = mag * std::sin(a);
        }
        const testsupport::Texture tex(1000 + i);
        const GrayFrame a = testsupport::render(tex, 128, 96), b = testsupport::render(tex, 128, 96, dx, dy);
        const auto t0 = Clock::now();
        const FlowField f = estimate_flow(a, b, cfg);
        total += std::chrono::duration<double>(Clock::now() - t0).count();
        worst = std::max(worst, testsupport::interior_error(f, dx, dy, 16).mean_epe);
    }
    return {worst < 0.2 && total < 5.0, "max EPE " + fmt(worst) + " px, flow time " + fmt(total, 3) + " s"};
}

Outcome cs_exactness() {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> frames(1, 12), samples(1, 60);
    std::uniform_real_distribution<double> mag(0.0, 8.0), ori(0.0, 180.0);
    double worst = 0.0;
    for (int set = 0; set < 1000; ++set) {
        std::vector<FrameDescriptor> ds;
        long double naive = 0.0L;
        const int nf = frames(rng);
        for (int f = 0; f < nf; ++f) {
            std::vector<PolarSample> s(samples(rng));
            long double ms = 0.0L, os = 0.0L;
            for (auto& p : s) {
                p = {mag(rng), ori(rng)};
                ms += p.magnitude;
                os += p.orientation;
            }
            naive += ms * os / (2.0L * static_cast<long double>(s.size()));
            ds.push_back(frame_descriptor(s, f, 0));
        }
        const double cs = correlation_sensitivity(ds);
        worst = std::max(worst, static_cast<double>(std::abs((cs - naive) / naive)));
    }
    std::ostringstream d;
    d << "max relative error " << worst;
    return {worst <= 1e-12, d.str()};
}

Outcome rolling_mode_exhaustive() {
    int checked = 0, wrong = 0;
    // history lengths 1..4 are the warm-up, 5 fills the window, 7 checks that only the window counts
    for (int len = 1; len <= 7; ++len) {
        for (unsigned bits = 0; bits < (1u << len); ++bits) {
            std::vector<FlLabel> h(len);
            for (int i = 0; i < len; ++i) {
                h[i].frame_index = i;
                h[i].label = (bits >> i) & 1u ? FlClass::Picking : FlClass::NotPicking;
            }
            int p = 0, n = 0;
            for (int i = std::max(0, len - 5); i < len; ++i)
                (h[i].label == FlClass::Picking ? p : n)++;
            const FlClass expect = p > n ? FlClass::Picking : n > p ? FlClass::NotPicking : h.back().label;
            ++checked;
            if (rolling_mode(h, 5).label != to_bfl(expect))
                ++wrong;
        }
    }
    return {wrong == 0, std::to_string(checked) + " histories, " + std::to_string(wrong) + " mismatches"};
}

Outcome reference_thresholds() {
    const auto center = [](Attribute a, double p, double np) {
        ClusterModel m;
        m.attribute = std::string(attribute_name(a));
        m.k = 2;
        m.centers = {std::min(p, np), std::max(p, np)};
        return m;
    };
    const std::vector<ClusterModel> ms{center(Attribute::MagRange, 708.78, 1550.49),
                                       center(Attribute::CsMean, 675.95, 3433.18),
                                       center(Attribute::OriMax, 104.82, 176.55),
                                       center(Attribute::OriMin, 79.65, 3.47)};
    const CalibrationModel cal = derive_thresholds(ms);
    ParameterVector p, n;
    p.mag_range = 708.78, p.cs_mean = 675.95, p.ori_max = 104.82, p.ori_min = 79.65;
    n.mag_range = 1550.49, n.cs_mean = 3433.18, n.ori_max = 176.55, n.ori_min = 3.47;
    const FlLabel lp = classify_frame(p, cal, std::nullopt), ln = classify_frame(n, cal, std::nullopt);
    const int pv = static_cast<int>(std::count(lp.votes.begin(), lp.votes.end(), true));
    const int nv = static_cast<int>(std::count(ln.votes.begin(), ln.votes.end(), false));
    const bool ok = pv == 4 && nv == 4 && lp.label == FlClass::Picking && ln.label == FlClass::NotPicking;
    return {ok, "P vector " + std::to_string(pv) + "/4 Picking, NP vector " + std::to_string(nv) + "/4 NotPicking"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Every file below `root`, keyed by relative path.
std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    if (!fs::exists(root))
        return out;
    if (fs::is_regular_file(root)) {
        out[""] = slurp(root);
        return out;
    }
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file())
            out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

Outcome cli_determinism() {
    const fs::path base = fs::temp_directory_path() / "pickact_acceptance_cli";
    fs::remove_all(base);
    fs::create_directories(base);
    const std::string cfg = (base / "cfg.json").string();
    std::ofstream(cfg) << R"({"scene":{"width":96,"height":72,"frame_count":40,"min_segment":8,"max_segment":14,)"
                       << R"("noise_sigma":0.03,"occlusion_fraction":0.1}})";

    struct Step {
        std::string name, args, output;
    };
    // {run} in args/output is replaced by the per-run directory
    const std::vector<Step> steps{
        {"synth", "synth --config " + cfg + " --seed 5 --out {run}/ds", "{run}/ds"},
        {"flow", "flow --dataset {run}/ds --out {run}/flows", "{run}/flows"},
        {"calibrate", "calibrate --dataset {run}/ds --flows {run}/flows --seed 9 --out {run}/cal.json", "{run}/cal.json"},
        {"classify", "classify --dataset {run}/ds --flows {run}/flows --calibration {run}/cal.json --out {run}/tl.csv",
         "{run}/tl.csv"},
        {"eval", "eval --dataset {run}/ds --flows {run}/flows --calibration {run}/cal.json", ""},
        {"plotdata", "plotdata --dataset {run}/ds --calibration {run}/cal.json", ""},
    };
    const auto expand = [](std::string s, const fs::path& run) {
        for (std::size_t at; (at = s.find("{run}")) != std::string::npos;)
            s.replace(at, 5, run.string());
        return s;
    };
    std::vector<std::string> bad;
    for (const Step& step : steps) {
        std::map<std::string, std::string> result[2];
        std::string stdout_text[2];
        for (int r = 0; r < 2; ++r) {
            const fs::path run = base / ("run" + std::to_string(r));
            const fs::path log = base / ("stdout" + std::to_string(r) + ".txt");
            const std::string cmd = std::string(PICKACT_CLI) + " " + expand(step.args, run) + " > " + log.string();
            const int status = std::system(cmd.c_str());
            if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
                return {false, step.name + " exited abnormally"};
            stdout_text[r] = slurp(log);
            if (!step.output.empty())
                result[r] = tree(expand(step.output, run));
        }
        if (stdout_text[0] != stdout_text[1] || result[0] != result[1] ||
            (!step.output.empty() && result[0].empty()) || (step.output.empty() && stdout_text[0].empty()))
            bad.push_back(step.name);
    }
    fs::remove_all(base);
    if (!bad.empty()) {
        std::string names;
        for (const auto& b : bad)
            names += " " + b;
        return {false, "outputs differ for:" + names};
    }
    return {true, std::to_string(steps.size()) + " subcommands byte-identical across two runs"};
}

}  // namespace

int main() {
    std::printf("pickact acceptance suite\n");
    report(1, "flow accuracy", flow_accuracy);
    report(2, "correlation sensitivity", cs_exactness);

    // Noise-free calibration scene shared by criteria 3 to 5.
    CalibrationModel clean_cal;
    bool have_cal = false;
    report(3, "bimodal attribute densities", [&]() -> Outcome {
        SceneOptions o;
        o.frame_count = 1200;
        o.min_segment = 500;
        o.max_segment = 700;
        const SceneRun r = process(build_scene(o, 1), 1);
        clean_cal = calibrate(calibration_samples(r.tracks));
        have_cal = true;
        std::string d = std::to_string(r.scene.frames.size()) + " frames, modes";
        bool ok = r.scene.frames.size() >= 600 && r.scene.pickers.size() >= 2;
        for (Attribute a : kAllAttributes) {
            const std::size_t m = clean_cal.get(a).kde.modes.size();
            d += " " + std::string(attribute_name(a)) + "=" + std::to_string(m);
            ok = ok && m == 2;
        }
        return {ok, d};
    });

    report(4, "silhouette ordering", [&]() -> Outcome {
        if (!have_cal)
            return {false, "no calibration"};
        int ordered = 0;
        std::string d;
        for (Attribute a : kAllAttributes) {
            const auto& s = clean_cal.get(a).silhouettes;
            const double s2 = s.at(2), s3 = s.at(3), s4 = s.at(4);
            ordered += s2 > s3 && s3 >= s4;
            d += std::string(attribute_name(a)) + " " + fmt(s2, 3) + "/" + fmt(s3, 3) + "/" + fmt(s4, 3) + ", ";
        }
        const std::vector<double> x{0.0, 1.0, 10.0, 11.0};
        const double four = kmeans_silhouette(x, 2).silhouette;
        d += "ordered " + std::to_string(ordered) + "/4, {0,1,10,11} -> " + fmt(four);
        return {ordered >= 3 && std::abs(four - 0.8997) <= 1e-3, d};
    });

    report(5, "end to end accuracy and lag", [&]() -> Outcome {
        if (!have_cal)
            return {false, "no calibration"};
        double clean_acc = 1.0, noisy_acc = 1.0;
        int lag = 0;
        for (std::uint64_t seed : {101, 102}) {
            const SceneRun clean = process(held_out_config(seed, 0.0, 0, 0.0), seed);
            clean_acc = std::min(clean_acc, variants(clean, clean_cal)[0].scores.acc.value_or(0.0));
            lag = std::max(lag, max_bfl_lag(clean, clean_cal));
            const SceneRun noisy = process(held_out_config(seed, 0.05, 1, 0.1), seed);
            noisy_acc = std::min(noisy_acc, variants(noisy, clean_cal)[0].scores.acc.value_or(0.0));
        }
        return {clean_acc >= 0.95 && noisy_acc >= 0.80 && lag <= 5,
                "min ACC noise-free " + fmt(clean_acc) + ", noisy " + fmt(noisy_acc) + ", max BFL lag " +
                    std::to_string(lag) + " frames"};
    });

    report(6, "four attributes beat variant (i) on noisy data", [&]() -> Outcome {
        SceneOptions o;
        o.frame_count = 600;
        o.min_segment = 300;
        o.max_segment = 300;
        o.noise_sigma = 0.15;
        o.blur_radius = 1;
        o.occlusion_fraction = 0.1;
        const SceneRun train = process(build_scene(o, 7), 7);
        const CalibrationModel cal = calibrate(calibration_samples(train.tracks));
        int wins = 0;
        std::string d;
        for (std::uint64_t seed = 201; seed <= 210; ++seed) {
            const auto res = variants(process(held_out_config(seed, 0.15, 1, 0.1), seed), cal);
            const double full = res[0].scores.acc.value_or(0.0), reduced = res[1].scores.acc.value_or(0.0);
            wins += full > reduced;
            d += " " + fmt(full, 3) + ">" + fmt(reduced, 3);
        }
        return {wins >= 9, std::to_string(wins) + "/10 seeds:" + d};
    });

    report(7, "rolling mode", rolling_mode_exhaustive);
    report(8, "reference thresholds", reference_thresholds);
    report(9, "cli determinism", cli_determinism);

    std::printf("%s: %d failed\n", failures == 0 ? "ALL PASS" : "SOME FAILED", failures);
    return failures == 0 ? 0 : 1;
}
