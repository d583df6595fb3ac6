// pickact: command-line front end for the picker activity pipeline.
#include "pickact/calibration.hpp"
#include "pickact/classifier.hpp"
#include "pickact/config.hpp"
#include "pickact/dataset.hpp"
#include "pickact/errors.hpp"
#include "pickact/flow.hpp"
#include "pickact/metrics.hpp"
#include "pickact/pipeline.hpp"
#include "pickact/synth.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace pickact;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Options {
    std::string dataset;
    std::string calibration;
    std::string config;
    std::string out;
    std::string flows;  // flow cache directory
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> kmeans_seed;  // overrides kmeans.seed from the config
    std::optional<int> window;
};

AppConfig effective_config(const Options& o) {
    AppConfig cfg = o.config.empty() ? AppConfig{} : load_config(o.config);
    if (o.window) {
        if (*o.window < 1)
            throw DataError("--window must be >= 1");
        cfg.pipeline.window = *o.window;
    }
    return cfg;
}

std::string cache_name(std::size_t f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "flow_%05zu.hflw", f);
    return buf;
}

// Writes to --out when given, otherwise to stdout.
template <class Fn>
void emit(const std::string& out, Fn&& write) {
    if (out.empty()) {
        std::cout << std::setprecision(12);
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f)
        throw DataError("cannot write " + out);
    f << std::setprecision(12);
    write(f);
    if (!f)
        throw DataError("write failed: " + out);
}

std::vector<FlowField> obtain_flows(const Dataset& ds, const Options& o, const AppConfig& cfg) {
    if (o.flows.empty())
        return compute_flows(ds.frames, cfg.pipeline.flow);
    std::vector<FlowField> flows;
    for (std::size_t f = 0; f + 1 < ds.frames.size(); ++f) {
        FlowField field = read_flow_cache(fs::path(o.flows) / cache_name(f));
        if (field.width != ds.frames[f].width || field.height != ds.frames[f].height)
            throw DimensionError("cached flow " + cache_name(f) + " does not match the frame size");
        flows.push_back(std::move(field));
    }
    return flows;
}

std::vector<PickerTrack> load_tracks(const Options& o, const AppConfig& cfg, Dataset& ds) {
    if (o.dataset.empty())
        throw DataError("--dataset is required");
    ds = load_dataset(o.dataset);
    const std::vector<FlowField> flows = obtain_flows(ds, o, cfg);
    return extract_tracks(ds.frames, ds.masks, ds.manifest.pickers, flows, cfg.pipeline);
}

CalibrationModel require_calibration(const Options& o) {
    if (o.calibration.empty())
        throw DataError("--calibration is required");
    CalibrationModel cal = load_calibration(o.calibration);
    check_complete(cal);
    return cal;
}

int cmd_synth(const Options& o) {
    if (o.out.empty())
        throw DataError("--out (dataset directory) is required");
    const AppConfig cfg = effective_config(o);
    const SynthConfig sc = cfg.synth ? *cfg.synth : build_scene(cfg.scene, o.seed);
    const DatasetManifest m = generate_synthetic(sc, o.seed, o.out);
    std::cout << "frames," << m.frames.size() << "\npickers," << m.pickers.size() << "\nmasks," << m.masks.size()
              << "\n";
    return kOk;
}

int cmd_flow(const Options& o) {
    if (o.dataset.empty())
        throw DataError("--dataset is required");
    if (o.out.empty())
        throw DataError("--out (flow cache directory) is required");
    const AppConfig cfg = effective_config(o);
    const Dataset ds = load_dataset(o.dataset);
    const std::vector<FlowField> flows = compute_flows(ds.frames, cfg.pipeline.flow);
    fs::create_directories(o.out);
    std::cout << std::setprecision(12) << "frame_index,mean_magnitude,max_magnitude\n";
    for (std::size_t f = 0; f < flows.size(); ++f) {
        write_flow_cache(fs::path(o.out) / cache_name(f), flows[f]);
        double sum = 0.0, peak = 0.0;
        for (std::size_t i = 0; i < flows[f].size(); ++i) {
            const double m = std::hypot(flows[f].dx[i], flows[f].dy[i]);
            sum += m;
            peak = std::max(peak, m);
        }
        std::cout << f << ',' << sum / static_cast<double>(flows[f].size()) << ',' << peak << '\n';
    }
    return kOk;
}

int cmd_calibrate(const Options& o) {
    AppConfig cfg = effective_config(o);
    if (o.kmeans_seed)
        cfg.calibration.kmeans.seed = *o.kmeans_seed;
    Dataset ds;
    const std::vector<PickerTrack> tracks = load_tracks(o, cfg, ds);
    const std::vector<ParameterVector> samples = calibration_samples(tracks);
    if (samples.empty())
        throw DataError("dataset yields no parameter vectors to calibrate on");
    const CalibrationModel cal = calibrate(samples, cfg.calibration);
    if (o.out.empty())
        std::cout << calibration_to_json(cal);
    else
        save_calibration(o.out, cal);
    return kOk;
}

int cmd_classify(const Options& o, bool plot) {
    const AppConfig cfg = effective_config(o);
    const CalibrationModel cal = require_calibration(o);
    Dataset ds;
    const std::vector<PickerTrack> tracks = load_tracks(o, cfg, ds);
    const std::vector<ActivityTimeline> timelines = classify_tracks(tracks, cal, cfg.pipeline.window);
    emit(o.out, [&](std::ostream& out) {
        if (plot)
            write_plot_data(out, timelines);
        else
            write_timeline_csv(out, timelines);
    });
    return kOk;
}

int cmd_eval(const Options& o) {
    const AppConfig cfg = effective_config(o);
    const CalibrationModel cal = require_calibration(o);
    Dataset ds;
    const std::vector<PickerTrack> tracks = load_tracks(o, cfg, ds);
    if (ds.manifest.truth.empty())
        throw DataError("dataset has no truth labels to evaluate against");
    PickerVectors vectors = track_vectors(tracks);
    for (auto it = vectors.begin(); it != vectors.end();)
        it = ds.manifest.truth.count(it->first) ? std::next(it) : vectors.erase(it);
    const std::vector<VariantResult> results =
        run_variants(vectors, ds.manifest.truth, cal, standard_variants());
    emit(o.out, [&](std::ostream& out) { write_variant_report(out, results); });
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Picker activity recognition from dense optical flow"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON config file");
        sub->add_option("--out", o.out, "Output path");
    };
    auto add_data = [&](CLI::App* sub) {
        sub->add_option("--dataset", o.dataset, "Dataset directory or manifest")->required();
        sub->add_option("--flows", o.flows, "Read flow fields from this cache directory");
        sub->add_option("--window", o.window, "Trailing window length");
    };

    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset with ground truth");
    add_common(synth);
    synth->add_option("--seed", o.seed, "Random seed");

    CLI::App* flow = app.add_subcommand("flow", "Compute and cache dense flow between consecutive frames");
    add_common(flow);
    flow->add_option("--dataset", o.dataset, "Dataset directory or manifest")->required();

    CLI::App* cal = app.add_subcommand("calibrate", "Fit KDE, clusters and thresholds per attribute");
    add_common(cal);
    add_data(cal);
    cal->add_option("--seed", o.kmeans_seed, "k-means seed");

    CLI::App* classify = app.add_subcommand("classify", "Frame and batch-frame labels as CSV");
    CLI::App* eval = app.add_subcommand("eval", "ACC/TNR/TPR of the classifier and its variants");
    CLI::App* plot = app.add_subcommand("plotdata", "Step series of FL and BFL labels");
    for (CLI::App* sub : {classify, eval, plot}) {
        add_common(sub);
        add_data(sub);
        sub->add_option("--calibration", o.calibration, "Calibration JSON")->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*synth)
            return cmd_synth(o);
        if (*flow)
            return cmd_flow(o);
        if (*cal)
            return cmd_calibrate(o);
        if (*classify)
            return cmd_classify(o, false);
        if (*plot)
            return cmd_classify(o, true);
        if (*eval)
            return cmd_eval(o);
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}
