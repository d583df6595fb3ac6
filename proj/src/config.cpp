#include "pickact/config.hpp"

#include "pickact/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

namespace pickact {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object())
        throw DataError(std::string(where) + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (std::string_view k : keys)
            known = known || key == k;
        if (!known)
            throw DataError("unknown key '" + key + "' in " + std::string(where));
    }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key))
        out = obj.at(key).get<T>();
}

}  // namespace

SynthConfig build_scene(const SceneOptions& opts, std::uint64_t seed) {
    if (opts.occlusion_fraction < 0.0 || opts.occlusion_fraction >= 1.0)
        throw DataError("occlusion_fraction must lie in [0, 1)");
    SynthConfig cfg = mixed_scene_config(opts.frame_count, opts.picker_count, seed, opts.min_segment,
                                         opts.max_segment);
    cfg.width = opts.width;
    cfg.height = opts.height;
    cfg.fps = opts.fps;
    cfg.noise_sigma = opts.noise_sigma;
    cfg.blur_radius = opts.blur_radius;
    if (opts.occlusion_fraction > 0.0)
        add_random_occlusions(cfg, opts.occlusion_fraction, seed);
    validate(cfg);
    return cfg;
}

AppConfig config_from_json(const std::string& text) {
    AppConfig cfg;
    try {
        const json doc = json::parse(text);
        reject_unknown(doc, "config", {"scene", "synth", "flow", "window", "grid_step", "kmeans"});
        if (doc.contains("scene")) {
            const json& s = doc.at("scene");
            reject_unknown(s, "scene", {"width", "height", "frame_count", "picker_count", "min_segment",
                                        "max_segment", "fps", "noise_sigma", "blur_radius", "occlusion_fraction"});
            SceneOptions& o = cfg.scene;
            read(s, "width", o.width);
            read(s, "height", o.height);
            read(s, "frame_count", o.frame_count);
            read(s, "picker_count", o.picker_count);
            read(s, "min_segment", o.min_segment);
            read(s, "max_segment", o.max_segment);
            read(s, "fps", o.fps);
            read(s, "noise_sigma", o.noise_sigma);
            read(s, "blur_radius", o.blur_radius);
            read(s, "occlusion_fraction", o.occlusion_fraction);
        }
        if (doc.contains("synth"))
            cfg.synth = synth_config_from_json(doc.at("synth").dump());
        if (doc.contains("flow")) {
            const json& f = doc.at("flow");
            reject_unknown(f, "flow", {"levels", "scale", "window_radius", "iterations", "poly_sigma"});
            PyramidConfig& p = cfg.pipeline.flow;
            read(f, "levels", p.levels);
            read(f, "scale", p.scale);
            read(f, "window_radius", p.window_radius);
            read(f, "iterations", p.iterations);
            read(f, "poly_sigma", p.poly_sigma);
        }
        read(doc, "window", cfg.pipeline.window);
        read(doc, "grid_step", cfg.pipeline.grid_step);
        if (doc.contains("kmeans")) {
            const json& k = doc.at("kmeans");
            reject_unknown(k, "kmeans", {"seed", "restarts", "max_iterations", "tolerance"});
            KMeansOptions& km = cfg.calibration.kmeans;
            read(k, "seed", km.seed);
            read(k, "restarts", km.restarts);
            read(k, "max_iterations", km.max_iterations);
            read(k, "tolerance", km.tolerance);
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed config: ") + e.what());
    }
    validate(cfg.pipeline.flow);
    if (cfg.pipeline.window < 1)
        throw DataError("window must be >= 1");
    if (cfg.pipeline.grid_step < 1)
        throw DataError("grid_step must be >= 1");
    if (cfg.calibration.kmeans.restarts < 1 || cfg.calibration.kmeans.max_iterations < 1)
        throw DataError("kmeans restarts and max_iterations must be >= 1");
    return cfg;
}

std::string config_to_json(const AppConfig& cfg) {
    const SceneOptions& s = cfg.scene;
    const PyramidConfig& p = cfg.pipeline.flow;
    const KMeansOptions& k = cfg.calibration.kmeans;
    json doc{{"scene",
              {{"width", s.width},
               {"height", s.height},
               {"frame_count", s.frame_count},
               {"picker_count", s.picker_count},
               {"min_segment", s.min_segment},
               {"max_segment", s.max_segment},
               {"fps", s.fps},
               {"noise_sigma", s.noise_sigma},
               {"blur_radius", s.blur_radius},
               {"occlusion_fraction", s.occlusion_fraction}}},
             {"flow",
              {{"levels", p.levels},
               {"scale", p.scale},
               {"window_radius", p.window_radius},
               {"iterations", p.iterations},
               {"poly_sigma", p.poly_sigma}}},
             {"window", cfg.pipeline.window},
             {"grid_step", cfg.pipeline.grid_step},
             {"kmeans",
              {{"seed", k.seed},
               {"restarts", k.restarts},
               {"max_iterations", k.max_iterations},
               {"tolerance", k.tolerance}}}};
    if (cfg.synth)
        doc["synth"] = json::parse(synth_config_to_json(*cfg.synth));
    return doc.dump(2) + "\n";
}

AppConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

}  // namespace pickact
