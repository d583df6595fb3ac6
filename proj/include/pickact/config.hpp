#pragma once

#include "pickact/calibration.hpp"
#include "pickact/pipeline.hpp"
#include "pickact/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace pickact {

/// Knobs for a randomly scheduled synthetic scene (used when no explicit
/// schedule is configured).
struct SceneOptions {
    int width = 192;
    int height = 144;
    int frame_count = 600;
    int picker_count = 2;
    int min_segment = 25;
    int max_segment = 70;
    double fps = 10.0;
    double noise_sigma = 0.0;
    int blur_radius = 0;
    double occlusion_fraction = 0.0;
};

SynthConfig build_scene(const SceneOptions& opts, std::uint64_t seed);

struct AppConfig {
    SceneOptions scene;
    std::optional<SynthConfig> synth;  // explicit schedule, overrides `scene`
    PipelineConfig pipeline;
    CalibrationOptions calibration;
};

/// Missing keys keep their defaults; unknown keys and bad values throw DataError.
AppConfig config_from_json(const std::string& text);
std::string config_to_json(const AppConfig& cfg);
AppConfig load_config(const std::filesystem::path& path);

}  // namespace pickact
