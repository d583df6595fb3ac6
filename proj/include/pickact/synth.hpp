#pragma once

#include "pickact/classifier.hpp"
#include "pickact/dataset.hpp"
#include "pickact/image.hpp"
#include "pickact/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pickact {

enum class Activity { Picking, Unloading };

FlClass truth_label(Activity a);
std::string_view activity_name(Activity a);
Activity parse_activity(std::string_view s);  // throws DataError

struct ActivitySegment {
    int start_frame = 0;
    Activity activity = Activity::Picking;
};

/// Frames [start, end) during which the picker is hidden behind an occluder.
struct OcclusionInterval {
    int picker = 0;
    int start = 0;
    int end = 0;
};

/// Scene description for the synthetic generator. Picker i uses schedule
/// `pickers[i]`, ordered segments that must start at frame 0.
struct SynthConfig {
    int width = 192;
    int height = 144;
    int frame_count = 60;
    double fps = 10.0;
    std::vector<std::vector<ActivitySegment>> pickers;
    double noise_sigma = 0.0;  // additive Gaussian, intensity units
    int blur_radius = 0;       // box blur radius in pixels
    std::vector<OcclusionInterval> occlusions;
};

/// Throws DataError on schedule gaps, bad sizes or out-of-range occlusions.
void validate(const SynthConfig& cfg);

std::string synth_config_to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const std::string& text);

/// Alternating picking/unloading schedules with seeded segment lengths.
SynthConfig mixed_scene_config(int frame_count, int picker_count, std::uint64_t seed, int min_segment = 25,
                               int max_segment = 70);

/// Adds short occlusion intervals until roughly `fraction` of each picker's frames are covered.
void add_random_occlusions(SynthConfig& cfg, double fraction, std::uint64_t seed);

struct SyntheticScene {
    double fps = 10.0;
    std::vector<GrayFrame> frames;  // already quantized to 8 bits
    MaskSet masks;                  // every (frame, picker), empty while occluded
    std::vector<int> pickers;
    std::map<int, std::vector<FlClass>> truth;
};

/// Renders one textured disk per picker, moved each frame by a smooth flow field
/// whose direction fans out by +-g around vertical and whose speed varies by m
/// across the disk. Picking draws small (speed, m, g); unloading draws a larger
/// speed, a wide speed spread and a wide fan, so its folded orientations reach
/// towards 0 and 180 degrees. Steps run in a four-phase back-and-forth cycle
/// so the disk stays in place. Deterministic in (cfg, seed).
SyntheticScene render_synthetic(const SynthConfig& cfg, std::uint64_t seed);

DatasetManifest write_dataset(const SyntheticScene& scene, const std::filesystem::path& root);

DatasetManifest generate_synthetic(const SynthConfig& cfg, std::uint64_t seed, const std::filesystem::path& root);

}  // namespace pickact
