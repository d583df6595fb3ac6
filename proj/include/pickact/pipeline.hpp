#pragma once

#include "pickact/calibration.hpp"
#include "pickact/classifier.hpp"
#include "pickact/descriptor.hpp"
#include "pickact/flow.hpp"
#include "pickact/metrics.hpp"

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace pickact {

/// Masks keyed by (frame_index, picker_id). A missing key reads as an empty mask.
using MaskSet = std::map<std::pair<int, int>, MorMask>;

std::vector<int> picker_ids(const MaskSet& masks);

struct PipelineConfig {
    PyramidConfig flow;
    int window = kDefaultWindow;  // trailing frames for cs_mean and the rolling mode
    int grid_step = 1;            // 1 = every MOR pixel
};

/// Flow between each consecutive pair; element f maps frame f to frame f + 1.
std::vector<FlowField> compute_flows(std::span<const GrayFrame> frames, const PyramidConfig& cfg);

/// Descriptors and parameter vectors of one picker, one entry per frame.
/// Frame f uses flow f -> f+1 inside the frame-f mask; the last frame has no
/// forward flow and is treated like an empty mask, as is any frame whose
/// successor has no mask for the picker.
struct PickerTrack {
    int picker_id = 0;
    std::vector<FrameDescriptor> descriptors;
    std::vector<std::optional<ParameterVector>> vectors;
};

std::vector<PickerTrack> extract_tracks(std::span<const GrayFrame> frames, const MaskSet& masks,
                                        std::span<const int> pickers, std::span<const FlowField> flows,
                                        const PipelineConfig& cfg);

PickerVectors track_vectors(std::span<const PickerTrack> tracks);

/// Every non-propagated parameter vector across tracks, the calibration input.
std::vector<ParameterVector> calibration_samples(std::span<const PickerTrack> tracks);

std::vector<ActivityTimeline> classify_tracks(std::span<const PickerTrack> tracks, const CalibrationModel& cal,
                                              int window = kDefaultWindow);

/// Flow -> descriptors -> frame-level votes -> rolling mode, per picker.
std::vector<ActivityTimeline> run_pipeline(std::span<const GrayFrame> frames, const MaskSet& masks,
                                           const CalibrationModel& cal, const PipelineConfig& cfg = {});

}  // namespace pickact
