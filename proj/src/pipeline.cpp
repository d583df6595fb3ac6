#include "pickact/pipeline.hpp"

#include "pickact/errors.hpp"

#include <set>
#include <string>

namespace pickact {

std::vector<int> picker_ids(const MaskSet& masks) {
    std::set<int> ids;
    for (const auto& [key, mask] : masks)
        ids.insert(key.second);
    return {ids.begin(), ids.end()};
}

std::vector<FlowField> compute_flows(std::span<const GrayFrame> frames, const PyramidConfig& cfg) {
    std::vector<FlowField> flows;
    if (frames.size() < 2)
        return flows;
    flows.reserve(frames.size() - 1);
    ExpandedFrame prev = expand_frame(frames[0], cfg);
    for (std::size_t f = 1; f < frames.size(); ++f) {
        if (frames[f].width != frames[0].width || frames[f].height != frames[0].height)
            throw DimensionError("frame " + std::to_string(f) + " differs in size from frame 0");
        ExpandedFrame next = expand_frame(frames[f], cfg);
        flows.push_back(estimate_flow(prev, next, cfg));
        prev = std::move(next);
    }
    return flows;
}

std::vector<PickerTrack> extract_tracks(std::span<const GrayFrame> frames, const MaskSet& masks,
                                        std::span<const int> pickers, std::span<const FlowField> flows,
                                        const PipelineConfig& cfg) {
    if (!frames.empty() && flows.size() + 1 != frames.size())
        throw DataError("expected " + std::to_string(frames.size() - 1) + " flow fields, got " +
                        std::to_string(flows.size()));
    std::vector<PickerTrack> tracks;
    for (int picker : pickers) {
        PickerTrack track;
        track.picker_id = picker;
        ParameterTracker tracker(cfg.window);
        for (std::size_t f = 0; f < frames.size(); ++f) {
            const int fi = static_cast<int>(f);
            FrameDescriptor d;
            d.frame_index = fi;
            d.picker_id = picker;
            // The region's motion is only measured when the picker is also seen in frame f + 1;
            // otherwise the flow runs into whatever covered it.
            const auto it = masks.find({fi, picker});
            const auto next = masks.find({fi + 1, picker});
            if (it != masks.end() && f < flows.size() && next != masks.end() && !next->second.empty()) {
                try {
                    d = frame_descriptor(mask_flow(flows[f], it->second, cfg.grid_step), fi, picker);
                } catch (const DataError& e) {
                    throw DataError("frame " + std::to_string(fi) + ", picker " + std::to_string(picker) + ": " +
                                    e.what());
                }
            }
            track.vectors.push_back(tracker.push(d));
            track.descriptors.push_back(std::move(d));
        }
        tracks.push_back(std::move(track));
    }
    return tracks;
}

PickerVectors track_vectors(std::span<const PickerTrack> tracks) {
    PickerVectors out;
    for (const PickerTrack& t : tracks)
        out[t.picker_id] = t.vectors;
    return out;
}

std::vector<ParameterVector> calibration_samples(std::span<const PickerTrack> tracks) {
    std::vector<ParameterVector> out;
    for (const PickerTrack& t : tracks)
        for (const auto& v : t.vectors)
            if (v && !v->propagated)
                out.push_back(*v);
    return out;
}

std::vector<ActivityTimeline> classify_tracks(std::span<const PickerTrack> tracks, const CalibrationModel& cal,
                                              int window) {
    std::vector<ActivityTimeline> out;
    for (const PickerTrack& t : tracks)
        out.push_back(classify_sequence(t.picker_id, t.vectors, cal, window));
    return out;
}

std::vector<ActivityTimeline> run_pipeline(std::span<const GrayFrame> frames, const MaskSet& masks,
                                           const CalibrationModel& cal, const PipelineConfig& cfg) {
    check_complete(cal);
    const std::vector<FlowField> flows = compute_flows(frames, cfg.flow);
    const std::vector<int> pickers = picker_ids(masks);
    const std::vector<PickerTrack> tracks = extract_tracks(frames, masks, pickers, flows, cfg);
    return classify_tracks(tracks, cal, cfg.window);
}

}  // namespace pickact
