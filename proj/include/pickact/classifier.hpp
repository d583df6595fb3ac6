#pragma once

#include "pickact/calibration.hpp"
#include "pickact/descriptor.hpp"

#include <array>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

namespace pickact {

enum class FlClass { Picking, NotPicking };
enum class BflClass { WaitToFinish, CallARobot };

std::string_view fl_name(FlClass c);   // "P" / "NP"
FlClass parse_fl(std::string_view s);  // throws DataError
std::string_view bfl_name(BflClass c);  // "WaitToFinish" / "CallARobot"
BflClass to_bfl(FlClass c);

struct FlLabel {
    int frame_index = 0;
    int picker_id = 0;
    FlClass label = FlClass::NotPicking;
    std::array<bool, 4> votes{};  // true = Picking vote, kAllAttributes order
    bool has_vector = true;       // false when no descriptor existed yet
};

/// Majority of the subset's votes; an even split keeps `prev`, or NotPicking without one.
FlClass vote_subset(const ParameterVector& v, const CalibrationModel& cal, std::span<const Attribute> subset,
                    std::optional<FlClass> prev);

/// Four-attribute frame-level decision.
FlLabel classify_frame(const ParameterVector& v, const CalibrationModel& cal, const std::optional<FlLabel>& prev);

struct BflLabel {
    int frame_index = 0;
    int picker_id = 0;
    BflClass label = BflClass::CallARobot;
    std::vector<FlClass> window;  // oldest first, 1..window length entries
};

/// Most frequent FL label over the trailing `window` entries of `history`;
/// an even split goes to the newest label. Throws DataError on empty history.
BflLabel rolling_mode(std::span<const FlLabel> history, int window = kDefaultWindow);

struct SchedulerSignal {
    int frame_index = 0;
    BflClass signal = BflClass::CallARobot;
    bool operator==(const SchedulerSignal&) const = default;
};

struct ActivityTimeline {
    int picker_id = 0;
    std::vector<FlLabel> fl;
    std::vector<BflLabel> bfl;
    std::vector<SchedulerSignal> signals;  // on every BFL change, including the first BFL label
};

/// Builds a timeline from per-frame parameter vectors (nullopt = nothing known yet).
ActivityTimeline classify_sequence(int picker_id, std::span<const std::optional<ParameterVector>> vectors,
                                   const CalibrationModel& cal, int window = kDefaultWindow);

/// Throws CalibrationError when any threshold is not finite.
void check_complete(const CalibrationModel& cal);

void write_timeline_csv(std::ostream& out, std::span<const ActivityTimeline> timelines);
/// Step-plot series: frame_index,picker_id,fl,bfl with Picking/WaitToFinish = 1, else 0.
void write_plot_data(std::ostream& out, std::span<const ActivityTimeline> timelines);

}  // namespace pickact
