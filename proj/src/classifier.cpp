#include "pickact/classifier.hpp"

#include "pickact/errors.hpp"

#include <cmath>
#include <string>

namespace pickact {

std::string_view fl_name(FlClass c) { return c == FlClass::Picking ? "P" : "NP"; }

FlClass parse_fl(std::string_view s) {
    if (s == "P")
        return FlClass::Picking;
    if (s == "NP")
        return FlClass::NotPicking;
    throw DataError("unknown label '" + std::string(s) + "' (expected P or NP)");
}

std::string_view bfl_name(BflClass c) { return c == BflClass::WaitToFinish ? "WaitToFinish" : "CallARobot"; }

BflClass to_bfl(FlClass c) { return c == FlClass::Picking ? BflClass::WaitToFinish : BflClass::CallARobot; }

void check_complete(const CalibrationModel& cal) {
    for (Attribute a : kAllAttributes)
        if (!std::isfinite(cal.get(a).threshold))
            throw CalibrationError("calibration has no usable threshold for '" + std::string(attribute_name(a)) + "'");
}

FlClass vote_subset(const ParameterVector& v, const CalibrationModel& cal, std::span<const Attribute> subset,
                    std::optional<FlClass> prev) {
    if (subset.empty())
        throw DataError("attribute subset is empty");
    int picking = 0;
    for (Attribute a : subset)
        picking += cal.get(a).votes_picking(v.value(a)) ? 1 : 0;
    const int against = static_cast<int>(subset.size()) - picking;
    if (picking > against)
        return FlClass::Picking;
    if (against > picking)
        return FlClass::NotPicking;
    return prev.value_or(FlClass::NotPicking);
}

FlLabel classify_frame(const ParameterVector& v, const CalibrationModel& cal, const std::optional<FlLabel>& prev) {
    check_complete(cal);
    FlLabel out;
    out.frame_index = v.frame_index;
    out.picker_id = v.picker_id;
    for (Attribute a : kAllAttributes)
        out.votes[static_cast<std::size_t>(a)] = cal.get(a).votes_picking(v.value(a));
    out.label = vote_subset(v, cal, kAllAttributes,
                            prev ? std::optional<FlClass>(prev->label) : std::nullopt);
    return out;
}

BflLabel rolling_mode(std::span<const FlLabel> history, int window) {
    if (history.empty())
        throw DataError("rolling_mode needs at least one FL label");
    if (window < 1)
        throw DataError("window must be >= 1");
    const std::size_t len = std::min(history.size(), static_cast<std::size_t>(window));
    const auto recent = history.subspan(history.size() - len);

    BflLabel out;
    out.frame_index = recent.back().frame_index;
    out.picker_id = recent.back().picker_id;
    int picking = 0;
    for (const FlLabel& l : recent) {
        out.window.push_back(l.label);
        picking += l.label == FlClass::Picking ? 1 : 0;
    }
    const int other = static_cast<int>(len) - picking;
    FlClass mode = recent.back().label;
    if (picking > other)
        mode = FlClass::Picking;
    else if (other > picking)
        mode = FlClass::NotPicking;
    out.label = to_bfl(mode);
    return out;
}

ActivityTimeline classify_sequence(int picker_id, std::span<const std::optional<ParameterVector>> vectors,
                                   const CalibrationModel& cal, int window) {
    check_complete(cal);
    ActivityTimeline t;
    t.picker_id = picker_id;
    for (std::size_t f = 0; f < vectors.size(); ++f) {
        std::optional<FlLabel> prev;
        if (!t.fl.empty())
            prev = t.fl.back();
        FlLabel label;
        if (vectors[f]) {
            label = classify_frame(*vectors[f], cal, prev);
        } else {
            label.label = prev ? prev->label : FlClass::NotPicking;
            label.has_vector = false;
        }
        label.frame_index = static_cast<int>(f);
        label.picker_id = picker_id;
        t.fl.push_back(label);

        BflLabel b = rolling_mode(t.fl, window);
        if (t.bfl.empty() || t.bfl.back().label != b.label)
            t.signals.push_back({b.frame_index, b.label});
        t.bfl.push_back(std::move(b));
    }
    return t;
}

void write_timeline_csv(std::ostream& out, std::span<const ActivityTimeline> timelines) {
    out << "frame_index,picker_id,fl_label,bfl_label,signal\n";
    for (const ActivityTimeline& t : timelines) {
        std::size_t next_signal = 0;
        for (std::size_t i = 0; i < t.fl.size(); ++i) {
            out << t.fl[i].frame_index << ',' << t.picker_id << ',' << fl_name(t.fl[i].label) << ','
                << bfl_name(t.bfl[i].label) << ',';
            if (next_signal < t.signals.size() && t.signals[next_signal].frame_index == t.fl[i].frame_index)
                out << bfl_name(t.signals[next_signal++].signal);
            out << '\n';
        }
    }
}

void write_plot_data(std::ostream& out, std::span<const ActivityTimeline> timelines) {
    out << "frame_index,picker_id,fl,bfl\n";
    for (const ActivityTimeline& t : timelines) {
        for (std::size_t i = 0; i < t.fl.size(); ++i) {
            out << t.fl[i].frame_index << ',' << t.picker_id << ',' << (t.fl[i].label == FlClass::Picking ? 1 : 0)
                << ',' << (t.bfl[i].label == BflClass::WaitToFinish ? 1 : 0) << '\n';
        }
    }
}

}  // namespace pickact
