#include "pickact/descriptor.hpp"

#include "pickact/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace pickact {

std::vector<PolarSample> mask_flow(const FlowField& field, const MorMask& mask, int grid_step) {
    if (field.width != mask.width || field.height != mask.height)
        throw DimensionError("mask of picker " + std::to_string(mask.picker_id) + " at frame " +
                             std::to_string(mask.frame_index) + " does not match the flow field size");
    if (grid_step < 1)
        throw DataError("grid_step must be >= 1");
    std::vector<PolarSample> out;
    for (int y = 0; y < field.height; y += grid_step) {
        for (int x = 0; x < field.width; x += grid_step) {
            if (!mask.at(x, y))
                continue;
            const std::size_t i = static_cast<std::size_t>(y) * field.width + x;
            out.push_back(to_polar(field.dx[i], field.dy[i]));
        }
    }
    return out;
}

StatBlock compute_stats(std::span<const double> values) {
    StatBlock s;
    if (values.empty())
        return s;
    const double n = static_cast<double>(values.size());
    double sum = 0.0, sq = 0.0;
    s.min = values.front();
    s.max = values.front();
    for (double v : values) {
        sum += v;
        sq += v * v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = std::clamp(sum / n, s.min, s.max);
    double var = 0.0;
    for (double v : values)
        var += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(var / n);
    s.range = s.max - s.min;
    s.rms = std::sqrt(sq / n);
    return s;
}

double cs_term(double mag_sum, double ori_sum, std::size_t count) {
    if (count == 0)
        return 0.0;
    return mag_sum * ori_sum / (2.0 * static_cast<double>(count));
}

FrameDescriptor frame_descriptor(std::span<const PolarSample> samples, int frame_index, int picker_id) {
    FrameDescriptor d;
    d.frame_index = frame_index;
    d.picker_id = picker_id;
    d.sample_count = samples.size();
    d.empty = samples.empty();
    if (d.empty)
        return d;

    std::vector<double> mags, oris;
    mags.reserve(samples.size());
    oris.reserve(samples.size());
    for (const PolarSample& s : samples) {
        mags.push_back(s.magnitude);
        oris.push_back(s.orientation);
        d.mag_sum += s.magnitude;
        d.ori_sum += s.orientation;
    }
    d.mag = compute_stats(mags);
    d.ori = compute_stats(oris);
    d.cs_term = cs_term(d.mag_sum, d.ori_sum, d.sample_count);
    return d;
}

double correlation_sensitivity(std::span<const FrameDescriptor> frames) {
    double total = 0.0;
    for (const FrameDescriptor& f : frames)
        total += f.cs_term;
    return total;
}

std::string_view attribute_name(Attribute a) {
    switch (a) {
    case Attribute::MagRange: return "mag_range";
    case Attribute::CsMean: return "cs_mean";
    case Attribute::OriMax: return "ori_max";
    case Attribute::OriMin: return "ori_min";
    }
    return "unknown";
}

Attribute parse_attribute(std::string_view name) {
    for (Attribute a : kAllAttributes)
        if (attribute_name(a) == name)
            return a;
    throw DataError("unknown attribute '" + std::string(name) + "'");
}

double ParameterVector::value(Attribute a) const {
    switch (a) {
    case Attribute::MagRange: return mag_range;
    case Attribute::CsMean: return cs_mean;
    case Attribute::OriMax: return ori_max;
    case Attribute::OriMin: return ori_min;
    }
    return 0.0;
}

ParameterVector parameter_vector(std::span<const FrameDescriptor> history) {
    if (history.empty())
        throw DataError("parameter_vector needs at least one descriptor");
    const FrameDescriptor& newest = history.back();
    double cs = 0.0;
    for (const FrameDescriptor& d : history) {
        if (d.picker_id != newest.picker_id)
            throw DataError("descriptor history mixes pickers");
        cs += d.cs_term;
    }
    ParameterVector v;
    v.frame_index = newest.frame_index;
    v.picker_id = newest.picker_id;
    v.mag_range = newest.mag.range;
    v.ori_max = newest.ori.max;
    v.ori_min = newest.ori.min;
    v.cs_mean = cs / static_cast<double>(history.size());
    return v;
}

ParameterTracker::ParameterTracker(int window) : window_(window) {
    if (window < 1)
        throw DataError("window must be >= 1");
}

std::optional<ParameterVector> ParameterTracker::push(const FrameDescriptor& d) {
    if (d.empty)
        return propagate(d.frame_index);
    history_.push_back(d);
    while (static_cast<int>(history_.size()) > window_)
        history_.pop_front();
    const std::vector<FrameDescriptor> window(history_.begin(), history_.end());
    last_ = parameter_vector(window);
    return last_;
}

std::optional<ParameterVector> ParameterTracker::propagate(int frame_index) {
    if (!last_)
        return std::nullopt;
    ParameterVector v = *last_;
    v.frame_index = frame_index;
    v.propagated = true;
    return v;
}

void write_descriptor_csv_header(std::ostream& out) {
    out << "frame_index,picker_id,S_f,mag_min,mag_max,mag_mean,mag_std,mag_range,mag_rms,"
           "ori_min,ori_max,ori_mean,ori_std,ori_range,ori_rms,mag_sum,ori_sum,cs_term\n";
}

void write_descriptor_csv_row(std::ostream& out, const FrameDescriptor& d) {
    const auto block = [&out](const StatBlock& s) {
        out << ',' << s.min << ',' << s.max << ',' << s.mean << ',' << s.std << ',' << s.range << ',' << s.rms;
    };
    out << d.frame_index << ',' << d.picker_id << ',' << d.sample_count;
    block(d.mag);
    block(d.ori);
    out << ',' << d.mag_sum << ',' << d.ori_sum << ',' << d.cs_term << '\n';
}

}  // namespace pickact
