#pragma once

#include "pickact/flow.hpp"
#include "pickact/image.hpp"

#include <array>
#include <cstddef>
#include <deque>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

namespace pickact {

/// Flow samples inside the mask, row-major. With grid_step > 1 only pixels on
/// the (x % step == 0, y % step == 0) lattice are kept.
std::vector<PolarSample> mask_flow(const FlowField& field, const MorMask& mask, int grid_step = 1);

/// Population statistics of one scalar channel.
struct StatBlock {
    double mean = 0.0;
    double std = 0.0;
    double range = 0.0;
    double min = 0.0;
    double max = 0.0;
    double rms = 0.0;
};

StatBlock compute_stats(std::span<const double> values);

struct FrameDescriptor {
    int frame_index = 0;
    int picker_id = 0;
    std::size_t sample_count = 0;  // S_f
    StatBlock mag;                 // pixels/frame
    StatBlock ori;                 // degrees
    double mag_sum = 0.0;
    double ori_sum = 0.0;
    double cs_term = 0.0;
    bool empty = true;
};

/// One summand of the Correlation Sensitivity: mag_sum * ori_sum / (2 * count), 0 for count == 0.
double cs_term(double mag_sum, double ori_sum, std::size_t count);

FrameDescriptor frame_descriptor(std::span<const PolarSample> samples, int frame_index, int picker_id);

/// Correlation Sensitivity over a set of frames: the sum of their cs terms.
double correlation_sensitivity(std::span<const FrameDescriptor> frames);

enum class Attribute { MagRange, CsMean, OriMax, OriMin };

inline constexpr std::array<Attribute, 4> kAllAttributes{Attribute::MagRange, Attribute::CsMean, Attribute::OriMax,
                                                         Attribute::OriMin};

std::string_view attribute_name(Attribute a);
Attribute parse_attribute(std::string_view name);  // throws DataError

/// The four-value vector the classifier consumes.
struct ParameterVector {
    int frame_index = 0;
    int picker_id = 0;
    double mag_range = 0.0;
    double ori_max = 0.0;
    double ori_min = 0.0;
    double cs_mean = 0.0;
    bool propagated = false;  // copied forward over an empty-mask frame

    double value(Attribute a) const;
};

inline constexpr int kDefaultWindow = 5;

/// Spatial terms from the newest descriptor, cs_mean over the whole history.
/// Throws DataError on an empty history or mixed pickers.
ParameterVector parameter_vector(std::span<const FrameDescriptor> history);

/// Per-picker trailing window. Empty descriptors do not enter the window; they
/// yield the previous vector flagged as propagated (or nothing before the first
/// non-empty frame).
class ParameterTracker {
public:
    explicit ParameterTracker(int window = kDefaultWindow);

    std::optional<ParameterVector> push(const FrameDescriptor& d);
    std::optional<ParameterVector> propagate(int frame_index);
    const std::optional<ParameterVector>& last() const { return last_; }

private:
    int window_;
    std::deque<FrameDescriptor> history_;
    std::optional<ParameterVector> last_;
};

void write_descriptor_csv_header(std::ostream& out);
void write_descriptor_csv_row(std::ostream& out, const FrameDescriptor& d);

}  // namespace pickact
