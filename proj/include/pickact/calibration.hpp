#pragma once

#include "pickact/descriptor.hpp"
#include "pickact/kde.hpp"
#include "pickact/kmeans.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>

namespace pickact {

/// Which side of the threshold votes Picking.
enum class Polarity { PickingBelow, PickingAbove };

/// mag_range, cs_mean, ori_max: Picking below. ori_min: Picking above.
Polarity default_polarity(Attribute a);

struct AttributeCalibration {
    Attribute attribute = Attribute::MagRange;
    KdeModel kde;
    ClusterModel clusters;               // the k = 2 model the threshold comes from
    std::map<int, double> silhouettes;   // k -> mean silhouette, k = 2..4
    double threshold = 0.0;
    Polarity polarity = Polarity::PickingBelow;

    bool votes_picking(double value) const {
        return polarity == Polarity::PickingBelow ? value < threshold : value > threshold;
    }
};

struct CalibrationModel {
    std::array<AttributeCalibration, 4> attributes;  // in kAllAttributes order

    const AttributeCalibration& get(Attribute a) const { return attributes[static_cast<std::size_t>(a)]; }
    AttributeCalibration& get(Attribute a) { return attributes[static_cast<std::size_t>(a)]; }
};

/// Midpoint thresholds from four k = 2 cluster models, one per attribute
/// (matched by ClusterModel::attribute). Throws CalibrationError otherwise.
CalibrationModel derive_thresholds(std::span<const ClusterModel> models);

struct CalibrationOptions {
    KMeansOptions kmeans;
    int min_k = 2;
    int max_k = 4;
};

/// KDE + k-means (k = 2..4) per attribute over the given vectors, thresholds from k = 2.
/// Propagated vectors are skipped.
CalibrationModel calibrate(std::span<const ParameterVector> vectors, const CalibrationOptions& opts = {});

std::string calibration_to_json(const CalibrationModel& model);
CalibrationModel calibration_from_json(const std::string& text);
void save_calibration(const std::filesystem::path& path, const CalibrationModel& model);
CalibrationModel load_calibration(const std::filesystem::path& path);

}  // namespace pickact
