#pragma once

#include "pickact/calibration.hpp"
#include "pickact/classifier.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace pickact {

/// Picking is the positive class.
struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

struct Scores {
    ConfusionCounts counts;
    std::optional<double> tpr;  // nullopt when the denominator is zero
    std::optional<double> tnr;
    std::optional<double> acc;
};

/// Throws DataError on length mismatch.
Scores score(std::span<const FlClass> pred, std::span<const FlClass> truth);

/// Fixed-precision rate, or "NA" for an undefined one.
std::string format_rate(const std::optional<double>& rate);

struct VariantSpec {
    std::string name;
    std::vector<Attribute> attributes;
};

/// Throws DataError on an empty subset or an unknown attribute name.
VariantSpec make_variant(const std::string& name, const std::vector<std::string>& attribute_names);

/// The full four-attribute classifier followed by the three reduced variants
/// (range + ori extremes, range only, ori extremes only).
std::vector<VariantSpec> standard_variants();

struct VariantResult {
    VariantSpec spec;
    Scores scores;
};

using PickerVectors = std::map<int, std::vector<std::optional<ParameterVector>>>;
using PickerTruth = std::map<int, std::vector<FlClass>>;

/// FL labels of one picker when only `subset` votes (same tie rule as the full classifier).
std::vector<FlClass> classify_with_subset(std::span<const std::optional<ParameterVector>> vectors,
                                          const CalibrationModel& cal, std::span<const Attribute> subset);

std::vector<VariantResult> run_variants(const PickerVectors& vectors, const PickerTruth& truth,
                                        const CalibrationModel& cal, std::span<const VariantSpec> variants);

/// CSV: variant,acc,tnr,tpr
void write_variant_report(std::ostream& out, std::span<const VariantResult> results);

}  // namespace pickact
