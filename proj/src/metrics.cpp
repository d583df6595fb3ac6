#include "pickact/metrics.hpp"

#include "pickact/errors.hpp"

#include <cmath>
#include <cstdio>

namespace pickact {

Scores score(std::span<const FlClass> pred, std::span<const FlClass> truth) {
    if (pred.size() != truth.size())
        throw DataError("prediction and truth lengths differ (" + std::to_string(pred.size()) + " vs " +
                        std::to_string(truth.size()) + ")");
    Scores s;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] == FlClass::Picking;
        const bool t = truth[i] == FlClass::Picking;
        if (p && t)
            ++s.counts.tp;
        else if (p)
            ++s.counts.fp;
        else if (t)
            ++s.counts.fn;
        else
            ++s.counts.tn;
    }
    const auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0)
            return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    const ConfusionCounts& c = s.counts;
    s.tpr = ratio(c.tp, c.tp + c.fn);
    s.tnr = ratio(c.tn, c.tn + c.fp);
    s.acc = ratio(c.tp + c.tn, c.total());

    // ACC is the class-count weighted mix of TPR and TNR.
    if (s.acc) {
        const double pos = static_cast<double>(c.tp + c.fn), neg = static_cast<double>(c.tn + c.fp);
        const double mix = (pos * s.tpr.value_or(0.0) + neg * s.tnr.value_or(0.0)) / static_cast<double>(c.total());
        if (std::abs(mix - *s.acc) > 1e-12)
            throw NumericError("accuracy is inconsistent with TPR/TNR");
    }
    return s;
}

std::string format_rate(const std::optional<double>& rate) {
    if (!rate)
        return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *rate);
    return buf;
}

VariantSpec make_variant(const std::string& name, const std::vector<std::string>& attribute_names) {
    if (attribute_names.empty())
        throw DataError("variant '" + name + "' has no attributes");
    VariantSpec v{name, {}};
    for (const std::string& a : attribute_names)
        v.attributes.push_back(parse_attribute(a));
    return v;
}

std::vector<VariantSpec> standard_variants() {
    return {
        {"proposed", {kAllAttributes.begin(), kAllAttributes.end()}},
        {"variant_i", {Attribute::MagRange, Attribute::OriMin, Attribute::OriMax}},
        {"variant_ii", {Attribute::MagRange}},
        {"variant_iii", {Attribute::OriMin, Attribute::OriMax}},
    };
}

std::vector<FlClass> classify_with_subset(std::span<const std::optional<ParameterVector>> vectors,
                                          const CalibrationModel& cal, std::span<const Attribute> subset) {
    check_complete(cal);
    std::vector<FlClass> out;
    out.reserve(vectors.size());
    std::optional<FlClass> prev;
    for (const auto& v : vectors) {
        const FlClass label = v ? vote_subset(*v, cal, subset, prev) : prev.value_or(FlClass::NotPicking);
        out.push_back(label);
        prev = label;
    }
    return out;
}

std::vector<VariantResult> run_variants(const PickerVectors& vectors, const PickerTruth& truth,
                                        const CalibrationModel& cal, std::span<const VariantSpec> variants) {
    std::vector<VariantResult> results;
    for (const VariantSpec& spec : variants) {
        if (spec.attributes.empty())
            throw DataError("variant '" + spec.name + "' has no attributes");
        std::vector<FlClass> pred, expected;
        for (const auto& [picker, seq] : vectors) {
            const auto t = truth.find(picker);
            if (t == truth.end())
                throw DataError("no ground truth for picker " + std::to_string(picker));
            if (t->second.size() != seq.size())
                throw DataError("ground truth length mismatch for picker " + std::to_string(picker));
            const std::vector<FlClass> labels = classify_with_subset(seq, cal, spec.attributes);
            pred.insert(pred.end(), labels.begin(), labels.end());
            expected.insert(expected.end(), t->second.begin(), t->second.end());
        }
        results.push_back({spec, score(pred, expected)});
    }
    return results;
}

void write_variant_report(std::ostream& out, std::span<const VariantResult> results) {
    out << "variant,acc,tnr,tpr\n";
    for (const VariantResult& r : results)
        out << r.spec.name << ',' << format_rate(r.scores.acc) << ',' << format_rate(r.scores.tnr) << ','
            << format_rate(r.scores.tpr) << '\n';
}

}  // namespace pickact
