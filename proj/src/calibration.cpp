#include "pickact/calibration.hpp"

#include "pickact/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <vector>

namespace pickact {

using nlohmann::json;

Polarity default_polarity(Attribute a) {
    return a == Attribute::OriMin ? Polarity::PickingAbove : Polarity::PickingBelow;
}

CalibrationModel derive_thresholds(std::span<const ClusterModel> models) {
    CalibrationModel cal;
    std::array<bool, 4> seen{};
    for (const ClusterModel& m : models) {
        Attribute a;
        try {
            a = parse_attribute(m.attribute);
        } catch (const DataError& e) {
            throw CalibrationError(e.what());
        }
        if (m.k != 2 || m.centers.size() != 2)
            throw CalibrationError("attribute '" + m.attribute + "': thresholds need k=2, got k=" + std::to_string(m.k));
        if (!(m.centers[0] < m.centers[1]))
            throw CalibrationError("attribute '" + m.attribute + "': cluster centers are not distinct");
        const auto idx = static_cast<std::size_t>(a);
        if (seen[idx])
            throw CalibrationError("attribute '" + m.attribute + "' given twice");
        seen[idx] = true;
        AttributeCalibration& ac = cal.attributes[idx];
        ac.attribute = a;
        ac.clusters = m;
        ac.threshold = 0.5 * (m.centers[0] + m.centers[1]);
        ac.polarity = default_polarity(a);
        ac.silhouettes[2] = m.silhouette;
    }
    for (Attribute a : kAllAttributes)
        if (!seen[static_cast<std::size_t>(a)])
            throw CalibrationError("missing cluster model for attribute '" + std::string(attribute_name(a)) + "'");
    return cal;
}

CalibrationModel calibrate(std::span<const ParameterVector> vectors, const CalibrationOptions& opts) {
    std::vector<ClusterModel> two_cluster;
    std::array<KdeModel, 4> kdes;
    std::array<std::map<int, double>, 4> silhouettes;
    for (Attribute a : kAllAttributes) {
        const std::string name(attribute_name(a));
        std::vector<double> values;
        for (const ParameterVector& v : vectors)
            if (!v.propagated)
                values.push_back(v.value(a));
        const auto idx = static_cast<std::size_t>(a);
        kdes[idx] = fit_kde(values, name);
        for (int k = opts.min_k; k <= opts.max_k; ++k) {
            ClusterModel m = kmeans_silhouette(values, k, name, opts.kmeans);
            silhouettes[idx][k] = m.silhouette;
            if (k == 2)
                two_cluster.push_back(std::move(m));
        }
    }
    CalibrationModel cal = derive_thresholds(two_cluster);
    for (Attribute a : kAllAttributes) {
        const auto idx = static_cast<std::size_t>(a);
        cal.attributes[idx].kde = std::move(kdes[idx]);
        cal.attributes[idx].silhouettes = silhouettes[idx];
    }
    return cal;
}

std::string calibration_to_json(const CalibrationModel& model) {
    json attrs = json::array();
    for (const AttributeCalibration& ac : model.attributes) {
        json sil = json::object();
        for (const auto& [k, s] : ac.silhouettes)
            sil[std::to_string(k)] = s;
        attrs.push_back({
            {"attribute", std::string(attribute_name(ac.attribute))},
            {"centers", ac.clusters.centers},
            {"silhouettes", sil},
            {"bandwidth", ac.kde.bandwidth},
            {"bandwidth_fallback", ac.kde.bandwidth_fallback},
            {"modes", ac.kde.modes},
            {"threshold", ac.threshold},
            {"polarity", ac.polarity == Polarity::PickingBelow ? "picking_below" : "picking_above"},
        });
    }
    return json{{"format", "pickact-calibration"}, {"version", 1}, {"attributes", attrs}}.dump(2) + "\n";
}

CalibrationModel calibration_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("calibration is not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "pickact-calibration")
            throw DataError("not a calibration file");
        CalibrationModel cal;
        std::array<bool, 4> seen{};
        for (const json& j : doc.at("attributes")) {
            const Attribute a = parse_attribute(j.at("attribute").get<std::string>());
            const auto idx = static_cast<std::size_t>(a);
            if (seen[idx])
                throw DataError("calibration lists attribute '" + std::string(attribute_name(a)) + "' twice");
            seen[idx] = true;
            AttributeCalibration& ac = cal.attributes[idx];
            ac.attribute = a;
            ac.clusters.attribute = std::string(attribute_name(a));
            ac.clusters.centers = j.at("centers").get<std::vector<double>>();
            ac.clusters.k = static_cast<int>(ac.clusters.centers.size());
            for (const auto& [k, s] : j.at("silhouettes").items())
                ac.silhouettes[std::stoi(k)] = s.get<double>();
            if (auto it = ac.silhouettes.find(2); it != ac.silhouettes.end())
                ac.clusters.silhouette = it->second;
            ac.kde.attribute = ac.clusters.attribute;
            ac.kde.bandwidth = j.at("bandwidth").get<double>();
            ac.kde.bandwidth_fallback = j.value("bandwidth_fallback", false);
            ac.kde.modes = j.at("modes").get<std::vector<double>>();
            ac.threshold = j.at("threshold").get<double>();
            const std::string pol = j.at("polarity").get<std::string>();
            if (pol == "picking_below")
                ac.polarity = Polarity::PickingBelow;
            else if (pol == "picking_above")
                ac.polarity = Polarity::PickingAbove;
            else
                throw DataError("unknown polarity '" + pol + "'");
        }
        for (Attribute a : kAllAttributes)
            if (!seen[static_cast<std::size_t>(a)])
                throw DataError("calibration lacks attribute '" + std::string(attribute_name(a)) + "'");
        return cal;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed calibration: ") + e.what());
    }
}

void save_calibration(const std::filesystem::path& path, const CalibrationModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write calibration " + path.string());
    out << calibration_to_json(model);
}

CalibrationModel load_calibration(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open calibration " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return calibration_from_json(ss.str());
}

}  // namespace pickact
