#include "pickact/dataset.hpp"

#include "pickact/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace pickact {

using nlohmann::json;
namespace fs = std::filesystem;

DatasetManifest read_manifest(const fs::path& path) {
    const fs::path file = fs::is_directory(path) ? path / kManifestName : path;
    std::ifstream in(file);
    if (!in)
        throw DataError("cannot open manifest " + file.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("manifest " + file.string() + " is not valid JSON: " + e.what());
    }

    DatasetManifest m;
    m.root = file.parent_path();
    try {
        if (doc.at("format").get<std::string>() != "pickact-dataset")
            throw DataError("manifest " + file.string() + " has an unknown format tag");
        m.fps = doc.at("fps").get<double>();
        if (!(m.fps > 0.0))
            throw DataError("manifest fps must be > 0");

        std::vector<std::pair<int, fs::path>> frames;
        for (const json& f : doc.at("frames"))
            frames.emplace_back(f.at("index").get<int>(), f.at("file").get<std::string>());
        std::sort(frames.begin(), frames.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 0; i < frames.size(); ++i) {
            if (frames[i].first != static_cast<int>(i))
                throw DataError("frame indices are not contiguous from 0 (expected " + std::to_string(i) +
                                ", found " + std::to_string(frames[i].first) + ")");
            m.frames.push_back(frames[i].second);
        }

        m.pickers = doc.at("pickers").get<std::vector<int>>();
        const std::set<int> known(m.pickers.begin(), m.pickers.end());
        if (known.size() != m.pickers.size())
            throw DataError("manifest lists a picker twice");

        for (const json& mk : doc.at("masks")) {
            const int frame = mk.at("frame").get<int>();
            const int picker = mk.at("picker").get<int>();
            if (frame < 0 || frame >= static_cast<int>(m.frames.size()))
                throw DataError("mask for picker " + std::to_string(picker) + " references missing frame " +
                                std::to_string(frame));
            if (!known.contains(picker))
                throw DataError("mask references unknown picker " + std::to_string(picker));
            if (!m.masks.emplace(std::pair{frame, picker}, fs::path(mk.at("file").get<std::string>())).second)
                throw DataError("duplicate mask for frame " + std::to_string(frame) + ", picker " +
                                std::to_string(picker));
        }

        if (doc.contains("truth")) {
            for (const auto& [key, labels] : doc.at("truth").items()) {
                const int picker = std::stoi(key);
                if (!known.contains(picker))
                    throw DataError("truth references unknown picker " + key);
                std::vector<FlClass> seq;
                for (const json& l : labels)
                    seq.push_back(parse_fl(l.get<std::string>()));
                if (seq.size() != m.frames.size())
                    throw DataError("truth for picker " + key + " has " + std::to_string(seq.size()) +
                                    " labels for " + std::to_string(m.frames.size()) + " frames");
                m.truth[picker] = std::move(seq);
            }
        }
    } catch (const json::exception& e) {
        throw DataError("malformed manifest " + file.string() + ": " + e.what());
    } catch (const std::invalid_argument&) {
        throw DataError("malformed picker id in manifest " + file.string());
    }
    return m;
}

void write_manifest(const DatasetManifest& m) {
    json frames = json::array();
    for (std::size_t i = 0; i < m.frames.size(); ++i)
        frames.push_back({{"index", i}, {"file", m.frames[i].generic_string()}});
    json masks = json::array();
    for (const auto& [key, file] : m.masks)
        masks.push_back({{"frame", key.first}, {"picker", key.second}, {"file", file.generic_string()}});
    json truth = json::object();
    for (const auto& [picker, seq] : m.truth) {
        json labels = json::array();
        for (FlClass c : seq)
            labels.push_back(std::string(fl_name(c)));
        truth[std::to_string(picker)] = labels;
    }
    const json doc{{"format", "pickact-dataset"}, {"version", 1}, {"fps", m.fps},   {"pickers", m.pickers},
                   {"frames", frames},            {"masks", masks}, {"truth", truth}};
    fs::create_directories(m.root);
    std::ofstream out(m.root / kManifestName, std::ios::binary);
    if (!out)
        throw DataError("cannot write manifest in " + m.root.string());
    out << doc.dump(1) << '\n';
}

Dataset load_dataset(const fs::path& path) {
    Dataset ds;
    ds.manifest = read_manifest(path);
    const DatasetManifest& m = ds.manifest;

    for (std::size_t i = 0; i < m.frames.size(); ++i) {
        const fs::path file = m.root / m.frames[i];
        if (!fs::exists(file))
            throw DataError("frame " + std::to_string(i) + " file not found: " + file.string());
        ds.frames.push_back(frame_from_raster(read_pnm(file), static_cast<int>(i)));
        if (ds.frames.back().width != ds.frames.front().width || ds.frames.back().height != ds.frames.front().height)
            throw DimensionError("frame " + std::to_string(i) + " differs in size from frame 0");
    }
    for (const auto& [key, rel] : m.masks) {
        const auto [frame, picker] = key;
        const fs::path file = m.root / rel;
        if (!fs::exists(file))
            throw DataError("mask for frame " + std::to_string(frame) + ", picker " + std::to_string(picker) +
                            " not found: " + file.string());
        MorMask mask = mask_from_raster(read_pnm(file), picker, frame);
        const GrayFrame& fr = ds.frames[static_cast<std::size_t>(frame)];
        if (mask.width != fr.width || mask.height != fr.height)
            throw DimensionError("mask for frame " + std::to_string(frame) + ", picker " + std::to_string(picker) +
                                 " is " + std::to_string(mask.width) + "x" + std::to_string(mask.height) +
                                 " but the frame is " + std::to_string(fr.width) + "x" + std::to_string(fr.height));
        ds.masks.emplace(key, std::move(mask));
    }
    return ds;
}

}  // namespace pickact
