#pragma once

#include "pickact/classifier.hpp"
#include "pickact/image.hpp"
#include "pickact/pipeline.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pickact {

inline constexpr const char* kManifestName = "manifest.json";

/// On-disk dataset description. Paths are relative to `root`.
struct DatasetManifest {
    std::filesystem::path root;
    double fps = 10.0;
    std::vector<std::filesystem::path> frames;                     // index == frame_index
    std::vector<int> pickers;
    std::map<std::pair<int, int>, std::filesystem::path> masks;    // (frame, picker) -> file
    std::map<int, std::vector<FlClass>> truth;                     // optional, per picker per frame
};

struct Dataset {
    DatasetManifest manifest;
    std::vector<GrayFrame> frames;
    MaskSet masks;
};

/// `path` may be the dataset directory or its manifest file.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest);

/// Decodes every frame and mask, checking files exist and dimensions agree.
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace pickact
