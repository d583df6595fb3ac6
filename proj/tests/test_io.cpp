#include "pickact/config.hpp"
#include "pickact/dataset.hpp"
#include "pickact/errors.hpp"
#include "pickact/image.hpp"
#include "pickact/synth.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace pickact;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("pickact_test_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SynthConfig small_config(int frames = 10) {
    SynthConfig cfg;
    cfg.width = 64;
    cfg.height = 48;
    cfg.frame_count = frames;
    cfg.pickers = {{{0, Activity::Picking}}, {{0, Activity::Unloading}, {frames / 2, Activity::Picking}}};
    return cfg;
}

}  // namespace

TEST_CASE("pgm round trip and rgb luma") {
    TempDir dir("pgm");
    Raster8 r{3, 2, 1, {0, 10, 20, 30, 40, 255}};
    write_pgm(dir.path / "a.pgm", r);
    const Raster8 back = read_pnm(dir.path / "a.pgm");
    CHECK(back.pixels == r.pixels);
    CHECK(back.width == 3);
    const GrayFrame f = frame_from_raster(back);
    CHECK(f.at(2, 1) == doctest::Approx(1.0));
    CHECK(raster_from_frame(f).pixels == r.pixels);

    std::ofstream(dir.path / "c.ppm", std::ios::binary) << "P6\n# comment\n1 1\n255\n" << char(255) << char(0)
                                                        << char(0);
    const GrayFrame red = frame_from_raster(read_pnm(dir.path / "c.ppm"));
    CHECK(red.at(0, 0) == doctest::Approx(0.299));

    std::ofstream(dir.path / "t.pgm", std::ios::binary) << "P5\n4 4\n255\nxx";
    CHECK_THROWS_AS(read_pnm(dir.path / "t.pgm"), DataError);
    std::ofstream(dir.path / "p2.pgm", std::ios::binary) << "P2\n1 1\n255\n0\n";
    CHECK_THROWS_AS(read_pnm(dir.path / "p2.pgm"), DataError);
    CHECK_THROWS_AS(read_pnm(dir.path / "missing.pgm"), DataError);
}

TEST_CASE("frame validation") {
    GrayFrame f(4, 4);
    CHECK_NOTHROW(validate(f));
    f.data[3] = 1.5f;
    CHECK_THROWS_AS(validate(f), DataError);
    f.data[3] = 0.5f;
    f.data.pop_back();
    CHECK_THROWS_AS(validate(f), DataError);
}

TEST_CASE("mask raster conversion") {
    MorMask m(3, 1, 2, 5);
    m.set(1, 0, true);
    const Raster8 r = raster_from_mask(m);
    CHECK(r.pixels == std::vector<std::uint8_t>{0, 255, 0});
    Raster8 odd{3, 1, 1, {0, 7, 0}};
    CHECK(mask_from_raster(odd, 2, 5).bits == m.bits);
    CHECK(m.foreground_count() == 1);
}

TEST_CASE("generated dataset loads back with identical pixels and labels") {
    TempDir dir("roundtrip");
    const SynthConfig cfg = small_config();
    const SyntheticScene scene = render_synthetic(cfg, 4);
    write_dataset(scene, dir.path);
    const Dataset ds = load_dataset(dir.path);
    CHECK(ds.frames.size() == 10);
    CHECK(ds.manifest.pickers == std::vector<int>{0, 1});
    REQUIRE(ds.frames.size() == scene.frames.size());
    for (std::size_t i = 0; i < ds.frames.size(); ++i)
        CHECK(ds.frames[i].data == scene.frames[i].data);
    for (const auto& [key, mask] : scene.masks)
        CHECK(ds.masks.at(key).bits == mask.bits);
    CHECK(ds.manifest.truth == scene.truth);
    CHECK(ds.manifest.fps == cfg.fps);
    // the manifest file itself is accepted as the path
    CHECK(load_dataset(dir.path / kManifestName).frames.size() == 10);
}

TEST_CASE("missing mask file names the frame and picker") {
    TempDir dir("missing_mask");
    generate_synthetic(small_config(), 1, dir.path);
    fs::remove(dir.path / "masks" / "picker_01" / "mask_00003.pgm");
    try {
        load_dataset(dir.path);
        FAIL("expected a DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("frame 3") != std::string::npos);
        CHECK(msg.find("picker 1") != std::string::npos);
    }
}

TEST_CASE("mask size mismatch is a dimension error") {
    TempDir dir("mask_size");
    generate_synthetic(small_config(), 1, dir.path);
    write_pgm(dir.path / "masks" / "picker_00" / "mask_00002.pgm", Raster8{32, 24, 1, std::vector<std::uint8_t>(768)});
    CHECK_THROWS_AS(load_dataset(dir.path), DimensionError);
}

TEST_CASE("manifest validation") {
    TempDir dir("manifest");
    const auto write = [&](const std::string& text) { std::ofstream(dir.path / kManifestName) << text; };
    write("not json");
    CHECK_THROWS_AS(read_manifest(dir.path), DataError);
    write(R"({"format":"pickact-dataset","fps":0,"pickers":[],"frames":[],"masks":[]})");
    CHECK_THROWS_AS(read_manifest(dir.path), DataError);
    write(R"({"format":"pickact-dataset","fps":10,"pickers":[0],
              "frames":[{"index":0,"file":"a.pgm"},{"index":2,"file":"b.pgm"}],"masks":[]})");
    CHECK_THROWS_AS(read_manifest(dir.path), DataError);
    write(R"({"format":"pickact-dataset","fps":10,"pickers":[0],
              "frames":[{"index":0,"file":"a.pgm"}],"masks":[{"frame":4,"picker":0,"file":"m.pgm"}]})");
    CHECK_THROWS_AS(read_manifest(dir.path), DataError);
    write(R"({"format":"pickact-dataset","fps":10,"pickers":[0],
              "frames":[{"index":0,"file":"a.pgm"}],"masks":[],"truth":{"0":["P","P"]}})");
    CHECK_THROWS_AS(read_manifest(dir.path), DataError);
    write(R"({"format":"pickact-dataset","fps":10,"pickers":[0],
              "frames":[{"index":0,"file":"a.pgm"}],"masks":[]})");
    CHECK_THROWS_AS(load_dataset(dir.path), DataError);  // frame file absent
}

TEST_CASE("synthetic rendering is deterministic per seed") {
    const SynthConfig cfg = small_config(8);
    const SyntheticScene a = render_synthetic(cfg, 9), b = render_synthetic(cfg, 9), c = render_synthetic(cfg, 10);
    for (std::size_t i = 0; i < a.frames.size(); ++i)
        CHECK(a.frames[i].data == b.frames[i].data);
    bool differs = false;
    for (std::size_t i = 0; i < a.frames.size(); ++i)
        differs = differs || a.frames[i].data != c.frames[i].data;
    CHECK(differs);

    TempDir d1("det1"), d2("det2");
    generate_synthetic(cfg, 9, d1.path);
    generate_synthetic(cfg, 9, d2.path);
    for (const auto& entry : fs::recursive_directory_iterator(d1.path)) {
        if (!entry.is_regular_file())
            continue;
        const fs::path rel = fs::relative(entry.path(), d1.path);
        CHECK(slurp(entry.path()) == slurp(d2.path / rel));
    }
}

TEST_CASE("occluded frames have empty masks but keep their truth") {
    SynthConfig cfg = small_config(12);
    cfg.occlusions = {{1, 3, 6}};
    const SyntheticScene s = render_synthetic(cfg, 2);
    for (int f = 0; f < 12; ++f) {
        const bool hidden = f >= 3 && f < 6;
        CHECK(s.masks.at({f, 1}).empty() == hidden);
        CHECK_FALSE(s.masks.at({f, 0}).empty());
    }
    CHECK(s.truth.at(1)[4] == FlClass::NotPicking);
    CHECK(s.truth.at(1)[7] == FlClass::Picking);
    
}

TEST_CASE("synthetic config validation") {
    SynthConfig cfg = small_config();
    CHECK_NOTHROW(validate(cfg));
    cfg.pickers[0][0].start_frame = 2;  // schedule gap at frame 0
    CHECK_THROWS_AS(validate(cfg), DataError);
    cfg = small_config();
    cfg.noise_sigma = -1.0;
    CHECK_THROWS_AS(validate(cfg), DataError);
    cfg = small_config();
    cfg.occlusions = {{0, 5, 20}};
    CHECK_THROWS_AS(validate(cfg), DataError);
    cfg = small_config();
    cfg.occlusions = {{7, 1, 2}};
    CHECK_THROWS_AS(validate(cfg), DataError);
    CHECK_THROWS_AS(mixed_scene_config(100, 2, 1, 0, 5), DataError);
    CHECK_THROWS_AS(parse_activity("dancing"), DataError);
}

TEST_CASE("synthetic config json round trip") {
    SynthConfig cfg = mixed_scene_config(90, 3, 5, 10, 30);
    add_random_occlusions(cfg, 0.1, 5);
    cfg.noise_sigma = 0.05;
    cfg.blur_radius = 1;
    const SynthConfig back = synth_config_from_json(synth_config_to_json(cfg));
    CHECK(synth_config_to_json(back) == synth_config_to_json(cfg));
    CHECK_THROWS_AS(synth_config_from_json("{\"pickers\": 3}"), DataError);
}

TEST_CASE("mixed schedules alternate and occlusions cover the requested share") {
    SynthConfig cfg = mixed_scene_config(600, 2, 7, 25, 70);
    REQUIRE(cfg.pickers.size() == 2);
    for (const auto& sched : cfg.pickers) {
        CHECK(sched.front().start_frame == 0);
        for (std::size_t i = 1; i < sched.size(); ++i) {
            CHECK(sched[i].activity != sched[i - 1].activity);
            const int len = sched[i].start_frame - sched[i - 1].start_frame;
            CHECK(len >= 25);
            CHECK(len <= 70);
        }
    }
    add_random_occlusions(cfg, 0.1, 7);
    for (int p = 0; p < 2; ++p) {
        int covered = 0;
        for (const auto& o : cfg.occlusions)
            if (o.picker == p)
                covered += o.end - o.start;
        CHECK(covered == 60);
    }
    CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("config parsing") {
    const AppConfig d = config_from_json("{}");
    CHECK(d.pipeline.window == 5);
    CHECK(d.calibration.kmeans.seed == 42);
    CHECK(d.pipeline.flow.levels == 3);
    const AppConfig c = config_from_json(
        R"({"scene":{"frame_count":120,"noise_sigma":0.05},"flow":{"levels":2},"window":3,"kmeans":{"restarts":5}})");
    CHECK(c.scene.frame_count == 120);
    CHECK(c.scene.noise_sigma == 0.05);
    CHECK(c.pipeline.flow.levels == 2);
    CHECK(c.pipeline.window == 3);
    CHECK(c.calibration.kmeans.restarts == 5);
    CHECK(config_from_json(config_to_json(c)).scene.frame_count == 120);
    CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));

    CHECK_THROWS_AS(config_from_json(R"({"windw":3})"), DataError);
    CHECK_THROWS_AS(config_from_json(R"({"flow":{"levels":0}})"), DataError);
    CHECK_THROWS_AS(config_from_json(R"({"window":"five"})"), DataError);
    CHECK_THROWS_AS(config_from_json(R"({"window":0})"), DataError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), DataError);

    const AppConfig s = config_from_json(R"({"synth":)" + synth_config_to_json(small_config()) + "}");
    REQUIRE(s.synth.has_value());
    CHECK(s.synth->pickers.size() == 2);
}

TEST_CASE("build_scene applies scene options") {
    SceneOptions o;
    o.frame_count = 100;
    o.picker_count = 3;
    o.noise_sigma = 0.1;
    o.blur_radius = 2;
    o.occlusion_fraction = 0.1;
    const SynthConfig cfg = build_scene(o, 3);
    CHECK(cfg.pickers.size() == 3);
    CHECK(cfg.noise_sigma == 0.1);
    CHECK(cfg.blur_radius == 2);
    CHECK_FALSE(cfg.occlusions.empty());
    o.occlusion_fraction = 1.5;
    CHECK_THROWS_AS(build_scene(o, 3), DataError);
}
