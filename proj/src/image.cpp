#include "pickact/image.hpp"

#include "pickact/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace pickact {

void validate(const GrayFrame& frame) {
    if (frame.width <= 0 || frame.height <= 0)
        throw DataError("frame " + std::to_string(frame.frame_index) + ": non-positive dimensions");
    if (frame.data.size() != static_cast<std::size_t>(frame.width) * frame.height)
        throw DataError("frame " + std::to_string(frame.frame_index) + ": data length does not match width*height");
    for (float v : frame.data) {
        if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
            throw DataError("frame " + std::to_string(frame.frame_index) + ": intensity outside [0,1]");
    }
}

std::size_t MorMask::foreground_count() const {
    return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    char c;
    while (in.get(c)) {
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!tok.empty())
                return tok;
            continue;
        }
        tok.push_back(c);
    }
    return tok;
}

int parse_positive(const std::string& tok, const std::filesystem::path& path) {
    try {
        std::size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used == tok.size() && v > 0)
            return v;
    } catch (const std::exception&) {
    }
    throw DataError("malformed PNM header in " + path.string());
}

}  // namespace

Raster8 read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open image " + path.string());
    const std::string magic = next_token(in);
    Raster8 r;
    if (magic == "P5")
        r.channels = 1;
    else if (magic == "P6")
        r.channels = 3;
    else
        throw DataError("unsupported image format in " + path.string() + " (expected binary PGM/PPM)");
    r.width = parse_positive(next_token(in), path);
    r.height = parse_positive(next_token(in), path);
    const int maxval = parse_positive(next_token(in), path);
    if (maxval != 255)
        throw DataError("only 8-bit images are supported: " + path.string());
    // next_token consumed exactly one whitespace byte after maxval
    r.pixels.resize(static_cast<std::size_t>(r.width) * r.height * r.channels);
    in.read(reinterpret_cast<char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(r.pixels.size()))
        throw DataError("truncated image data in " + path.string());
    return r;
}

void write_pgm(const std::filesystem::path& path, const Raster8& raster) {
    if (raster.channels != 1)
        throw DataError("write_pgm expects a single-channel raster");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write image " + path.string());
    out << "P5\n" << raster.width << ' ' << raster.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(raster.pixels.data()), static_cast<std::streamsize>(raster.pixels.size()));
    if (!out)
        throw DataError("failed writing image " + path.string());
}

GrayFrame gray_from_rgb(std::span<const std::uint8_t> rgb, int width, int height, int frame_index) {
    if (width <= 0 || height <= 0 || rgb.size() != static_cast<std::size_t>(width) * height * 3)
        throw DimensionError("RGB buffer does not match " + std::to_string(width) + "x" + std::to_string(height));
    GrayFrame f(width, height, frame_index);
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        const double y = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
        f.data[i] = static_cast<float>(std::clamp(y / 255.0, 0.0, 1.0));
    }
    return f;
}

GrayFrame frame_from_raster(const Raster8& raster, int frame_index) {
    if (raster.channels == 3)
        return gray_from_rgb(raster.pixels, raster.width, raster.height, frame_index);
    GrayFrame f(raster.width, raster.height, frame_index);
    for (std::size_t i = 0; i < f.data.size(); ++i)
        f.data[i] = static_cast<float>(raster.pixels[i] / 255.0);
    return f;
}

Raster8 raster_from_frame(const GrayFrame& frame) {
    Raster8 r{frame.width, frame.height, 1, std::vector<std::uint8_t>(frame.data.size())};
    for (std::size_t i = 0; i < frame.data.size(); ++i)
        r.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(frame.data[i], 0.0f, 1.0f) * 255.0f));
    return r;
}

MorMask mask_from_raster(const Raster8& raster, int picker_id, int frame_index) {
    if (raster.channels != 1)
        throw DataError("mask images must be single-channel");
    MorMask m(raster.width, raster.height, picker_id, frame_index);
    for (std::size_t i = 0; i < m.bits.size(); ++i)
        m.bits[i] = raster.pixels[i] != 0 ? 1 : 0;
    return m;
}

Raster8 raster_from_mask(const MorMask& mask) {
    Raster8 r{mask.width, mask.height, 1, std::vector<std::uint8_t>(mask.bits.size())};
    for (std::size_t i = 0; i < mask.bits.size(); ++i)
        r.pixels[i] = mask.bits[i] ? 255 : 0;
    return r;
}

}  // namespace pickact
