#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pickact {

/// Single-channel frame, row-major, intensities in [0, 1].
struct GrayFrame {
    int width = 0;
    int height = 0;
    std::vector<float> data;
    int frame_index = 0;

    GrayFrame() = default;
    GrayFrame(int w, int h, int index = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0.0f), frame_index(index) {}

    float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return data.size(); }
};

/// Throws DataError when dimensions, length or intensity range are wrong.
void validate(const GrayFrame& frame);

/// Moving Object Region: foreground pixels of one picker in one frame.
struct MorMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // 0 or 1
    int picker_id = 0;
    int frame_index = 0;

    MorMask() = default;
    MorMask(int w, int h, int picker, int index)
        : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0), picker_id(picker),
          frame_index(index) {}

    bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    std::size_t foreground_count() const;
    bool empty() const { return foreground_count() == 0; }
};

/// 8-bit raster as stored on disk (PGM: 1 channel, PPM: 3 channels).
struct Raster8 {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;
};

Raster8 read_pnm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Raster8& raster);

/// Luma conversion (0.299, 0.587, 0.114) of interleaved RGB8.
GrayFrame gray_from_rgb(std::span<const std::uint8_t> rgb, int width, int height, int frame_index = 0);

GrayFrame frame_from_raster(const Raster8& raster, int frame_index = 0);
Raster8 raster_from_frame(const GrayFrame& frame);

/// Masks are stored 0 = background, 255 = foreground; any nonzero byte reads as foreground.
MorMask mask_from_raster(const Raster8& raster, int picker_id, int frame_index);
Raster8 raster_from_mask(const MorMask& mask);

}  // namespace pickact
