#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "drgen/frame.hpp"

namespace drgen {

enum class ImageKind { Rgb, Depth16 };

/// Depth in meters to the stored 16-bit value: round(m * 1000), clamped to
/// [0, 65535].
std::uint16_t depth_to_millimeters(double depth_m);

/// Rgb: 8-bit RGB PNG. Depth16: 16-bit grayscale PNG in millimeters.
/// Throws ValidationError when the frame lacks the channel, IoError on
/// write failure.
void write_image(const Frame& frame, const std::filesystem::path& path, ImageKind kind);

/// Decoded PNG samples, row-major, `channels` per pixel, 8 or 16 bit.
struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;
};

PngImage read_png(const std::filesystem::path& path);

/// Any PNG, converted to 8-bit RGB.
Texture load_texture(const std::filesystem::path& path);

/// PNG files of a directory in sorted filename order.
std::vector<std::filesystem::path> list_textures(const std::filesystem::path& dir);

}  // namespace drgen
