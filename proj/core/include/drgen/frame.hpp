#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "drgen/geometry.hpp"

namespace drgen {

// Linear color, channels in [0, 1].
using Color = std::array<double, 3>;
using Rgb8 = std::array<std::uint8_t, 3>;

inline constexpr Rgb8 kSkyColor{128, 178, 255};

std::uint8_t to_byte(double channel);
Rgb8 to_rgb8(const Color& c);

/// Rendered pixel buffers. rgb is row-major RGB triplets; depth is
/// row-major eye-space axial distance in meters, equal to the far plane
/// where nothing was hit. Either buffer may be empty.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
  std::vector<float> depth;

  bool has_rgb() const { return !rgb.empty(); }
  bool has_depth() const { return !depth.empty(); }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  Rgb8 pixel(int x, int y) const;
  void set_pixel(int x, int y, const Rgb8& c);

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// 8-bit RGB texture sampled with repeat wrapping and bilinear filtering.
struct Texture {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Rgb8 texel(int x, int y) const;
};

Texture solid_texture(const Rgb8& color, int width = 1, int height = 1);

struct LightModel {
  double ambient = 0.35;
  Vec3 direction{0.0, 0.0, 1.0};  // unit, from surface toward the light
  double intensity = 1.0;

  friend bool operator==(const LightModel&, const LightModel&) = default;
};

}  // namespace drgen
