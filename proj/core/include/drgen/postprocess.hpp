#pragma once

#include <vector>

#include "drgen/config.hpp"
#include "drgen/frame.hpp"
#include "drgen/rng.hpp"

namespace drgen {

/// Pixels [x0, x1) x [y0, y1); may extend past the image.
struct RectCutout {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

/// Pixels whose center lies within `radius` of (cx, cy).
struct CircleCutout {
  double cx = 0.0, cy = 0.0, radius = 0.0;
};

/// Pixels whose center lies within thickness / 2 of the segment.
struct LineCutout {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0, thickness = 1.0;
};

void fill_rect(Frame& frame, const RectCutout& rect, const Rgb8& color);
void fill_circle(Frame& frame, const CircleCutout& circle, const Rgb8& color);
void fill_line(Frame& frame, const LineCutout& line, const Rgb8& color);

/// Each channel of each pixel, independently with probability `rate`, is
/// replaced by 0 or 255 (fair coin). Two draws per channel, row-major,
/// channels in R, G, B order: the rate test, then the coin only when the
/// channel flips.
void pepper_salt(Frame& frame, double rate, RandomStream& stream);

/// Normalized 1-D Gaussian with sigma = size / 3.
std::vector<double> gaussian_kernel(int size);

/// Separable Gaussian blur with clamp-to-edge borders, rounded to 8 bits.
void gaussian_blur(Frame& frame, int kernel_size);

/// Noise chain in fixed order: rectangle, circle and line cutouts,
/// pepper-and-salt, Gaussian blur. Only RGB is touched; depth is left as is.
void apply_postprocess(Frame& frame, const PostprocessConfig& cfg, RandomStream& stream);

}  // namespace drgen
