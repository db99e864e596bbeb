#include "drgen/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "drgen/errors.hpp"

namespace drgen {

namespace {

void put(Frame& f, int x, int y, const Rgb8& c) {
  const std::size_t i = (static_cast<std::size_t>(y) * f.width + x) * 3;
  f.rgb[i] = c[0];
  f.rgb[i + 1] = c[1];
  f.rgb[i + 2] = c[2];
}

Rgb8 random_color(RandomStream& s) {
  return {static_cast<std::uint8_t>(s.next_int(0, 255)), static_cast<std::uint8_t>(s.next_int(0, 255)),
          static_cast<std::uint8_t>(s.next_int(0, 255))};
}

}  // namespace

void fill_rect(Frame& frame, const RectCutout& r, const Rgb8& color) {
  const int x0 = std::clamp(r.x0, 0, frame.width);
  const int x1 = std::clamp(r.x1, 0, frame.width);
  const int y0 = std::clamp(r.y0, 0, frame.height);
  const int y1 = std::clamp(r.y1, 0, frame.height);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) put(frame, x, y, color);
  }
}

void fill_circle(Frame& frame, const CircleCutout& c, const Rgb8& color) {
  const int x0 = std::max(0, static_cast<int>(std::floor(c.cx - c.radius)));
  const int x1 = std::min(frame.width - 1, static_cast<int>(std::ceil(c.cx + c.radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(c.cy - c.radius)));
  const int y1 = std::min(frame.height - 1, static_cast<int>(std::ceil(c.cy + c.radius)));
  const double r2 = c.radius * c.radius;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x + 0.5 - c.cx;
      const double dy = y + 0.5 - c.cy;
      if (dx * dx + dy * dy <= r2) put(frame, x, y, color);
    }
  }
}

void fill_line(Frame& frame, const LineCutout& l, const Rgb8& color) {
  const double half = l.thickness / 2.0;
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(l.x0, l.x1) - half)));
  const int x1 = std::min(frame.width - 1, static_cast<int>(std::ceil(std::max(l.x0, l.x1) + half)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(l.y0, l.y1) - half)));
  const int y1 = std::min(frame.height - 1, static_cast<int>(std::ceil(std::max(l.y0, l.y1) + half)));
  const double dx = l.x1 - l.x0;
  const double dy = l.y1 - l.y0;
  const double len2 = dx * dx + dy * dy;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double px = x + 0.5 - l.x0;
      const double py = y + 0.5 - l.y0;
      const double t = len2 > 0.0 ? std::clamp((px * dx + py * dy) / len2, 0.0, 1.0) : 0.0;
      const double ex = px - t * dx;
      const double ey = py - t * dy;
      if (ex * ex + ey * ey <= half * half) put(frame, x, y, color);
    }
  }
}

void pepper_salt(Frame& frame, double rate, RandomStream& stream) {
  if (rate <= 0.0) return;
  for (auto& channel : frame.rgb) {
    if (stream.next_unit() < rate) channel = (stream.next_u64() >> 63) ? 255 : 0;
  }
}

std::vector<double> gaussian_kernel(int size) {
  if (size < 1 || size % 2 == 0) throw ValidationError("blur kernel size must be odd and positive");
  const double sigma = size / 3.0;
  const int half = size / 2;
  std::vector<double> k(static_cast<std::size_t>(size));
  double sum = 0.0;
  for (int i = -half; i <= half; ++i) {
    k[i + half] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[i + half];
  }
  for (auto& w : k) w /= sum;
  return k;
}

void gaussian_blur(Frame& frame, int kernel_size) {
  if (!frame.has_rgb()) return;
  const auto k = gaussian_kernel(kernel_size);
  const int half = kernel_size / 2;
  const int W = frame.width;
  const int H = frame.height;
  std::vector<double> tmp(frame.rgb.size());
  for (int y = 0; y < H; ++y) {
    const std::uint8_t* row = frame.rgb.data() + static_cast<std::size_t>(y) * W * 3;
    for (int x = 0; x < W; ++x) {
      double acc[3] = {0.0, 0.0, 0.0};
      for (int i = -half; i <= half; ++i) {
        const int xs = std::clamp(x + i, 0, W - 1);
        for (int c = 0; c < 3; ++c) acc[c] += k[i + half] * row[xs * 3 + c];
      }
      for (int c = 0; c < 3; ++c) tmp[(static_cast<std::size_t>(y) * W + x) * 3 + c] = acc[c];
    }
  }
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      double acc[3] = {0.0, 0.0, 0.0};
      for (int i = -half; i <= half; ++i) {
        const int ys = std::clamp(y + i, 0, H - 1);
        for (int c = 0; c < 3; ++c) acc[c] += k[i + half] * tmp[(static_cast<std::size_t>(ys) * W + x) * 3 + c];
      }
      for (int c = 0; c < 3; ++c) {
        frame.rgb[(static_cast<std::size_t>(y) * W + x) * 3 + c] =
            static_cast<std::uint8_t>(std::clamp(std::lround(acc[c]), 0L, 255L));
      }
    }
  }
}

void apply_postprocess(Frame& frame, const PostprocessConfig& cfg, RandomStream& stream) {
  if (!frame.has_rgb()) return;
  const double W = frame.width;
  const double H = frame.height;

  const int rects = static_cast<int>(stream.next_int(cfg.cutout_rect_count.lo, cfg.cutout_rect_count.hi));
  for (int i = 0; i < rects; ++i) {
    const double cx = stream.next_uniform(0.0, W);
    const double cy = stream.next_uniform(0.0, H);
    const double w = stream.next_uniform(cfg.cutout_size.lo, cfg.cutout_size.hi) * W;
    const double h = stream.next_uniform(cfg.cutout_size.lo, cfg.cutout_size.hi) * H;
    const Rgb8 color = random_color(stream);
    fill_rect(frame,
              {static_cast<int>(std::lround(cx - w / 2)), static_cast<int>(std::lround(cy - h / 2)),
               static_cast<int>(std::lround(cx + w / 2)), static_cast<int>(std::lround(cy + h / 2))},
              color);
  }

  const int circles = static_cast<int>(stream.next_int(cfg.cutout_circle_count.lo, cfg.cutout_circle_count.hi));
  for (int i = 0; i < circles; ++i) {
    const double cx = stream.next_uniform(0.0, W);
    const double cy = stream.next_uniform(0.0, H);
    const double r = stream.next_uniform(cfg.cutout_size.lo, cfg.cutout_size.hi) * std::min(W, H) / 2.0;
    const Rgb8 color = random_color(stream);
    fill_circle(frame, {cx, cy, r}, color);
  }

  const int lines = static_cast<int>(stream.next_int(cfg.cutout_line_count.lo, cfg.cutout_line_count.hi));
  for (int i = 0; i < lines; ++i) {
    const double x0 = stream.next_uniform(0.0, W);
    const double y0 = stream.next_uniform(0.0, H);
    const double angle = stream.next_uniform(0.0, std::numbers::pi);
    const double len = stream.next_uniform(cfg.cutout_size.lo, cfg.cutout_size.hi) * std::max(W, H);
    const double thickness = stream.next_uniform(cfg.line_thickness.lo, cfg.line_thickness.hi);
    const Rgb8 color = random_color(stream);
    fill_line(frame, {x0, y0, x0 + len * std::cos(angle), y0 + len * std::sin(angle), thickness}, color);
  }

  if (stream.next_bernoulli(cfg.apply_pepper_prob)) pepper_salt(frame, cfg.pepper_rate, stream);

  const bool blur = stream.next_bernoulli(cfg.apply_blur_prob);
  if (blur && !cfg.blur_kernel_choices.empty()) {
    const auto pick = stream.next_int(0, static_cast<std::int64_t>(cfg.blur_kernel_choices.size()) - 1);
    gaussian_blur(frame, cfg.blur_kernel_choices[static_cast<std::size_t>(pick)]);
  }
}

}  // namespace drgen
