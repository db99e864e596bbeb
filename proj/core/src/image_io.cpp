#include "drgen/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <memory>

#include "drgen/errors.hpp"

namespace drgen {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

constexpr std::size_t kErrLen = 128;

// Keeps libpng quiet; the message ends up in the thrown exception instead.
[[noreturn]] void on_png_error(png_structp png, png_const_charp msg) {
  if (auto* buf = static_cast<char*>(png_get_error_ptr(png))) std::snprintf(buf, kErrLen, "%s", msg);
  png_longjmp(png, 1);
}
void on_png_warning(png_structp, png_const_charp) {}

// No objects with destructors may live in this frame: libpng reports
// errors through longjmp.
bool encode_png(std::FILE* fp, int width, int height, int bit_depth, int color_type,
                png_bytep* rows, char* err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, err, on_png_error, on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_compression_level(png, 3);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

struct Decoded {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int channels = 0;
  int bit_depth = 0;
};

bool decode_png(std::FILE* fp, bool force_rgb8, Decoded* out, std::vector<png_byte>* buffer, char* err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, err, on_png_error, on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  png_bytep* rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    std::free(rows);
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (force_rgb8) {
    if (depth == 16) png_set_strip_16(png);
    png_set_strip_alpha(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  }
  png_read_update_info(png, info);
  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->channels = png_get_channels(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  const png_size_t stride = png_get_rowbytes(png, info);
  buffer->resize(stride * out->height);
  rows = static_cast<png_bytep*>(std::malloc(sizeof(png_bytep) * out->height));
  if (!rows) png_error(png, "out of memory");
  for (png_uint_32 y = 0; y < out->height; ++y) rows[y] = buffer->data() + y * stride;
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  std::free(rows);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr fp(std::fopen(path.c_str(), mode));
  if (!fp) throw IoError("cannot open " + path.string());
  return fp;
}

}  // namespace

std::uint16_t depth_to_millimeters(double depth_m) {
  const double mm = std::round(depth_m * 1000.0);
  return static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
}

void write_image(const Frame& frame, const std::filesystem::path& path, ImageKind kind) {
  const int W = frame.width;
  const int H = frame.height;
  std::vector<png_byte> bytes;
  int bit_depth = 8;
  int color_type = PNG_COLOR_TYPE_RGB;
  std::size_t stride = 0;
  if (kind == ImageKind::Rgb) {
    if (!frame.has_rgb()) throw ValidationError("frame has no RGB channels");
    bytes.assign(frame.rgb.begin(), frame.rgb.end());
    stride = static_cast<std::size_t>(W) * 3;
  } else {
    if (!frame.has_depth()) throw ValidationError("frame has no depth channel");
    bit_depth = 16;
    color_type = PNG_COLOR_TYPE_GRAY;
    stride = static_cast<std::size_t>(W) * 2;
    bytes.resize(stride * H);
    for (std::size_t i = 0; i < frame.depth.size(); ++i) {
      const std::uint16_t mm = depth_to_millimeters(frame.depth[i]);
      bytes[i * 2] = static_cast<png_byte>(mm >> 8);  // PNG is big-endian
      bytes[i * 2 + 1] = static_cast<png_byte>(mm & 0xFF);
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(H));
  for (int y = 0; y < H; ++y) rows[y] = bytes.data() + y * stride;

  FilePtr fp = open_file(path, "wb");
  char err[kErrLen] = "";
  if (!encode_png(fp.get(), W, H, bit_depth, color_type, rows.data(), err)) {
    throw IoError("PNG encoding failed for " + path.string() + ": " + err);
  }
  if (std::fflush(fp.get()) != 0) throw IoError("write failed for " + path.string());
}

PngImage read_png(const std::filesystem::path& path) {
  FilePtr fp = open_file(path, "rb");
  Decoded d;
  std::vector<png_byte> buffer;
  char err[kErrLen] = "";
  if (!decode_png(fp.get(), false, &d, &buffer, err)) {
    throw IoError("cannot decode PNG " + path.string() + ": " + err);
  }
  PngImage img;
  img.width = static_cast<int>(d.width);
  img.height = static_cast<int>(d.height);
  img.channels = d.channels;
  img.bit_depth = d.bit_depth;
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
  img.samples.resize(n);
  if (d.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      img.samples[i] = static_cast<std::uint16_t>((buffer[i * 2] << 8) | buffer[i * 2 + 1]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) img.samples[i] = buffer[i];
  }
  return img;
}

Texture load_texture(const std::filesystem::path& path) {
  FilePtr fp = open_file(path, "rb");
  Decoded d;
  std::vector<png_byte> buffer;
  char err[kErrLen] = "";
  if (!decode_png(fp.get(), true, &d, &buffer, err) || d.channels != 3) {
    throw IoError("cannot decode texture " + path.string() + (*err ? std::string(": ") + err : ""));
  }
  Texture t;
  t.width = static_cast<int>(d.width);
  t.height = static_cast<int>(d.height);
  t.pixels.assign(buffer.begin(), buffer.end());
  if (t.width < 1 || t.height < 1) throw ValidationError("empty texture " + path.string());
  return t;
}

std::vector<std::filesystem::path> list_textures(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") out.push_back(entry.path());
  }
  if (ec) throw IoError("cannot list texture directory " + dir.string());
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  return out;
}

}  // namespace drgen
