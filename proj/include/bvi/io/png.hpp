#pragma once

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "bvi/core/tensor.hpp"

namespace bvi {
namespace io {

// 8-bit PNG I/O for (H,W,C) tensors with C = 1 (gray) or 3 (RGB), values in
// [0,1]. Quantization rounds to the nearest of 256 levels.
inline void write_png(const std::string& path, const Tensor& img) {
  if (img.ndim() != 3 || (img.dim(2) != 1 && img.dim(2) != 3))
    throw DimensionError("write_png: expected (H,W,1) or (H,W,3)");
  long H = img.dim(0), W = img.dim(1), C = img.dim(2);
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), std::fclose);
  if (!fp) throw IntegrityError("write_png: cannot open " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw IntegrityError("write_png: libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IntegrityError("write_png: libpng error on " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(W), static_cast<png_uint_32>(H), 8,
               C == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(static_cast<size_t>(W * C));
  for (long y = 0; y < H; ++y) {
    for (long i = 0; i < W * C; ++i) {
      double v = img[y * W * C + i];
      v = std::clamp(v, 0.0, 1.0);
      row[static_cast<size_t>(i)] = static_cast<png_byte>(std::lround(v * 255.0));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Reads any PNG as 8-bit gray or RGB (palette expanded, 16-bit narrowed,
// alpha dropped); returns (H,W,1) or (H,W,3) in [0,1].
inline Tensor read_png(const std::string& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "rb"), std::fclose);
  if (!fp) throw IntegrityError("read_png: cannot open " + path);
  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw IntegrityError("read_png: not a PNG file: " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw IntegrityError("read_png: libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IntegrityError("read_png: libpng error on " + path);
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  png_read_update_info(png, info);
  long H = static_cast<long>(png_get_image_height(png, info));
  long W = static_cast<long>(png_get_image_width(png, info));
  long C = static_cast<long>(png_get_channels(png, info));
  if (C != 1 && C != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IntegrityError("read_png: unsupported channel count in " + path);
  }
  std::vector<png_byte> buf(static_cast<size_t>(H * W * C));
  std::vector<png_bytep> rows(static_cast<size_t>(H));
  for (long y = 0; y < H; ++y) rows[static_cast<size_t>(y)] = buf.data() + y * W * C;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  Tensor out({H, W, C});
  for (long i = 0; i < out.size(); ++i) out[i] = static_cast<double>(buf[static_cast<size_t>(i)]) / 255.0;
  return out;
}

}  // namespace io
}  // namespace bvi
