// Copyright 2026 The sdslab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// 8-bit PNG reading and writing on top of libpng. Palette images are decoded
// to their raw palette indices, never expanded to colour.

#pragma once

#include <png.h>

#include <array>
#include <csetjmp>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

#include "sdslab/error.hpp"

namespace sdslab::io {

enum class PixelFormat { Gray, Palette, Rgb };

struct RawImage {
  std::size_t width = 0;
  std::size_t height = 0;
  PixelFormat format = PixelFormat::Gray;
  std::vector<std::uint8_t> pixels;  // row-major; 3 bytes per pixel for Rgb
  std::vector<std::array<std::uint8_t, 3>> palette;

  std::size_t channels() const { return format == PixelFormat::Rgb ? 3 : 1; }
};

namespace png_impl {

struct Reader {
  const std::vector<std::uint8_t>* bytes = nullptr;
  std::size_t pos = 0;
  char message[256] = {};
  RawImage image;
  std::vector<png_bytep> rows;
};

inline void on_error(png_structp png, png_const_charp msg) {
  auto* r = static_cast<Reader*>(png_get_error_ptr(png));
  if (r) std::snprintf(r->message, sizeof r->message, "%s", msg);
  png_longjmp(png, 1);
}

inline void on_warning(png_structp, png_const_charp) {}

inline void read_bytes(png_structp png, png_bytep out, png_size_t n) {
  auto* r = static_cast<Reader*>(png_get_io_ptr(png));
  if (r->pos + n > r->bytes->size()) png_error(png, "unexpected end of file");
  std::memcpy(out, r->bytes->data() + r->pos, n);
  r->pos += n;
}

// Runs the libpng decode; returns false after a libpng error. Only the
// heap-allocated Reader is touched after setjmp.
inline bool decode(Reader* r) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, r, on_error, on_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, r, read_bytes);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (depth == 16) png_error(png, "16-bit images are not supported");
  if (depth < 8) png_set_packing(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_PALETTE) {
    r->image.format = PixelFormat::Palette;
    png_colorp pal = nullptr;
    int n = 0;
    if (png_get_PLTE(png, info, &pal, &n)) {
      for (int i = 0; i < n; ++i) r->image.palette.push_back({pal[i].red, pal[i].green, pal[i].blue});
    }
  } else if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    r->image.format = PixelFormat::Gray;
  } else {
    r->image.format = PixelFormat::Rgb;
  }
  png_read_update_info(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  if (stride != w * r->image.channels()) png_error(png, "unexpected row layout");
  r->image.width = w;
  r->image.height = h;
  r->image.pixels.assign(stride * h, 0);
  r->rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) r->rows[y] = r->image.pixels.data() + y * stride;
  png_read_image(png, r->rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

struct Writer {
  std::vector<std::uint8_t> out;
  char message[256] = {};
  std::vector<png_bytep> rows;
  std::vector<png_color> palette;
};

inline void on_write_error(png_structp png, png_const_charp msg) {
  auto* w = static_cast<Writer*>(png_get_error_ptr(png));
  if (w) std::snprintf(w->message, sizeof w->message, "%s", msg);
  png_longjmp(png, 1);
}

inline void write_bytes(png_structp png, png_bytep data, png_size_t n) {
  auto* w = static_cast<Writer*>(png_get_io_ptr(png));
  w->out.insert(w->out.end(), data, data + n);
}

inline void flush_noop(png_structp) {}

inline bool encode(Writer* w, const RawImage* img) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, w, on_write_error, on_warning);
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
  png_set_write_fn(png, w, write_bytes, flush_noop);
  const int color = img->format == PixelFormat::Rgb       ? PNG_COLOR_TYPE_RGB
                    : img->format == PixelFormat::Palette ? PNG_COLOR_TYPE_PALETTE
                                                          : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(png, info, png_uint_32(img->width), png_uint_32(img->height), 8, color, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  if (img->format == PixelFormat::Palette) {
    for (const auto& c : img->palette) w->palette.push_back({c[0], c[1], c[2]});
    png_set_PLTE(png, info, w->palette.data(), int(w->palette.size()));
  }
  png_set_compression_level(png, 9);
  png_write_info(png, info);
  const std::size_t stride = img->width * img->channels();
  w->rows.resize(img->height);
  for (std::size_t y = 0; y < img->height; ++y) {
    w->rows[y] = const_cast<png_bytep>(img->pixels.data() + y * stride);
  }
  png_write_image(png, w->rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace png_impl

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline RawImage decode_png(const std::vector<std::uint8_t>& bytes, const std::string& name = "<memory>") {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw IoError(name + ": not a PNG file");
  auto reader = std::make_unique<png_impl::Reader>();
  reader->bytes = &bytes;
  if (!png_impl::decode(reader.get())) {
    throw IoError(name + ": " + (reader->message[0] ? reader->message : "PNG decode failed"));
  }
  return std::move(reader->image);
}

inline RawImage read_png(const std::filesystem::path& path) { return decode_png(read_file(path), path.string()); }

inline std::vector<std::uint8_t> encode_png(const RawImage& img) {
  if (img.pixels.size() != img.width * img.height * img.channels()) {
    throw DomainError("encode_png: pixel buffer does not match dimensions");
  }
  if (img.format == PixelFormat::Palette && (img.palette.empty() || img.palette.size() > 256)) {
    throw DomainError("encode_png: palette must hold 1..256 entries");
  }
  auto writer = std::make_unique<png_impl::Writer>();
  if (!png_impl::encode(writer.get(), &img)) {
    throw IoError(std::string("PNG encode failed: ") + writer->message);
  }
  return std::move(writer->out);
}

inline void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

inline void write_png(const std::filesystem::path& path, const RawImage& img) { write_file(path, encode_png(img)); }

}  // namespace sdslab::io
