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

// Ground-truth files: VOC-style indexed semantic masks, 8-bit saliency maps
// and RGB images.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "sdslab/error.hpp"
#include "sdslab/io/png.hpp"
#include "sdslab/mask.hpp"
#include "sdslab/net/tensor.hpp"

namespace sdslab::io {

inline constexpr Label kVocVoid = 255;

/// The 256-entry PASCAL VOC colour map.
inline std::vector<std::array<std::uint8_t, 3>> voc_palette() {
  std::vector<std::array<std::uint8_t, 3>> pal(256);
  for (unsigned i = 0; i < 256; ++i) {
    unsigned r = 0, g = 0, b = 0, c = i;
    for (int j = 0; j < 8; ++j) {
      r |= ((c >> 0) & 1u) << (7 - j);
      g |= ((c >> 1) & 1u) << (7 - j);
      b |= ((c >> 2) & 1u) << (7 - j);
      c >>= 3;
    }
    pal[i] = {std::uint8_t(r), std::uint8_t(g), std::uint8_t(b)};
  }
  return pal;
}

/// Decodes an indexed (palette) or gray PNG of category indices. Index 255 is
/// the VOC void label and becomes the mask's ignore label.
inline LabelMask decode_semantic_mask(const RawImage& img, std::size_t num_categories, const std::string& name) {
  if (img.format == PixelFormat::Rgb) {
    throw DomainError(name + ": semantic masks must be indexed or single-channel");
  }
  std::set<unsigned> bad;
  for (auto v : img.pixels) {
    if (v != kVocVoid && v > num_categories) bad.insert(v);
  }
  if (!bad.empty()) {
    std::string list;
    for (auto v : bad) list += (list.empty() ? "" : ", ") + std::to_string(v);
    throw DomainError(name + ": unknown label indices {" + list + "}");
  }
  return {img.width, img.height, std::vector<Label>(img.pixels.begin(), img.pixels.end()), num_categories,
          num_categories < kVocVoid ? std::optional<Label>(kVocVoid) : std::nullopt};
}

inline LabelMask load_semantic_mask(const std::filesystem::path& path, std::size_t num_categories = 20) {
  return decode_semantic_mask(read_png(path), num_categories, path.string());
}

inline SaliencyMap decode_saliency_map(const RawImage& img, const std::string& name) {
  if (img.format != PixelFormat::Gray) {
    throw DomainError(name + ": saliency maps must be single-channel 8-bit gray");
  }
  std::vector<double> v(img.pixels.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = double(img.pixels[i]) / 255.0;
  return {img.width, img.height, std::move(v)};
}

inline SaliencyMap load_saliency_map(const std::filesystem::path& path) {
  return decode_saliency_map(read_png(path), path.string());
}

/// Strict threshold: a pixel is set when its value exceeds `threshold`.
inline BinaryMask binarize(const SaliencyMap& sal, double threshold = 0.5) {
  detail::require(threshold >= 0.0 && threshold <= 1.0, "binarize: threshold must lie in [0, 1]");
  std::vector<std::uint8_t> bits(sal.size());
  for (std::size_t i = 0; i < sal.size(); ++i) bits[i] = sal[i] > threshold ? 1 : 0;
  return {sal.width(), sal.height(), std::move(bits)};
}

/// RGB (or gray, replicated) image as a (1, 3, H, W) tensor in [0, 1].
inline net::Tensor4 load_rgb_image(const std::filesystem::path& path) {
  const RawImage img = read_png(path);
  if (img.format == PixelFormat::Palette) throw DomainError(path.string() + ": expected an RGB or gray image");
  const std::size_t plane = img.width * img.height;
  net::Tensor4 t({1, 3, img.height, img.width});
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const std::uint8_t v = img.format == PixelFormat::Rgb ? img.pixels[i * 3 + c] : img.pixels[i];
      t[c * plane + i] = double(v) / 255.0;
    }
  }
  return t;
}

inline RawImage encode_semantic_mask(const LabelMask& m) {
  RawImage img{m.width(), m.height(), PixelFormat::Palette, {m.labels().begin(), m.labels().end()}, voc_palette()};
  return img;
}

inline void save_semantic_mask(const std::filesystem::path& path, const LabelMask& m) {
  write_png(path, encode_semantic_mask(m));
}

/// Quantises to 8 bits (round to nearest).
inline void save_saliency_map(const std::filesystem::path& path, const SaliencyMap& s) {
  RawImage img{s.width(), s.height(), PixelFormat::Gray, std::vector<std::uint8_t>(s.size()), {}};
  for (std::size_t i = 0; i < s.size(); ++i) img.pixels[i] = std::uint8_t(std::lround(s[i] * 255.0));
  write_png(path, img);
}

inline void save_rgb_image(const std::filesystem::path& path, const net::Tensor4& t) {
  const auto& s = t.shape();
  detail::require(s.n == 1 && s.c == 3, "save_rgb_image: expected a (1,3,H,W) tensor");
  const std::size_t plane = s.h * s.w;
  RawImage img{s.w, s.h, PixelFormat::Rgb, std::vector<std::uint8_t>(plane * 3), {}};
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const double v = std::clamp(t[c * plane + i], 0.0, 1.0);
      img.pixels[i * 3 + c] = std::uint8_t(std::lround(v * 255.0));
    }
  }
  write_png(path, img);
}

}  // namespace sdslab::io
