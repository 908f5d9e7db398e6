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

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "sdslab/io/manifest.hpp"
#include "sdslab/io/masks.hpp"
#include "sdslab/io/png.hpp"
#include "sdslab/io/synthetic.hpp"

namespace sdslab::io {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

TEST(Palette, VocColours) {
  const auto pal = voc_palette();
  EXPECT_EQ(pal[0], (std::array<std::uint8_t, 3>{0, 0, 0}));
  EXPECT_EQ(pal[1], (std::array<std::uint8_t, 3>{128, 0, 0}));
  EXPECT_EQ(pal[15], (std::array<std::uint8_t, 3>{192, 128, 128}));
  EXPECT_EQ(pal[255], (std::array<std::uint8_t, 3>{224, 224, 192}));
}

TEST(Png, SemanticMaskRoundTrip) {
  TempDir dir("sdslab_io_sem");
  std::mt19937_64 rng(1);
  const LabelMask m = oracle::random_label_mask(rng, 13, 7, 20);
  save_semantic_mask(dir.path() / "m.png", m);
  const RawImage raw = read_png(dir.path() / "m.png");
  EXPECT_EQ(raw.format, PixelFormat::Palette);
  const LabelMask back = load_semantic_mask(dir.path() / "m.png");
  EXPECT_TRUE(std::equal(m.labels().begin(), m.labels().end(), back.labels().begin(), back.labels().end()));
  EXPECT_EQ(back.width(), 13u);
  EXPECT_EQ(back.height(), 7u);
}

TEST(Png, PersonIndexDecodesToPerson) {
  const RawImage img{2, 1, PixelFormat::Palette, {15, 255}, voc_palette()};
  const LabelMask m = decode_semantic_mask(decode_png(encode_png(img)), 20, "x");
  EXPECT_EQ(CategoryTaxonomy::voc().name(m[0]), "person");
  EXPECT_TRUE(m.is_ignored(1));
}

TEST(Png, UnknownIndicesAreListed) {
  const RawImage img{3, 1, PixelFormat::Gray, {1, 40, 22}, {}};
  try {
    decode_semantic_mask(img, 20, "bad.png");
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("{22, 40}"), std::string::npos) << e.what();
  }
  const RawImage rgb{1, 1, PixelFormat::Rgb, {1, 2, 3}, {}};
  EXPECT_THROW(decode_semantic_mask(rgb, 20, "rgb.png"), DomainError);
}

TEST(Png, SaliencyRoundTripOnGrid) {
  TempDir dir("sdslab_io_sal");
  std::vector<double> v;
  for (int k = 0; k < 256; ++k) v.push_back(k / 255.0);
  const SaliencyMap s(16, 16, v);
  save_saliency_map(dir.path() / "s.png", s);
  const SaliencyMap back = load_saliency_map(dir.path() / "s.png");
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(back[i], s[i]);
}

TEST(Png, SaliencyValueScaling) {
  const RawImage img{1, 1, PixelFormat::Gray, {128}, {}};
  EXPECT_DOUBLE_EQ(decode_saliency_map(img, "x")[0], 128.0 / 255.0);
}

TEST(Png, MultiChannelSaliencyIsRejected) {
  const RawImage rgb{1, 1, PixelFormat::Rgb, {1, 2, 3}, {}};
  EXPECT_THROW(decode_saliency_map(decode_png(encode_png(rgb)), "rgb.png"), DomainError);
}

TEST(Png, TruncatedFileIsAnIoError) {
  const RawImage img{8, 8, PixelFormat::Gray, std::vector<std::uint8_t>(64, 7), {}};
  auto bytes = encode_png(img);
  bytes.resize(bytes.size() / 2);
  EXPECT_THROW(decode_png(bytes, "cut.png"), IoError);
  EXPECT_THROW(decode_png(std::vector<std::uint8_t>{1, 2, 3}, "junk.png"), IoError);
  EXPECT_THROW(read_png("/nonexistent/file.png"), IoError);
}

TEST(Png, RgbRoundTrip) {
  TempDir dir("sdslab_io_rgb");
  const LabelMask sem = LabelMask::uniform(8, 8, 2, 3);
  const net::Tensor4 img = render_image(sem, 3, 0.0);
  save_rgb_image(dir.path() / "i.png", img);
  const net::Tensor4 back = load_rgb_image(dir.path() / "i.png");
  ASSERT_EQ(back.shape(), img.shape());
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_NEAR(back[i], img[i], 0.5 / 255.0 + 1e-12);
}

TEST(Binarize, StrictThreshold) {
  const BinaryMask b = binarize(SaliencyMap(3, 1, {0.4, 0.5, 0.6}), 0.5);
  EXPECT_FALSE(b[0]);
  EXPECT_FALSE(b[1]);
  EXPECT_TRUE(b[2]);
  EXPECT_THROW(binarize(SaliencyMap(1, 1, {0.5}), 1.5), DomainError);
}

TEST(Manifest, ParseAndResolve) {
  const nlohmann::json j = {{"categories", {"a", "b"}},
                            {"records",
                             {{{"id", "x"}, {"semantic", "s/x.png"}, {"saliency", "/abs/x.png"}, {"split", "train"}},
                              {{"id", "y"}, {"semantic", "s/y.png"}, {"saliency", "d/y.png"}}}}};
  const DatasetManifest m = parse_manifest(j, "/base", false);
  EXPECT_EQ(m.records.size(), 2u);
  EXPECT_EQ(m.resolve(m.find("x").semantic), fs::path("/base/s/x.png"));
  EXPECT_EQ(m.resolve(m.find("x").saliency), fs::path("/abs/x.png"));
  EXPECT_EQ(m.taxonomy().name(2), "b");
  EXPECT_EQ(m.subset(Split::Train).records.size(), 1u);
  EXPECT_THROW(m.find("z"), DomainError);
  EXPECT_EQ(parse_manifest(to_json(m), "/base", false).records[0].split, Split::Train);
}

TEST(Manifest, Errors) {
  const nlohmann::json dup = {{"records", {{{"id", "x"}}, {{"id", "x"}}}}};
  EXPECT_THROW(parse_manifest(dup, ".", false), DomainError);
  const nlohmann::json split = {{"records", {{{"id", "x"}, {"split", "val"}}}}};
  EXPECT_THROW(parse_manifest(split, ".", false), DomainError);
  EXPECT_THROW(parse_manifest(nlohmann::json::object(), ".", false), DomainError);
  const nlohmann::json missing = {{"records", {{{"id", "x"}, {"semantic", "nope.png"}}}}};
  EXPECT_THROW(parse_manifest(missing, "/nonexistent", true), IoError);
  EXPECT_THROW(load_manifest("/nonexistent/manifest.json"), IoError);
}

TEST(Manifest, SplitIsSeededAndSized) {
  DatasetManifest m;
  for (int i = 0; i < 20; ++i) m.records.push_back({"r" + std::to_string(i), "", "", "", std::nullopt});
  DatasetManifest a = m, b = m, c = m;
  assign_split(a, 5, 12);
  assign_split(b, 5, 12);
  assign_split(c, 6, 12);
  EXPECT_EQ(a.subset(Split::Train).records.size(), 12u);
  EXPECT_EQ(a.subset(Split::Test).records.size(), 8u);
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_NE(to_json(a), to_json(c));
  EXPECT_THROW(assign_split(a, 1, 21), DomainError);
}

TEST(Manifest, JoinReportsUnmatchedIds) {
  DatasetManifest a, b;
  a.records = {{"x", "", "", "", {}}, {"y", "", "", "", {}}};
  b.records = {{"y", "", "", "", {}}, {"x", "", "", "", {}}};
  const auto pairs = join_by_id(a, b);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].second->id, "x");
  b.records.push_back({"z", "", "", "", {}});
  EXPECT_THROW(join_by_id(a, b), DomainError);
}

TEST(Synthetic, ScenesHonourTheirSpec) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto spec = random_scene_spec(30, 30, 10, 2, 6, seed);
    ASSERT_GE(spec.regions.size(), 2u);
    ASSERT_LE(spec.regions.size(), 6u);
    const auto scene = generate_synthetic(spec);
    for (const auto& r : spec.regions) {
      std::size_t inside = 0;
      for (std::size_t y = r.y; y < r.y + r.h; ++y) {
        for (std::size_t x = r.x; x < r.x + r.w; ++x) {
          EXPECT_EQ(scene.semantic.at(x, y), r.category);
          EXPECT_EQ(scene.saliency.at(x, y), r.saliency_level);
          ++inside;
        }
      }
      EXPECT_EQ(area(category_mask(scene.semantic, r.category)), inside);
    }
  }
}

TEST(Synthetic, PartialCoverageLightsTheRequestedShare) {
  SyntheticSceneSpec spec{10, 10, 2, {{1, 0, 0, 4, 5, 0.8, 0.4}, {2, 5, 5, 5, 5, 0.3, 1.0}}, 7, false};
  const auto scene = generate_synthetic(spec);
  std::size_t lit = 0;
  for (std::size_t i = 0; i < scene.semantic.size(); ++i) lit += scene.semantic[i] == 1 && scene.saliency[i] > 0;
  EXPECT_EQ(lit, 8u);
  EXPECT_FALSE(scene.expected.find(1)->ranked());
  EXPECT_EQ(*scene.expected.find(2)->rank_position, 1u);
}

TEST(Synthetic, InvalidSpecsAreRejected) {
  SyntheticSceneSpec overlap{10, 10, 2, {{1, 0, 0, 5, 5, 0.8, 1.0}, {2, 4, 4, 3, 3, 0.3, 1.0}}, 0, false};
  EXPECT_THROW(generate_synthetic(overlap), DomainError);
  SyntheticSceneSpec tie{10, 10, 2, {{1, 0, 0, 2, 2, 0.5, 1.0}, {2, 5, 5, 2, 2, 0.5, 1.0}}, 0, false};
  EXPECT_THROW(generate_synthetic(tie), DomainError);
  tie.allow_ties = true;
  EXPECT_NO_THROW(generate_synthetic(tie));
  SyntheticSceneSpec outside{10, 10, 2, {{1, 8, 8, 5, 5, 0.5, 1.0}}, 0, false};
  EXPECT_THROW(generate_synthetic(outside), DomainError);
}

TEST(Synthetic, SpecJsonRoundTrip) {
  const auto spec = random_scene_spec(24, 24, 5, 3, 3, 4);
  EXPECT_EQ(to_json(scene_spec_from_json(to_json(spec))), to_json(spec));
}

TEST(Synthetic, RenderingIsSeeded) {
  const LabelMask sem = LabelMask::uniform(8, 8, 1, 2);
  EXPECT_EQ(render_image(sem, 1), render_image(sem, 1));
  EXPECT_NE(render_image(sem, 1), render_image(sem, 2));
}

}  // namespace
}  // namespace sdslab::io
