// Copyright 2026 The Duet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "duet/data/features.hpp"
#include "duet/data/manifest.hpp"
#include "duet/data/sampling.hpp"
#include "duet/data/synthetic.hpp"
#include "duet/data/taxonomy.hpp"
#include "duet/errors.hpp"
#include "duet/numcore/random.hpp"
#include "test_util.hpp"

namespace data = duet::data;
namespace num = duet::num;
using data::Split;

namespace {

data::DatasetManifest make_manifest(const std::vector<std::size_t>& per_class) {
  data::DatasetManifest m;
  m.header.audio_dim = 2;
  m.header.video_dim = 2;
  std::uint64_t row = 0;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    m.header.class_names.push_back("c" + std::to_string(c));
    for (std::size_t i = 0; i < per_class[c]; ++i) {
      data::MusicVideoItem it;
      it.id = "c" + std::to_string(c) + "_" + std::to_string(i);
      it.genre = static_cast<int>(c);
      it.row = row++;
      m.items.push_back(it);
    }
  }
  return m;
}

std::array<std::size_t, 3> class_counts(const data::DatasetManifest& m, int c) {
  std::array<std::size_t, 3> n{};
  for (const auto& it : m.items)
    if (it.genre == c) ++n[static_cast<std::size_t>(it.split)];
  return n;
}

}  // namespace

TEST(Taxonomy, PaperExamples) {
  const auto tax = data::GenreTaxonomy::audioset_genres();
  ASSERT_EQ(tax.num_classes(), 11u);
  const auto rb = tax.class_id("R&B");
  ASSERT_TRUE(rb.has_value());
  EXPECT_EQ(tax.class_of("Blues"), *rb);
  EXPECT_EQ(tax.class_of("Country"), *tax.class_id("Country"));
  const auto r = data::condense_labels({"Jazz", "Rock music"}, tax);
  EXPECT_EQ(r.status, data::CondenseStatus::kRejectedMultiLabel);
}

TEST(Taxonomy, ClassNamesInOrder) {
  const std::vector<std::string> want{"Country", "Classical", "Electronic", "Non-Western",
                                      "Hip-Hop", "Jazz",      "Pop",        "Reggae",
                                      "R&B",     "Rock",      "Vocal"};
  EXPECT_EQ(data::GenreTaxonomy::audioset_genres().class_names(), want);
}

TEST(Taxonomy, UnknownLabelNamesTheString) {
  const auto tax = data::GenreTaxonomy::audioset_genres();
  try {
    tax.class_of("Polka Fusion");
    FAIL();
  } catch (const duet::TaxonomyError& e) {
    EXPECT_NE(std::string(e.what()).find("Polka Fusion"), std::string::npos);
  }
  EXPECT_THROW(data::condense_labels({"Polka Fusion"}, tax), duet::TaxonomyError);
}

TEST(Taxonomy, EmptyLabelsRejected) {
  const auto r = data::condense_labels({}, data::GenreTaxonomy::audioset_genres());
  EXPECT_EQ(r.status, data::CondenseStatus::kRejectedNoLabel);
}

TEST(Taxonomy, FileMatchesBuiltIn) {
  const auto path = std::filesystem::path(DUET_SOURCE_DIR) / "data/taxonomy/audioset_genres.tsv";
  const auto file = data::GenreTaxonomy::load(path);
  const auto builtin = data::GenreTaxonomy::audioset_genres();
  EXPECT_EQ(file.class_names(), builtin.class_names());
  EXPECT_EQ(file.mapping(), builtin.mapping());
}

TEST(Taxonomy, SaveLoadRoundTrip) {
  const auto dir = testutil::temp_dir("taxonomy");
  const auto tax = data::GenreTaxonomy::audioset_genres();
  tax.save(dir / "t.tsv");
  const auto back = data::GenreTaxonomy::load(dir / "t.tsv");
  EXPECT_EQ(back.mapping(), tax.mapping());
  EXPECT_EQ(back.class_names(), tax.class_names());
}

TEST(Split, SingleClass) {
  const auto r = data::stratified_split(make_manifest({100}), {}, 1);
  EXPECT_EQ(class_counts(r.manifest, 0), (std::array<std::size_t, 3>{80, 10, 10}));
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Split, TwoClassesExact) {
  const auto r = data::stratified_split(make_manifest({50, 50}), {}, 1);
  for (int c = 0; c < 2; ++c)
    EXPECT_EQ(class_counts(r.manifest, c), (std::array<std::size_t, 3>{40, 5, 5}));
}

TEST(Split, DeterministicAndSeedSensitive) {
  const auto a = data::stratified_split(make_manifest({30, 17}), {}, 5);
  const auto b = data::stratified_split(make_manifest({30, 17}), {}, 5);
  const auto c = data::stratified_split(make_manifest({30, 17}), {}, 6);
  EXPECT_EQ(a.manifest, b.manifest);
  EXPECT_NE(a.manifest, c.manifest);
}

TEST(Split, SmallClassWarnsButIsDistributed) {
  const auto r = data::stratified_split(make_manifest({20, 2}), {}, 1);
  EXPECT_EQ(r.warnings.size(), 1u);
  const auto n = class_counts(r.manifest, 1);
  EXPECT_EQ(n[0] + n[1] + n[2], 2u);
}

TEST(Sampler, SingleClass) {
  auto m = make_manifest({7});
  data::BalancedSampler s(m, Split::kTrain);
  num::Rng rng(1);
  for (auto i : s.next_batch(50, rng)) EXPECT_EQ(m.items[i].genre, 0);
}

TEST(Sampler, EmptyClassInSplitThrowsNamingClass) {
  auto m = make_manifest({5, 5});
  for (auto& it : m.items)
    if (it.genre == 1) it.split = Split::kTest;
  try {
    data::BalancedSampler s(m, Split::kTrain);
    FAIL();
  } catch (const duet::SamplingError& e) {
    EXPECT_NE(std::string(e.what()).find("c1"), std::string::npos) << e.what();
  }
}

TEST(Sampler, ClassFrequenciesAreUniformChiSquare) {
  // Heavily imbalanced classes; draws must still be uniform over classes.
  std::vector<std::size_t> sizes;
  for (std::size_t c = 0; c < 11; ++c) sizes.push_back(3 + 40 * c);
  auto m = make_manifest(sizes);
  data::BalancedSampler s(m, Split::kTrain);
  num::Rng rng(123);
  std::vector<double> counts(11, 0.0);
  std::size_t draws = 0;
  while (draws < 110000) {
    for (auto i : s.next_batch(1000, rng)) counts[static_cast<std::size_t>(m.items[i].genre)] += 1;
    draws += 1000;
  }
  const double expect = draws / 11.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
  // chi-square(10) upper 0.001 quantile
  EXPECT_LT(chi2, 29.588);
  const double se = std::sqrt(draws * (1.0 / 11) * (10.0 / 11));
  for (double c : counts) EXPECT_LT(std::abs(c - expect), 3 * se + 1);
}

TEST(Sampler, SeededIsReproducible) {
  auto m = make_manifest({10, 4, 6});
  data::BalancedSampler s(m, Split::kTrain);
  num::Rng a(9), b(9);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(s.next_batch(16, a), s.next_batch(16, b));
  EXPECT_EQ(s.batches_per_epoch(7), 3u);
}

TEST(Features, RoundTripIsBitExact) {
  const auto dir = testutil::temp_dir("features");
  std::mt19937_64 rng(5);
  const auto m = testutil::random_matrix(17, 9, rng);
  const auto fa = data::FeatureArray::from_matrix(m);
  data::write_features(dir / "x.f32", fa);
  EXPECT_EQ(data::read_features(dir / "x.f32"), fa);
  EXPECT_EQ(data::read_features(dir / "x.f32", 9), fa);
}

TEST(Features, TruncatedFileIsFormatErrorWithOffset) {
  const auto dir = testutil::temp_dir("features-trunc");
  data::FeatureArray fa{3, 2, {1, 2, 3, 4, 5, 6}};
  data::write_features(dir / "x.f32", fa);
  std::filesystem::resize_file(dir / "x.f32", data::kFeatureHeaderBytes + 10);
  try {
    data::read_features(dir / "x.f32");
    FAIL();
  } catch (const duet::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("at byte"), std::string::npos) << e.what();
  }
}

TEST(Features, BadMagicAndDimConflict) {
  const auto dir = testutil::temp_dir("features-bad");
  data::FeatureArray fa{1, 2, {1, 2}};
  data::write_features(dir / "x.f32", fa);
  EXPECT_THROW(data::read_features(dir / "x.f32", 3), duet::DimensionConflictError);
  {
    std::fstream f(dir / "x.f32", std::ios::in | std::ios::out | std::ios::binary);
    f.write("NOTMAGIC", 8);
  }
  EXPECT_THROW(data::read_features(dir / "x.f32"), duet::FormatError);
}

TEST(Manifest, CanonicalReserialization) {
  auto r = data::stratified_split(make_manifest({6, 4}), {}, 2);
  r.manifest.header.audio_layers = 3;
  const auto text = data::serialize_manifest(r.manifest);
  const auto back = data::parse_manifest(text);
  EXPECT_EQ(back, r.manifest);
  EXPECT_EQ(data::serialize_manifest(back), text);
}

TEST(Manifest, ValidationRejectsDuplicates) {
  auto m = make_manifest({2});
  m.items[1].id = m.items[0].id;
  EXPECT_ANY_THROW(m.validate());
  EXPECT_ANY_THROW(data::parse_manifest("not json\n"));
}

TEST(Synthetic, DeterministicAndSaveLoadIdentical) {
  data::SyntheticConfig cfg;
  cfg.num_classes = 3;
  cfg.items_per_class = 20;
  cfg.audio_layers = 2;
  const auto a = data::generate_synthetic(cfg);
  const auto b = data::generate_synthetic(cfg);
  EXPECT_EQ(a.manifest, b.manifest);
  EXPECT_EQ(a.audio, b.audio);
  EXPECT_EQ(a.video, b.video);
  EXPECT_EQ(a.audio.cols(), 2 * cfg.audio_dim);
  const auto dir = testutil::temp_dir("synthetic");
  data::save_dataset(dir, a);
  const auto c = data::load_dataset(dir);
  EXPECT_EQ(c.manifest, a.manifest);
  EXPECT_EQ(c.audio, a.audio);
  EXPECT_EQ(c.video, a.video);
  const auto counts = a.manifest.split_counts();
  EXPECT_EQ(counts[0] + counts[1] + counts[2], 60u);
}

TEST(Synthetic, ManifestDimConflictDetected) {
  data::SyntheticConfig cfg;
  cfg.num_classes = 2;
  cfg.items_per_class = 5;
  const auto ds = data::generate_synthetic(cfg);
  const auto dir = testutil::temp_dir("synthetic-conflict");
  data::save_dataset(dir, ds);
  auto m = ds.manifest;
  m.header.video_dim += 1;
  data::write_manifest(dir / data::kManifestFile, m);
  EXPECT_THROW(data::load_dataset(dir), duet::DimensionConflictError);
}
