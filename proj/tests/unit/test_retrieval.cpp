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
#include <numeric>
#include <random>
#include <set>

#include "duet/errors.hpp"
#include "duet/retrieval/retrieval.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace rt = duet::retrieval;
namespace num = duet::num;
using num::Matrix;
using rt::Direction;

namespace {

// Corpus whose alpha=0 embeddings are `audio`/`video` and alpha=1 are the
// `sup` pair.
rt::EmbeddedCorpus make_corpus(const oracle::Rows& audio, const oracle::Rows& video,
                               std::vector<int> labels = {}, int classes = 1) {
  rt::EmbeddedCorpus c;
  for (std::size_t i = 0; i < audio.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "it%03zu", i);
    c.ids.emplace_back(buf);
  }
  if (labels.empty()) labels.assign(audio.size(), 0);
  c.labels = std::move(labels);
  for (int k = 0; k < classes; ++k) c.class_names.push_back("k" + std::to_string(k));
  c.u_audio = num::l2_normalize_rows(testutil::to_matrix(audio));
  c.u_video = num::l2_normalize_rows(testutil::to_matrix(video));
  c.v_audio = c.u_audio;
  c.v_video = c.u_video;
  c.reindex();
  return c;
}

}  // namespace

TEST(Rank, SingleCandidate) {
  const auto c = make_corpus({{1, 0}}, {{0, 1}});
  const auto r = rt::rank(c, {"it000", Direction::kVideoToMusic, 0.0, 10});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].id, "it000");
}

TEST(Rank, UnknownIdIsLookupError) {
  const auto c = make_corpus({{1, 0}}, {{0, 1}});
  EXPECT_THROW(rt::rank(c, {"nope", Direction::kVideoToMusic, 0.0, 1}), duet::LookupError);
}

TEST(Rank, MatchesBruteForceOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = oracle::random_rows(20, 4, rng);
    const auto v = oracle::random_rows(20, 4, rng);
    const auto c = make_corpus(a, v);
    for (std::size_t q = 0; q < 20; q += 7) {
      for (auto d : rt::kBothDirections) {
        const auto r = rt::rank(c, {c.ids[q], d, 0.0, 100});
        const auto& query = d == Direction::kVideoToMusic ? v[q] : a[q];
        const auto& cands = d == Direction::kVideoToMusic ? a : v;
        std::vector<double> s;
        for (const auto& row : cands) s.push_back(oracle::cosine(query, row));
        const auto order = oracle::sorted_order(s, c.ids);
        ASSERT_EQ(r.size(), order.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
          EXPECT_EQ(r[i].index, order[i]);
          EXPECT_NEAR(r[i].score, s[order[i]], 1e-12);
        }
      }
    }
  }
}

TEST(Rank, TiesBrokenByAscendingId) {
  const auto c = make_corpus({{1, 0}, {1, 0}, {1, 0}}, {{1, 0}, {1, 0}, {1, 0}});
  const auto r = rt::rank(c, {"it002", Direction::kMusicToVideo, 0.0, 3});
  EXPECT_EQ(r[0].id, "it000");
  EXPECT_EQ(r[1].id, "it001");
  EXPECT_EQ(r[2].id, "it002");
  const std::vector<double> s{0.5, 0.5, 0.5};
  EXPECT_EQ(rt::rank_of(s, 2, c.ids), 3u);
}

TEST(SelfSupervised, PerfectCorrespondence) {
  oracle::Rows e(6, std::vector<double>(6, 0.0));
  for (std::size_t i = 0; i < 6; ++i) e[i][i] = 1.0;
  const auto c = make_corpus(e, e);
  const auto m = rt::eval_self_supervised(c, 0.0, {1, 10}, 6, 1);
  EXPECT_DOUBLE_EQ(m.mean_at(1), 1.0);
  EXPECT_DOUBLE_EQ(m.mean_mrr(), 1.0);
}

TEST(SelfSupervised, MrrHandCase) {
  const std::vector<std::size_t> ranks{2, 3, 1};
  const auto m = rt::metrics_from_ranks(ranks, {1});
  EXPECT_NEAR(m.mrr, (0.5 + 1.0 / 3 + 1.0) / 3, 1e-15);
  EXPECT_NEAR(m.mrr, 0.6111, 1e-4);
  EXPECT_NEAR(m.at_k.at(1), 1.0 / 3, 1e-15);
}

TEST(SelfSupervised, CorpusTooSmallIsProtocolError) {
  const auto c = make_corpus({{1, 0}, {0, 1}}, {{1, 0}, {0, 1}});
  EXPECT_THROW(rt::eval_self_supervised(c, 0.0, {1}, 2, 2), duet::ProtocolError);
}

TEST(SelfSupervised, RandomEmbeddingsNearChance) {
  std::mt19937_64 rng(77);
  const std::size_t n = 25;
  double h = 0.0;
  for (std::size_t k = 1; k <= n; ++k) h += 1.0 / k;
  std::vector<double> r1, mrr;
  for (int s = 0; s < 200; ++s) {
    const auto c = make_corpus(oracle::random_rows(n, 6, rng), oracle::random_rows(n, 6, rng));
    const auto m = rt::eval_self_supervised(c, 0.0, {1}, n, 1);
    r1.push_back(m.video_to_music.at_k.at(1));
    mrr.push_back(m.video_to_music.mrr);
  }
  auto mean_se = [](const std::vector<double>& x) {
    const double mu = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double var = 0.0;
    for (double v : x) var += (v - mu) * (v - mu);
    var /= static_cast<double>(x.size() - 1);
    return std::pair{mu, std::sqrt(var / x.size())};
  };
  const auto [m1, se1] = mean_se(r1);
  EXPECT_LT(std::abs(m1 - 1.0 / n), 3 * se1);
  const auto [m2, se2] = mean_se(mrr);
  EXPECT_LT(std::abs(m2 - h / n), 3 * se2);
}

TEST(Subsets, DisjointExactAndSeeded) {
  const auto s = rt::make_subsets(100, 20, 4, 3);
  ASSERT_EQ(s.size(), 4u);
  std::set<std::size_t> seen;
  for (const auto& sub : s) {
    EXPECT_EQ(sub.size(), 20u);
    for (auto i : sub) {
      EXPECT_LT(i, 100u);
      EXPECT_TRUE(seen.insert(i).second);
    }
  }
  EXPECT_EQ(s, rt::make_subsets(100, 20, 4, 3));
  EXPECT_NE(s, rt::make_subsets(100, 20, 4, 4));
  EXPECT_THROW(rt::make_subsets(100, 30, 4, 0), duet::ProtocolError);
}

TEST(Subsets, SingleSubsetEqualsWholeCorpus) {
  std::mt19937_64 rng(4);
  const auto a = oracle::random_rows(30, 5, rng);
  const auto v = oracle::random_rows(30, 5, rng);
  const auto c = make_corpus(a, v);
  const auto m = rt::eval_self_supervised(c, 0.0, {1, 5, 10}, 30, 1, 99);
  const auto want = oracle::pair_metrics(v, a, c.ids, {1, 5, 10});
  for (std::size_t k : {1, 5, 10}) EXPECT_NEAR(m.video_to_music.at_k.at(k), want.at_k.at(k), 1e-15);
  EXPECT_NEAR(m.video_to_music.mrr, want.mrr, 1e-15);
}

TEST(Genre, AllSameLabel) {
  std::mt19937_64 rng(5);
  const auto c = make_corpus(oracle::random_rows(5, 3, rng), oracle::random_rows(5, 3, rng));
  const auto m = rt::eval_genre_supervised(c, 0.0, {1, 3});
  EXPECT_DOUBLE_EQ(m.mean_at(1), 1.0);
  EXPECT_DOUBLE_EQ(m.mean_at(3), 1.0);
  EXPECT_DOUBLE_EQ(m.mean_mrr(), 1.0);
}

TEST(Genre, MacroAverageNinetyTen) {
  // 90 items of class 0 all at one point, 10 of class 1 scattered so every
  // class-1 query's nearest neighbour is a class-0 item.
  oracle::Rows a, v;
  std::vector<int> y;
  for (int i = 0; i < 90; ++i) {
    a.push_back({1, 0, 0});
    v.push_back({1, 0, 0});
    y.push_back(0);
  }
  for (int i = 0; i < 10; ++i) {
    const double t = 0.3 + 0.01 * i;
    a.push_back({1, t, 0});
    v.push_back({1, -t, 0});
    y.push_back(1);
  }
  const auto c = make_corpus(a, v, y, 2);
  const auto m = rt::eval_genre_supervised(c, 0.0, {1});
  EXPECT_DOUBLE_EQ(m.video_to_music.at_k.at(1), 0.5);
}

TEST(Genre, AbsentClassIsProtocolError) {
  const auto c = make_corpus({{1, 0}, {0, 1}}, {{1, 0}, {0, 1}}, {0, 0}, 2);
  EXPECT_THROW(rt::eval_genre_supervised(c, 0.0, {1}), duet::ProtocolError);
}

TEST(Oracle, RandomCorporaMatchExactly) {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<std::size_t> nd(3, 30);
  const std::vector<std::size_t> ks{1, 3, 10};
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = nd(rng);
    const int classes = 3;
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % classes);
    std::shuffle(y.begin(), y.end(), rng);
    // Rows drawn from a small pool, so exact score ties are common.
    const auto pool = oracle::random_rows(6, 3, rng);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    oracle::Rows a(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = pool[pick(rng)];
      v[i] = pool[pick(rng)];
    }
    const auto c = make_corpus(a, v, y, classes);
    const auto an = oracle::normalized(a), vn = oracle::normalized(v);
    const auto ssl = rt::eval_self_supervised(c, 0.0, ks, n, 1);
    const auto w1 = oracle::pair_metrics(vn, an, c.ids, ks);
    const auto w2 = oracle::pair_metrics(an, vn, c.ids, ks);
    for (auto k : ks) {
      EXPECT_DOUBLE_EQ(ssl.video_to_music.at_k.at(k), w1.at_k.at(k));
      EXPECT_DOUBLE_EQ(ssl.music_to_video.at_k.at(k), w2.at_k.at(k));
    }
    EXPECT_DOUBLE_EQ(ssl.video_to_music.mrr, w1.mrr);
    EXPECT_DOUBLE_EQ(ssl.music_to_video.mrr, w2.mrr);
    for (bool excl : {false, true}) {
      const auto g = rt::eval_genre_supervised(c, 0.0, ks, excl);
      const auto g1 = oracle::genre_metrics(vn, an, c.ids, y, classes, ks, excl);
      const auto g2 = oracle::genre_metrics(an, vn, c.ids, y, classes, ks, excl);
      for (auto k : ks) {
        EXPECT_NEAR(g.video_to_music.at_k.at(k), g1.at_k.at(k), 1e-12);
        EXPECT_NEAR(g.music_to_video.at_k.at(k), g2.at_k.at(k), 1e-12);
      }
      EXPECT_NEAR(g.video_to_music.mrr, g1.mrr, 1e-12);
      EXPECT_NEAR(g.music_to_video.mrr, g2.mrr, 1e-12);
    }
  }
}

TEST(Sweep, GridAndParsing) {
  const auto g = rt::alpha_grid();
  ASSERT_EQ(g.size(), 11u);
  EXPECT_EQ(g[3], 0.3);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_EQ(rt::parse_alphas("0:1:0.1"), g);
  EXPECT_EQ(rt::parse_alphas("0.2,0.7"), (std::vector<double>{0.2, 0.7}));
  EXPECT_ANY_THROW(rt::parse_alphas("0:2:0.1"));
}

TEST(Sweep, SingleAlphaOneRow) {
  std::mt19937_64 rng(2);
  const auto c = make_corpus(oracle::random_rows(10, 3, rng), oracle::random_rows(10, 3, rng));
  rt::EvalOptions o;
  o.subset_size = 10;
  o.subset_count = 1;
  const auto r = rt::alpha_sweep(c, {0.4}, {rt::Protocol::kSelfSupervised, rt::Protocol::kGenre}, o);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_TRUE(r.rows[0].ssl.has_value());
  EXPECT_TRUE(r.rows[0].genre.has_value());
  EXPECT_FALSE(rt::format_table(r).empty());
  EXPECT_FALSE(rt::format_series_csv(r).empty());
  EXPECT_TRUE(rt::to_json(r).contains("rows"));
}

TEST(Sweep, ConstantMetricSelectsZero) {
  std::mt19937_64 rng(2);
  const auto c = make_corpus(oracle::random_rows(10, 3, rng), oracle::random_rows(10, 3, rng));
  rt::EvalOptions o;
  o.subset_size = 10;
  o.subset_count = 1;
  // u == v, so every alpha gives the same embeddings.
  const auto r = rt::alpha_sweep(c, rt::alpha_grid(), {rt::Protocol::kSelfSupervised}, o);
  EXPECT_EQ(rt::select_optimal_alpha(r, rt::Protocol::kSelfSupervised, 10), 0.0);
}

TEST(Sweep, AlphaChangesTheOrdering) {
  std::mt19937_64 rng(6);
  auto c = make_corpus(oracle::random_rows(15, 4, rng), oracle::random_rows(15, 4, rng));
  c.v_audio = num::l2_normalize_rows(testutil::random_matrix(15, 4, rng));
  c.v_video = num::l2_normalize_rows(testutil::random_matrix(15, 4, rng));
  const auto r0 = rt::rank(c, {"it000", Direction::kVideoToMusic, 0.0, 15});
  const auto r1 = rt::rank(c, {"it000", Direction::kVideoToMusic, 1.0, 15});
  bool differ = false;
  for (std::size_t i = 0; i < r0.size(); ++i) differ |= r0[i].id != r1[i].id;
  EXPECT_TRUE(differ);
}

TEST(Sweep, FitSubsets) {
  rt::EvalOptions o;
  o.subset_size = 0;
  o.subset_count = 4;
  EXPECT_EQ(rt::fit_subsets(o, 203).subset_size, 50u);
}
