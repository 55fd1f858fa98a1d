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


#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "duet/data/manifest.hpp"
#include "duet/model/model.hpp"

namespace duet::retrieval {

using num::Matrix;

enum class Direction { kVideoToMusic, kMusicToVideo };
inline constexpr Direction kBothDirections[] = {Direction::kVideoToMusic, Direction::kMusicToVideo};

std::string to_string(Direction d);
Direction parse_direction(const std::string& s);

// Projected task embeddings of a corpus, stored before the alpha
// combination so any alpha can be served without re-running the network.
struct EmbeddedCorpus {
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  Matrix u_audio;  // p_ssl(q_ssl), per-term normalized
  Matrix v_audio;  // p_sup(q_sup), per-term normalized
  Matrix u_video;
  Matrix v_video;
  bool normalize_z = true;

  std::size_t size() const noexcept { return ids.size(); }
  std::optional<std::size_t> index_of(const std::string& id) const;
  // Combined embeddings of one modality at alpha.
  Matrix z(model::Modality modality, double alpha) const;
  // Rows restricted to the given indices, in that order.
  EmbeddedCorpus subset(std::span<const std::size_t> indices) const;
  // Rebuilds the id lookup after ids change; index_of scans linearly until then.
  void reindex();

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

// Eval-mode forward over every item of the split, in manifest order.
EmbeddedCorpus embed_corpus(const model::Model& model, const data::Dataset& dataset,
                            data::Split split, std::size_t chunk_rows = 512);
// Same for an explicit list of manifest item indices, in that order.
EmbeddedCorpus embed_items(const model::Model& model, const data::Dataset& dataset,
                           std::span<const std::size_t> item_indices, std::size_t chunk_rows = 512);

struct RetrievalQuery {
  std::string query_id;
  Direction direction = Direction::kVideoToMusic;
  double alpha = 0.5;
  std::size_t k = 10;
};

struct RankedItem {
  std::size_t index = 0;
  std::string id;
  double score = 0.0;
};

// Cosine similarity between the query's embedding and every item of the
// opposite modality (the query's own pair included), sorted by descending
// score with ties broken by ascending id. Returns the top min(k, n).
std::vector<RankedItem> rank(const EmbeddedCorpus& corpus, const RetrievalQuery& query);

// Cosine similarity of every query row against every candidate row.
Matrix cosine_scores(const Matrix& queries, const Matrix& candidates);

// 1-based rank of candidate `target` in a score row under the (score desc,
// id asc) order.
std::size_t rank_of(std::span<const double> scores, std::size_t target,
                    std::span<const std::string> ids);

struct DirectionMetrics {
  std::map<std::size_t, double> at_k;  // R@K or P@K
  double mrr = 0.0;
  friend bool operator==(const DirectionMetrics&, const DirectionMetrics&) = default;
};

struct ProtocolMetrics {
  DirectionMetrics video_to_music;
  DirectionMetrics music_to_video;

  const DirectionMetrics& direction(Direction d) const {
    return d == Direction::kVideoToMusic ? video_to_music : music_to_video;
  }
  // Mean of both directions.
  double mean_at(std::size_t k) const;
  double mean_mrr() const;
  friend bool operator==(const ProtocolMetrics&, const ProtocolMetrics&) = default;
};

// Disjoint subsets of `subset_size` indices drawn from [0, n) by a seeded
// shuffle followed by contiguous chunking.
std::vector<std::vector<std::size_t>> make_subsets(std::size_t n, std::size_t subset_size,
                                                   std::size_t subset_count, std::uint64_t seed);

// Pair-correspondence protocol: success means retrieving the query's own
// pair. Metrics are computed inside each subset and averaged over subsets.
ProtocolMetrics eval_self_supervised(const EmbeddedCorpus& corpus, double alpha,
                                     const std::vector<std::size_t>& ks, std::size_t subset_size,
                                     std::size_t subset_count, std::uint64_t seed = 0);

// Mean over queries of R@K and 1/rank given the 1-based rank of each query's pair.
DirectionMetrics metrics_from_ranks(std::span<const std::size_t> ranks,
                                    const std::vector<std::size_t>& ks);

// Label protocol over the whole corpus: P@K is the fraction of the top
// min(K, candidates) sharing the query's label, MRR uses the first
// same-label candidate. Per-class means are averaged with equal class weight.
ProtocolMetrics eval_genre_supervised(const EmbeddedCorpus& corpus, double alpha,
                                      const std::vector<std::size_t>& ks,
                                      bool exclude_own_pair = false);

enum class Protocol { kSelfSupervised, kGenre };
std::string to_string(Protocol p);
Protocol parse_protocol(const std::string& s);

struct EvalOptions {
  std::vector<std::size_t> ks{1, 10};
  std::size_t subset_size = 2000;
  std::size_t subset_count = 4;
  std::uint64_t subset_seed = 0;
  bool exclude_own_pair = false;
};

// Resolves subset_size 0 to floor(n / subset_count).
EvalOptions fit_subsets(EvalOptions options, std::size_t n);

struct AlphaRow {
  double alpha = 0.0;
  std::optional<ProtocolMetrics> ssl;
  std::optional<ProtocolMetrics> genre;
};

struct RetrievalReport {
  std::vector<AlphaRow> rows;
  EvalOptions options;
  std::size_t corpus_size = 0;
  std::string split;

  // (alpha, metric) points; direction nullopt means the mean of both.
  std::vector<std::pair<double, double>> series(Protocol p, std::size_t k,
                                                std::optional<Direction> d = std::nullopt) const;
};

// Inclusive grid lo:hi:step, snapped to multiples of step to avoid drift.
std::vector<double> alpha_grid(double lo = 0.0, double hi = 1.0, double step = 0.1);
// Parses "lo:hi:step" or a comma-separated list.
std::vector<double> parse_alphas(const std::string& spec);

RetrievalReport alpha_sweep(const EmbeddedCorpus& corpus, const std::vector<double>& alphas,
                            const std::vector<Protocol>& protocols, const EvalOptions& options);

// Argmax of the mean-over-directions metric at K; ties go to the smaller alpha.
double select_optimal_alpha(const RetrievalReport& report, Protocol protocol, std::size_t k);
// Sweeps the 11-point grid first.
double select_optimal_alpha(const EmbeddedCorpus& validation, Protocol protocol, std::size_t k,
                            const EvalOptions& options);

nlohmann::json to_json(const RetrievalReport& report);
// Fixed-width table in percent, one row per alpha.
std::string format_table(const RetrievalReport& report);
// CSV of alpha against every metric.
std::string format_series_csv(const RetrievalReport& report);

}  // namespace duet::retrieval
