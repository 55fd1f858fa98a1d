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


#include "duet/retrieval/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "duet/errors.hpp"
#include "duet/numcore/ops.hpp"

namespace duet::retrieval {

using model::Modality;

std::string to_string(Direction d) {
  return d == Direction::kVideoToMusic ? "video_to_music" : "music_to_video";
}

Direction parse_direction(const std::string& s) {
  if (s == "video_to_music" || s == "video-to-music" || s == "v2m") return Direction::kVideoToMusic;
  if (s == "music_to_video" || s == "music-to-video" || s == "m2v") return Direction::kMusicToVideo;
  throw ParameterError("unknown direction '" + s + "' (expected video_to_music or music_to_video)");
}

std::string to_string(Protocol p) { return p == Protocol::kSelfSupervised ? "ssl" : "genre"; }

Protocol parse_protocol(const std::string& s) {
  if (s == "ssl" || s == "self_supervised") return Protocol::kSelfSupervised;
  if (s == "genre" || s == "sup" || s == "supervised") return Protocol::kGenre;
  throw ParameterError("unknown protocol '" + s + "' (expected ssl or genre)");
}

// ---------------------------------------------------------------------------
// Corpus

std::optional<std::size_t> EmbeddedCorpus::index_of(const std::string& id) const {
  if (index_.size() == ids.size()) {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ids.begin());
}

void EmbeddedCorpus::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < ids.size(); ++i) index_.emplace(ids[i], i);
}

Matrix EmbeddedCorpus::z(Modality modality, double alpha) const {
  return modality == Modality::kAudio ? model::combine_values(u_audio, v_audio, alpha, normalize_z)
                                      : model::combine_values(u_video, v_video, alpha, normalize_z);
}

EmbeddedCorpus EmbeddedCorpus::subset(std::span<const std::size_t> indices) const {
  EmbeddedCorpus out;
  out.class_names = class_names;
  out.normalize_z = normalize_z;
  for (std::size_t i : indices) {
    out.ids.push_back(ids.at(i));
    out.labels.push_back(labels.at(i));
  }
  out.u_audio = num::gather_rows(u_audio, indices);
  out.v_audio = num::gather_rows(v_audio, indices);
  out.u_video = num::gather_rows(u_video, indices);
  out.v_video = num::gather_rows(v_video, indices);
  out.reindex();
  return out;
}

namespace {

void append_rows(Matrix& dst, const Matrix& src) {
  if (dst.empty()) {
    dst = src;
    return;
  }
  std::vector<double> data = std::move(dst.data());
  data.insert(data.end(), src.data().begin(), src.data().end());
  dst = Matrix(dst.rows() + src.rows(), src.cols(), std::move(data));
}

}  // namespace

EmbeddedCorpus embed_corpus(const model::Model& model, const data::Dataset& dataset,
                            data::Split split, std::size_t chunk_rows) {
  return embed_items(model, dataset, dataset.manifest.indices_of(split), chunk_rows);
}

EmbeddedCorpus embed_items(const model::Model& model, const data::Dataset& dataset,
                           std::span<const std::size_t> indices, std::size_t chunk_rows) {
  const auto& h = dataset.manifest.header;
  const auto& c = model.config;
  if (c.audio_input_dim != h.audio_dim || c.video_input_dim != h.video_dim ||
      c.num_audio_layers != h.audio_layers) {
    throw CompatibilityError("checkpoint dims do not match the dataset header");
  }
  if (chunk_rows == 0) throw ConfigError("chunk size must be positive");

  EmbeddedCorpus corpus;
  corpus.class_names = h.class_names;
  corpus.normalize_z = c.normalize_z;
  num::Rng unused(0);
  for (std::size_t start = 0; start < indices.size(); start += chunk_rows) {
    const std::size_t end = std::min(indices.size(), start + chunk_rows);
    std::vector<std::size_t> rows;
    for (std::size_t i = start; i < end; ++i) {
      const auto& item = dataset.manifest.items.at(indices[i]);
      rows.push_back(item.row);
      corpus.ids.push_back(item.id);
      corpus.labels.push_back(item.genre);
    }
    // alpha does not influence u and v.
    const auto e = model::forward_full(model, num::gather_rows(dataset.audio, rows),
                                       num::gather_rows(dataset.video, rows), 0.0,
                                       num::Mode::kEval, unused);
    append_rows(corpus.u_audio, e.u_audio);
    append_rows(corpus.v_audio, e.v_audio);
    append_rows(corpus.u_video, e.u_video);
    append_rows(corpus.v_video, e.v_video);
  }
  corpus.reindex();
  return corpus;
}

// ---------------------------------------------------------------------------
// Ranking

namespace {

std::vector<double> row_norms(const Matrix& m) {
  std::vector<double> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double ss = 0.0;
    for (double v : m.row(r)) ss += v * v;
    out[r] = std::sqrt(ss);
  }
  return out;
}

// Strict weak order: higher score first, then smaller id.
struct RankOrder {
  std::span<const double> scores;
  std::span<const std::string> ids;
  bool operator()(std::size_t a, std::size_t b) const {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  }
};

std::pair<const Matrix*, const Matrix*> query_candidate(Direction d, const Matrix& z_audio,
                                                        const Matrix& z_video) {
  return d == Direction::kVideoToMusic ? std::pair{&z_video, &z_audio}
                                       : std::pair{&z_audio, &z_video};
}

}  // namespace

Matrix cosine_scores(const Matrix& queries, const Matrix& candidates) {
  Matrix s = num::matmul_bt(queries, candidates);
  const auto qn = row_norms(queries);
  const auto cn = row_norms(candidates);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    if (!(qn[i] > 0.0)) throw DegenerateVectorError("query row " + std::to_string(i) + " is zero");
    for (std::size_t j = 0; j < s.cols(); ++j) {
      if (!(cn[j] > 0.0)) {
        throw DegenerateVectorError("candidate row " + std::to_string(j) + " is zero");
      }
      s(i, j) /= qn[i] * cn[j];
    }
  }
  return s;
}

std::size_t rank_of(std::span<const double> scores, std::size_t target,
                    std::span<const std::string> ids) {
  const RankOrder before{scores, ids};
  std::size_t r = 1;
  for (std::size_t j = 0; j < scores.size(); ++j)
    if (j != target && before(j, target)) ++r;
  return r;
}

std::vector<RankedItem> rank(const EmbeddedCorpus& corpus, const RetrievalQuery& query) {
  model::check_alpha(query.alpha);
  if (query.k < 1) throw ParameterError("k must be at least 1");
  const auto qi = corpus.index_of(query.query_id);
  if (!qi) throw LookupError("unknown item id '" + query.query_id + "'");

  const Modality query_modality =
      query.direction == Direction::kVideoToMusic ? Modality::kVideo : Modality::kAudio;
  const Modality cand_modality =
      query_modality == Modality::kVideo ? Modality::kAudio : Modality::kVideo;
  const Matrix& u_q = query_modality == Modality::kAudio ? corpus.u_audio : corpus.u_video;
  const Matrix& v_q = query_modality == Modality::kAudio ? corpus.v_audio : corpus.v_video;
  const std::size_t one[] = {*qi};
  const Matrix zq = model::combine_values(num::gather_rows(u_q, one), num::gather_rows(v_q, one),
                                          query.alpha, corpus.normalize_z);
  const Matrix zc = corpus.z(cand_modality, query.alpha);
  const Matrix s = cosine_scores(zq, zc);

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  const RankOrder cmp{s.row(0), corpus.ids};
  const std::size_t k = std::min(query.k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), cmp);
  std::vector<RankedItem> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back({order[i], corpus.ids[order[i]], s(0, order[i])});
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

double ProtocolMetrics::mean_at(std::size_t k) const {
  return 0.5 * (video_to_music.at_k.at(k) + music_to_video.at_k.at(k));
}

double ProtocolMetrics::mean_mrr() const { return 0.5 * (video_to_music.mrr + music_to_video.mrr); }

std::vector<std::vector<std::size_t>> make_subsets(std::size_t n, std::size_t subset_size,
                                                   std::size_t subset_count, std::uint64_t seed) {
  if (subset_size == 0 || subset_count == 0) {
    throw ProtocolError("subset size and count must be positive");
  }
  if (subset_size * subset_count > n) {
    throw ProtocolError("corpus of " + std::to_string(n) + " items is too small for " +
                        std::to_string(subset_count) + " subsets of " + std::to_string(subset_size));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  num::Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < subset_count; ++s) {
    auto first = perm.begin() + static_cast<std::ptrdiff_t>(s * subset_size);
    out.emplace_back(first, first + static_cast<std::ptrdiff_t>(subset_size));
  }
  return out;
}

DirectionMetrics metrics_from_ranks(std::span<const std::size_t> ranks,
                                    const std::vector<std::size_t>& ks) {
  DirectionMetrics m;
  if (ranks.empty()) throw ProtocolError("no queries to evaluate");
  for (std::size_t k : ks) {
    std::size_t hits = 0;
    for (std::size_t r : ranks) hits += r <= k;
    m.at_k[k] = static_cast<double>(hits) / static_cast<double>(ranks.size());
  }
  double rr = 0.0;
  for (std::size_t r : ranks) rr += 1.0 / static_cast<double>(r);
  m.mrr = rr / static_cast<double>(ranks.size());
  return m;
}

namespace {

void check_ks(const std::vector<std::size_t>& ks) {
  if (ks.empty()) throw ProtocolError("no K values requested");
  for (std::size_t k : ks)
    if (k == 0) throw ProtocolError("K must be at least 1");
}

void add_scaled(DirectionMetrics& acc, const DirectionMetrics& x, double w) {
  for (const auto& [k, v] : x.at_k) acc.at_k[k] += w * v;
  acc.mrr += w * x.mrr;
}

}  // namespace

ProtocolMetrics eval_self_supervised(const EmbeddedCorpus& corpus, double alpha,
                                     const std::vector<std::size_t>& ks, std::size_t subset_size,
                                     std::size_t subset_count, std::uint64_t seed) {
  model::check_alpha(alpha);
  check_ks(ks);
  const auto subsets = make_subsets(corpus.size(), subset_size, subset_count, seed);
  const Matrix za = corpus.z(Modality::kAudio, alpha);
  const Matrix zv = corpus.z(Modality::kVideo, alpha);

  ProtocolMetrics out;
  for (std::size_t k : ks) {
    out.video_to_music.at_k[k] = 0.0;
    out.music_to_video.at_k[k] = 0.0;
  }
  const double w = 1.0 / static_cast<double>(subsets.size());
  for (const auto& subset : subsets) {
    const Matrix sa = num::gather_rows(za, subset);
    const Matrix sv = num::gather_rows(zv, subset);
    std::vector<std::string> ids;
    for (std::size_t i : subset) ids.push_back(corpus.ids[i]);
    for (Direction d : kBothDirections) {
      const auto [q, c] = query_candidate(d, sa, sv);
      const Matrix s = cosine_scores(*q, *c);
      std::vector<std::size_t> ranks(subset.size());
      for (std::size_t i = 0; i < subset.size(); ++i) ranks[i] = rank_of(s.row(i), i, ids);
      add_scaled(d == Direction::kVideoToMusic ? out.video_to_music : out.music_to_video,
                 metrics_from_ranks(ranks, ks), w);
    }
  }
  return out;
}

ProtocolMetrics eval_genre_supervised(const EmbeddedCorpus& corpus, double alpha,
                                      const std::vector<std::size_t>& ks, bool exclude_own_pair) {
  model::check_alpha(alpha);
  check_ks(ks);
  const std::size_t n = corpus.size();
  const std::size_t classes = corpus.class_names.size();
  std::vector<std::size_t> class_count(classes, 0);
  for (int l : corpus.labels) ++class_count.at(static_cast<std::size_t>(l));
  for (std::size_t c = 0; c < classes; ++c) {
    if (class_count[c] == 0) {
      throw ProtocolError("class '" + corpus.class_names[c] + "' is absent from the corpus");
    }
  }
  if (exclude_own_pair && n < 2) throw ProtocolError("no candidates once the own pair is excluded");
  const std::size_t max_k = *std::max_element(ks.begin(), ks.end());

  const Matrix za = corpus.z(Modality::kAudio, alpha);
  const Matrix zv = corpus.z(Modality::kVideo, alpha);

  ProtocolMetrics out;
  for (Direction d : kBothDirections) {
    const auto [q, c] = query_candidate(d, za, zv);
    const Matrix s = cosine_scores(*q, *c);
    // Per-class sums of P@K and reciprocal rank.
    std::vector<std::map<std::size_t, double>> p_sum(classes);
    std::vector<double> rr_sum(classes, 0.0);
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const RankOrder cmp{s.row(i), corpus.ids};
      const int label = corpus.labels[i];
      order.clear();
      for (std::size_t j = 0; j < n; ++j)
        if (!(exclude_own_pair && j == i)) order.push_back(j);
      const std::size_t top = std::min(max_k, order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                        cmp);
      const auto cls = static_cast<std::size_t>(label);
      for (std::size_t k : ks) {
        const std::size_t kk = std::min(k, order.size());
        std::size_t hits = 0;
        for (std::size_t r = 0; r < kk; ++r) hits += corpus.labels[order[r]] == label;
        p_sum[cls][k] += static_cast<double>(hits) / static_cast<double>(kk);
      }
      // First relevant: best same-label candidate, then count everything ahead of it.
      std::optional<std::size_t> best;
      for (std::size_t j : order)
        if (corpus.labels[j] == label && (!best || cmp(j, *best))) best = j;
      if (best) {
        std::size_t rank = 1;
        for (std::size_t j : order)
          if (j != *best && cmp(j, *best)) ++rank;
        rr_sum[cls] += 1.0 / static_cast<double>(rank);
      }
    }
    DirectionMetrics m;
    for (std::size_t k : ks) m.at_k[k] = 0.0;
    for (std::size_t cls = 0; cls < classes; ++cls) {
      const double cnt = static_cast<double>(class_count[cls]);
      for (std::size_t k : ks) m.at_k[k] += p_sum[cls][k] / cnt;
      m.mrr += rr_sum[cls] / cnt;
    }
    for (auto& [k, v] : m.at_k) v /= static_cast<double>(classes);
    m.mrr /= static_cast<double>(classes);
    (d == Direction::kVideoToMusic ? out.video_to_music : out.music_to_video) = std::move(m);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps and reports

std::vector<double> alpha_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(lo <= hi)) throw ParameterError("bad alpha grid");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> out;
  for (std::size_t i = 0; i <= n; ++i) {
    const double a = lo + static_cast<double>(i) * step;
    out.push_back(std::round(a * 1e9) / 1e9);
  }
  return out;
}

std::vector<double> parse_alphas(const std::string& spec) {
  std::vector<double> out;
  try {
    if (spec.find(':') != std::string::npos) {
      std::vector<double> parts;
      std::stringstream ss(spec);
      std::string tok;
      while (std::getline(ss, tok, ':')) parts.push_back(std::stod(tok));
      if (parts.size() != 3) throw ParameterError("alpha range must be lo:hi:step");
      out = alpha_grid(parts[0], parts[1], parts[2]);
    } else {
      std::stringstream ss(spec);
      std::string tok;
      while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    }
  } catch (const std::logic_error&) {
    throw ParameterError("cannot parse alphas '" + spec + "'");
  }
  if (out.empty()) throw ParameterError("no alphas in '" + spec + "'");
  for (double a : out) model::check_alpha(a);
  return out;
}

EvalOptions fit_subsets(EvalOptions options, std::size_t n) {
  if (options.subset_size == 0 && options.subset_count > 0) {
    options.subset_size = n / options.subset_count;
  }
  return options;
}

RetrievalReport alpha_sweep(const EmbeddedCorpus& corpus, const std::vector<double>& alphas,
                            const std::vector<Protocol>& protocols, const EvalOptions& options) {
  RetrievalReport report;
  report.options = options;
  report.corpus_size = corpus.size();
  for (double a : alphas) {
    model::check_alpha(a);
    AlphaRow row;
    row.alpha = a;
    for (Protocol p : protocols) {
      if (p == Protocol::kSelfSupervised) {
        row.ssl = eval_self_supervised(corpus, a, options.ks, options.subset_size,
                                       options.subset_count, options.subset_seed);
      } else {
        row.genre = eval_genre_supervised(corpus, a, options.ks, options.exclude_own_pair);
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<std::pair<double, double>> RetrievalReport::series(Protocol p, std::size_t k,
                                                               std::optional<Direction> d) const {
  std::vector<std::pair<double, double>> out;
  for (const auto& row : rows) {
    const auto& m = p == Protocol::kSelfSupervised ? row.ssl : row.genre;
    if (!m) throw ProtocolError("report has no " + to_string(p) + " results");
    out.emplace_back(row.alpha, d ? m->direction(*d).at_k.at(k) : m->mean_at(k));
  }
  return out;
}

double select_optimal_alpha(const RetrievalReport& report, Protocol protocol, std::size_t k) {
  const auto s = report.series(protocol, k);
  if (s.empty()) throw ProtocolError("empty sweep");
  std::pair<double, double> best = s.front();
  for (const auto& pt : s) {
    if (pt.second > best.second || (pt.second == best.second && pt.first < best.first)) best = pt;
  }
  return best.first;
}

double select_optimal_alpha(const EmbeddedCorpus& validation, Protocol protocol, std::size_t k,
                            const EvalOptions& options) {
  EvalOptions o = options;
  if (std::find(o.ks.begin(), o.ks.end(), k) == o.ks.end()) o.ks.push_back(k);
  return select_optimal_alpha(alpha_sweep(validation, alpha_grid(), {protocol}, o), protocol, k);
}

namespace {

nlohmann::json metrics_json(const DirectionMetrics& m, const char* prefix) {
  nlohmann::json j;
  for (const auto& [k, v] : m.at_k) j[std::string(prefix) + "@" + std::to_string(k)] = v;
  j["MRR"] = m.mrr;
  return j;
}

nlohmann::json protocol_json(const ProtocolMetrics& m, const char* prefix) {
  return {{"video_to_music", metrics_json(m.video_to_music, prefix)},
          {"music_to_video", metrics_json(m.music_to_video, prefix)}};
}

std::string pct(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%6.2f", 100.0 * v);
  return buf;
}

}  // namespace

nlohmann::json to_json(const RetrievalReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  bool has_ssl = false;
  bool has_genre = false;
  for (const auto& r : report.rows) {
    nlohmann::json row = {{"alpha", r.alpha}};
    if (r.ssl) {
      row["ssl"] = protocol_json(*r.ssl, "R");
      has_ssl = true;
    }
    if (r.genre) {
      row["genre"] = protocol_json(*r.genre, "P");
      has_genre = true;
    }
    rows.push_back(row);
  }
  nlohmann::json series = nlohmann::json::object();
  auto add_series = [&](Protocol p, const char* name) {
    for (std::size_t k : report.options.ks) {
      nlohmann::json s;
      const std::string key = std::string(name) + "@" + std::to_string(k);
      for (std::optional<Direction> d :
           {std::optional<Direction>{}, std::optional{Direction::kVideoToMusic},
            std::optional{Direction::kMusicToVideo}}) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& [a, v] : report.series(p, k, d)) pts.push_back({a, v});
        s[d ? to_string(*d) : "mean"] = pts;
      }
      series[key] = s;
    }
  };
  if (has_ssl) add_series(Protocol::kSelfSupervised, "R");
  if (has_genre) add_series(Protocol::kGenre, "P");

  nlohmann::json out = {{"split", report.split},
                        {"corpus_size", report.corpus_size},
                        {"ks", report.options.ks},
                        {"subset_size", report.options.subset_size},
                        {"subset_count", report.options.subset_count},
                        {"subset_seed", report.options.subset_seed},
                        {"exclude_own_pair", report.options.exclude_own_pair},
                        {"rows", rows},
                        {"series", series}};
  if (has_ssl) {
    out["optimal_alpha"]["ssl"] = select_optimal_alpha(report, Protocol::kSelfSupervised,
                                                       report.options.ks.back());
  }
  if (has_genre) {
    out["optimal_alpha"]["genre"] = select_optimal_alpha(report, Protocol::kGenre,
                                                         report.options.ks.back());
  }
  return out;
}

std::string format_table(const RetrievalReport& report) {
  std::ostringstream os;
  const auto& ks = report.options.ks;
  auto header_block = [&](const char* prefix) {
    std::string h;
    for (std::size_t k : ks) {
      char buf[16];
      std::snprintf(buf, sizeof buf, " %6s", (std::string(prefix) + "@" + std::to_string(k)).c_str());
      h += buf;
    }
    return h + "    MRR";
  };
  auto row_block = [&](const DirectionMetrics& m) {
    std::string s;
    for (std::size_t k : ks) s += " " + pct(m.at_k.at(k));
    return s + " " + pct(m.mrr);
  };
  const bool has_ssl = !report.rows.empty() && report.rows.front().ssl.has_value();
  const bool has_genre = !report.rows.empty() && report.rows.front().genre.has_value();

  os << "# split=" << report.split << " items=" << report.corpus_size;
  if (has_ssl) {
    os << " ssl_subsets=" << report.options.subset_count << "x" << report.options.subset_size;
  }
  os << " (all metrics in %)\n";
  os << "alpha ";
  if (has_ssl) os << "| ssl V->M" << header_block("R") << " | ssl M->V" << header_block("R") << " ";
  if (has_genre) {
    os << "| genre V->M" << header_block("P") << " | genre M->V" << header_block("P");
  }
  os << "\n";
  for (const auto& r : report.rows) {
    char a[16];
    std::snprintf(a, sizeof a, "%5.2f ", r.alpha);
    os << a;
    if (r.ssl) {
      os << "|         " << row_block(r.ssl->video_to_music) << " |         "
         << row_block(r.ssl->music_to_video) << " ";
    }
    if (r.genre) {
      os << "|           " << row_block(r.genre->video_to_music) << " |           "
         << row_block(r.genre->music_to_video);
    }
    os << "\n";
  }
  return os.str();
}

std::string format_series_csv(const RetrievalReport& report) {
  std::ostringstream os;
  os << "alpha";
  const bool has_ssl = !report.rows.empty() && report.rows.front().ssl.has_value();
  const bool has_genre = !report.rows.empty() && report.rows.front().genre.has_value();
  for (Direction d : kBothDirections) {
    const std::string dir = to_string(d);
    if (has_ssl) {
      for (std::size_t k : report.options.ks) os << ",ssl_" << dir << "_R@" << k;
      os << ",ssl_" << dir << "_MRR";
    }
    if (has_genre) {
      for (std::size_t k : report.options.ks) os << ",genre_" << dir << "_P@" << k;
      os << ",genre_" << dir << "_MRR";
    }
  }
  os << "\n";
  char buf[32];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.2f", r.alpha);
    os << buf;
    for (Direction d : kBothDirections) {
      auto emit = [&](const DirectionMetrics& m) {
        for (std::size_t k : report.options.ks) {
          std::snprintf(buf, sizeof buf, ",%.6f", m.at_k.at(k));
          os << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.6f", m.mrr);
        os << buf;
      };
      if (r.ssl) emit(r.ssl->direction(d));
      if (r.genre) emit(r.genre->direction(d));
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace duet::retrieval
