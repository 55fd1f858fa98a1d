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


#include "duet/cli/cli.hpp"

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "duet/data/features.hpp"
#include "duet/data/sampling.hpp"
#include "duet/data/synthetic.hpp"
#include "duet/data/taxonomy.hpp"
#include "duet/errors.hpp"
#include "duet/numcore/random.hpp"
#include "duet/retrieval/retrieval.hpp"
#include "duet/service/service.hpp"
#include "duet/trainer/trainer.hpp"
#include "duet/version.hpp"

namespace duet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

json reproducibility_stanza(const std::string& command, std::uint64_t seed, const json& config) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016" PRIx64, num::fnv1a64(config.dump()));
  return {{"tool", "duet"},
          {"version", kVersion},
          {"formats",
           {{"features", kFeatureFormatVersion},
            {"manifest", kManifestFormatVersion},
            {"checkpoint", kCheckpointFormatVersion}}},
          {"command", command},
          {"seed", seed},
          {"config", config},
          {"config_hash", hash}};
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw FormatError("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Option structs, one per subcommand.

struct SplitFlags {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;

  void add(CLI::App* app) {
    app->add_option("--train", train, "Train fraction")->capture_default_str();
    app->add_option("--val", val, "Validation fraction")->capture_default_str();
    app->add_option("--test", test, "Test fraction")->capture_default_str();
  }
  data::SplitFractions fractions() const { return {train, val, test}; }
};

struct SynthArgs {
  data::SyntheticConfig config;
  SplitFlags split;
  std::string out;
};

struct IngestArgs {
  std::string items;
  std::string audio;
  std::string video;
  std::string taxonomy;
  std::uint64_t audio_layers = 0;
  std::uint64_t seed = 0;
  SplitFlags split;
  std::string out;
};

struct TrainArgs {
  std::string data;
  std::string out;
  train::TrainConfig train;
  std::string preset = "desk";
  std::string objective = "semi";
  std::size_t embed_dim = 0;
  std::vector<std::size_t> g_hidden;
  std::vector<std::size_t> h_hidden;
  double dropout = 0.4;
  bool no_normalize_q = false;
  bool no_normalize_z = false;
  CLI::Option* embed_opt = nullptr;
  CLI::Option* g_opt = nullptr;
  CLI::Option* h_opt = nullptr;
  CLI::Option* dropout_opt = nullptr;
};

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string split;
  std::string alphas = "0:1:0.1";
  std::vector<std::string> protocols{"ssl", "genre"};
  std::vector<std::size_t> ks{1, 10};
  std::size_t subset_size = 2000;
  std::size_t subsets = 4;
  std::uint64_t subset_seed = 0;
  bool exclude_own_pair = false;
  std::string select_split;
  std::string out;
};

struct ServeArgs {
  std::string checkpoint;
  std::string data;
  std::string split = "test";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";
  std::size_t subset_size = 0;
  std::size_t subsets = 4;
};

struct InspectArgs {
  std::string path;
};

// ---------------------------------------------------------------------------
// synth

void add_synth(CLI::App& app, SynthArgs& a) {
  auto* c = app.add_subcommand("synth", "Generate a seeded synthetic music/video dataset");
  auto& s = a.config;
  c->add_option("--classes", s.num_classes, "Number of classes")->capture_default_str()
      ->check(CLI::PositiveNumber);
  c->add_option("--per-class", s.items_per_class, "Items per class")->capture_default_str()
      ->check(CLI::PositiveNumber);
  c->add_option("--audio-dim", s.audio_dim, "Audio feature width")->capture_default_str();
  c->add_option("--video-dim", s.video_dim, "Video feature width")->capture_default_str();
  c->add_option("--audio-layers", s.audio_layers, "Stacked audio layers (0 = single layer)")
      ->capture_default_str();
  c->add_option("--rho", s.rho, "Pair correlation in [0, 1]")->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  c->add_option("--sep", s.class_sep, "Class separation (>= 0)")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  c->add_option("--noise", s.noise, "Per-modality noise scale")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  c->add_option("--pair-dim", s.pair_latent_dim, "Pair-identity latent width")
      ->capture_default_str();
  c->add_option("--class-dim", s.class_latent_dim, "Class-center latent width")
      ->capture_default_str();
  c->add_flag("--independent-class-centers", s.independent_class_centers,
              "Draw separate class centers for audio and video");
  c->add_option("--seed", s.seed, "Generator and split seed")->capture_default_str();
  a.split.add(c);
  c->add_option("--out", a.out, "Output directory")->required();
}

int run_synth(SynthArgs& a, std::ostream& out) {
  a.config.fractions = a.split.fractions();
  const data::Dataset d = data::generate_synthetic(a.config);
  data::save_dataset(a.out, d);
  const auto counts = d.manifest.split_counts();
  const json summary = {
      {"reproducibility", reproducibility_stanza("synth", a.config.seed, a.config)},
      {"items", d.manifest.items.size()},
      {"split_counts", {{"train", counts[0]}, {"val", counts[1]}, {"test", counts[2]}}},
      {"files", {data::kManifestFile, d.manifest.header.audio_features,
                 d.manifest.header.video_features}}};
  write_json(fs::path(a.out) / "synth.json", summary);
  out << summary.dump() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// split: raw labeled items -> condensed, stratified dataset

void add_ingest(CLI::App& app, IngestArgs& a) {
  auto* c = app.add_subcommand(
      "split", "Condense raw multi-label items through a taxonomy and split them by class");
  c->add_option("--items", a.items,
                "JSONL of {\"id\", \"labels\": [...], optional \"row\"}; row defaults to the line index")
      ->required()->check(CLI::ExistingFile);
  c->add_option("--audio", a.audio, "Audio feature file")->required()->check(CLI::ExistingFile);
  c->add_option("--video", a.video, "Video feature file")->required()->check(CLI::ExistingFile);
  c->add_option("--taxonomy", a.taxonomy,
                "Taxonomy TSV (<class>\\t<original label>); defaults to the built-in genre table");
  c->add_option("--audio-layers", a.audio_layers, "Stacked audio layers in the audio file")
      ->capture_default_str();
  c->add_option("--seed", a.seed, "Split seed")->capture_default_str();
  a.split.add(c);
  c->add_option("--out", a.out, "Output directory")->required();
}

int run_ingest(const IngestArgs& a, std::ostream& out) {
  const auto taxonomy =
      a.taxonomy.empty() ? data::GenreTaxonomy::audioset_genres() : data::GenreTaxonomy::load(a.taxonomy);
  const auto audio = data::read_features(a.audio);
  const auto video = data::read_features(a.video);
  if (audio.rows != video.rows) {
    throw DimensionConflictError("audio has " + std::to_string(audio.rows) + " rows, video " +
                                 std::to_string(video.rows));
  }
  if (a.audio_layers > 0 && audio.cols % a.audio_layers != 0) {
    throw DimensionConflictError("audio width " + std::to_string(audio.cols) +
                                 " is not divisible by " + std::to_string(a.audio_layers) + " layers");
  }

  data::DatasetManifest m;
  m.header.audio_layers = a.audio_layers;
  m.header.audio_dim = a.audio_layers > 0 ? audio.cols / a.audio_layers : audio.cols;
  m.header.video_dim = video.cols;
  m.header.class_names = taxonomy.class_names();

  std::ifstream in(a.items);
  std::string line;
  std::size_t line_no = 0;
  json rejected = json::array();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(a.items + " line " + std::to_string(line_no) + ": " + e.what());
    }
    data::MusicVideoItem item;
    std::vector<std::string> labels;
    try {
      item.id = rec.at("id").get<std::string>();
      labels = rec.at("labels").get<std::vector<std::string>>();
      item.row = rec.contains("row") ? rec["row"].get<std::uint64_t>() : line_no - 1;
    } catch (const json::exception& e) {
      throw FormatError(a.items + " line " + std::to_string(line_no) + ": " + e.what());
    }
    if (item.row >= audio.rows) {
      throw DimensionConflictError("item '" + item.id + "' references feature row " +
                                   std::to_string(item.row) + " of " + std::to_string(audio.rows));
    }
    const auto r = data::condense_labels(labels, taxonomy);
    if (r.status != data::CondenseStatus::kAccepted) {
      rejected.push_back(
          {{"id", item.id},
           {"reason", r.status == data::CondenseStatus::kRejectedMultiLabel ? "multi_label"
                                                                          : "no_label"}});
      continue;
    }
    item.genre = r.class_id;
    m.items.push_back(std::move(item));
  }
  m.validate();
  auto split = data::stratified_split(std::move(m), a.split.fractions(), a.seed);

  data::Dataset d;
  d.manifest = std::move(split.manifest);
  d.audio = audio.to_matrix();
  d.video = video.to_matrix();
  data::save_dataset(a.out, d);

  const json config = {{"items", a.items},
                       {"audio", a.audio},
                       {"video", a.video},
                       {"taxonomy", a.taxonomy.empty() ? "builtin" : a.taxonomy},
                       {"audio_layers", a.audio_layers},
                       {"fractions", {a.split.train, a.split.val, a.split.test}}};
  const auto counts = d.manifest.split_counts();
  const json summary = {
      {"reproducibility", reproducibility_stanza("split", a.seed, config)},
      {"accepted", d.manifest.items.size()},
      {"rejected", rejected},
      {"warnings", split.warnings},
      {"split_counts", {{"train", counts[0]}, {"val", counts[1]}, {"test", counts[2]}}}};
  write_json(fs::path(a.out) / "split.json", summary);
  out << json{{"accepted", d.manifest.items.size()}, {"rejected", rejected.size()}}.dump() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

void add_train(CLI::App& app, TrainArgs& a) {
  auto* c = app.add_subcommand("train", "Train the dual-branch model with balanced batches");
  auto& t = a.train;
  c->add_option("--data,--manifest", a.data, "Dataset directory or manifest.jsonl")->required();
  c->add_option("--out", a.out, "Output directory for best.ckpt and logs")->required();
  c->add_option("--epochs", t.epochs, "Training epochs")->capture_default_str()
      ->check(CLI::PositiveNumber);
  c->add_option("--batch-size", t.batch_size, "Batch size")->capture_default_str()
      ->check(CLI::PositiveNumber);
  c->add_option("--lr", t.learning_rate, "AdamW learning rate")->capture_default_str();
  c->add_option("--weight-decay", t.weight_decay, "AdamW decoupled weight decay")
      ->capture_default_str();
  c->add_option("--alpha", t.train_alpha, "Training combination weight in [0, 1]")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  c->add_option("--temperature", t.temperature, "Contrastive temperature")->capture_default_str()
      ->check(CLI::PositiveNumber);
  c->add_option("--seed", t.seed, "Master seed (init, sampler and dropout streams)")
      ->capture_default_str();
  c->add_option("--w-ssl-z", t.loss_weights.ssl_z, "Weight of the combined self-supervised loss")
      ->capture_default_str();
  c->add_option("--w-sup-z", t.loss_weights.sup_z, "Weight of the combined supervised loss")
      ->capture_default_str();
  c->add_option("--w-ssl-h", t.loss_weights.ssl_h, "Weight of the q_ssl self-supervised loss")
      ->capture_default_str();
  c->add_option("--w-sup-h", t.loss_weights.sup_h, "Weight of the q_sup supervised loss")
      ->capture_default_str();
  c->add_option("--objective", a.objective,
                "semi keeps the weights; ssl zeroes the supervised ones; sup zeroes the "
                "self-supervised ones")
      ->capture_default_str()->check(CLI::IsMember({"semi", "ssl", "sup"}));
  c->add_option("--preset", a.preset, "Layer widths: desk (g 128x2, h 64, e 32) or paper "
                                      "(g 512x2, h 256, e 256)")
      ->capture_default_str()->check(CLI::IsMember({"desk", "paper"}));
  a.embed_opt = c->add_option("--embed-dim", a.embed_dim, "Embedding width (overrides preset)");
  a.g_opt = c->add_option("--g-hidden", a.g_hidden, "Shared block widths, comma separated")
                ->delimiter(',');
  a.h_opt = c->add_option("--h-hidden", a.h_hidden, "Task-head block widths, comma separated")
                ->delimiter(',');
  a.dropout_opt = c->add_option("--dropout", a.dropout, "Dropout probability in [0, 1)")
                      ->capture_default_str();
  c->add_flag("--no-normalize-q", a.no_normalize_q, "Skip L2 normalization of q embeddings");
  c->add_flag("--no-normalize-z", a.no_normalize_z,
              "Skip L2 normalization of projected and combined embeddings");
}

model::ModelConfig model_config_for(const TrainArgs& a, const data::DatasetHeader& h) {
  model::ModelConfig m = a.preset == "paper" ? model::ModelConfig::paper_scale() : model::ModelConfig{};
  m.audio_input_dim = h.audio_dim;
  m.video_input_dim = h.video_dim;
  m.num_audio_layers = h.audio_layers;
  if (a.embed_opt->count() > 0) m.embed_dim = a.embed_dim;
  if (a.g_opt->count() > 0) m.g_hidden_dims = a.g_hidden;
  if (a.h_opt->count() > 0) m.h_hidden_dims = a.h_hidden;
  if (a.dropout_opt->count() > 0) m.dropout_p = a.dropout;
  m.normalize_q = !a.no_normalize_q;
  m.normalize_z = !a.no_normalize_z;
  return m;
}

int run_train(TrainArgs& a, std::ostream& out) {
  const data::Dataset d = data::load_dataset(a.data);
  const auto mc = model_config_for(a, d.manifest.header);
  train::TrainConfig tc = a.train;
  if (a.objective == "ssl") tc.loss_weights.sup_z = tc.loss_weights.sup_h = 0.0;
  if (a.objective == "sup") tc.loss_weights.ssl_z = tc.loss_weights.ssl_h = 0.0;

  const json config = {{"data", a.data}, {"model", mc}, {"train", tc}};
  const json stanza = reproducibility_stanza("train", tc.seed, config);
  out << json{{"reproducibility", stanza}}.dump() << "\n";

  const fs::path dir(a.out);
  auto on_epoch = [&](const train::EpochRecord& r, bool improved) {
    char line[160];
    std::snprintf(line, sizeof line, "epoch %3zu  train %.6f  val %.6f%s", r.epoch, r.train.total,
                  r.val.total, improved ? "  *" : "");
    out << line << std::endl;
  };
  const auto result = train::train(d, mc, tc, dir, on_epoch);

  json log = train::log_to_json(result.log);
  write_json(dir / "train_log.json", {{"reproducibility", stanza},
                                      {"log", log},
                                      {"best_checkpoint", train::kBestCheckpoint}});
  write_json(dir / "timing.json", train::timing_to_json(result.log));
  out << json{{"best_epoch", result.log.best_epoch},
              {"best_val_total", result.log.best_val_total()},
              {"checkpoint", (dir / train::kBestCheckpoint).string()}}
             .dump()
      << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval / sweep

void add_eval(CLI::App& app, EvalArgs& a, bool sweep) {
  auto* c = app.add_subcommand(
      sweep ? "sweep" : "eval",
      sweep ? "Sweep alpha on a split and report the controllability curves"
            : "Evaluate both retrieval protocols over an alpha grid");
  c->add_option("--checkpoint,--ckpt", a.checkpoint,
                "Checkpoint file, path without .ckpt, or training directory")
      ->required();
  c->add_option("--data,--manifest", a.data, "Dataset directory or manifest.jsonl")->required();
  c->add_option("--split", a.split, "Split to evaluate")->capture_default_str()
      ->check(CLI::IsMember({"train", "val", "test"}));
  c->add_option("--alphas", a.alphas, "lo:hi:step or a comma-separated list")
      ->capture_default_str();
  c->add_option("--protocol", a.protocols, "ssl, genre or both (comma separated)")
      ->delimiter(',')->capture_default_str()->check(CLI::IsMember({"ssl", "genre"}));
  c->add_option("--ks", a.ks, "K values for R@K and P@K")->delimiter(',')->capture_default_str();
  c->add_option("--subset-size", a.subset_size,
                "Items per self-supervised subset; 0 uses floor(n / subsets)")
      ->capture_default_str();
  c->add_option("--subsets", a.subsets, "Number of disjoint subsets")->capture_default_str()
      ->check(CLI::PositiveNumber);
  c->add_option("--subset-seed", a.subset_seed, "Seed of the subset shuffle")
      ->capture_default_str();
  c->add_flag("--exclude-own-pair", a.exclude_own_pair,
              "Drop the query's own pair from genre-protocol candidates");
  c->add_option("--select-split", a.select_split,
                "Also pick the best alpha per protocol on this split and report it")
      ->check(CLI::IsMember({"train", "val", "test"}));
  c->add_option("--out", a.out, sweep ? "Output directory (optional)" : "Output directory")
      ->required(!sweep);
}

int run_eval(const EvalArgs& a, bool sweep, std::ostream& out) {
  const auto ckpt_path = train::resolve_checkpoint_path(a.checkpoint);
  const auto ckpt = train::load_checkpoint(ckpt_path);
  const auto d = data::load_dataset(a.data);
  train::check_compatible(ckpt.model.config, d.manifest.header);

  std::vector<retrieval::Protocol> protocols;
  for (const auto& p : a.protocols) protocols.push_back(retrieval::parse_protocol(p));
  retrieval::EvalOptions opt;
  opt.ks = a.ks;
  opt.subset_size = a.subset_size;
  opt.subset_count = a.subsets;
  opt.subset_seed = a.subset_seed;
  opt.exclude_own_pair = a.exclude_own_pair;
  const auto alphas = retrieval::parse_alphas(a.alphas);
  const auto which = data::parse_split(a.split);

  const auto corpus = retrieval::embed_corpus(ckpt.model, d, which);
  const auto fitted = retrieval::fit_subsets(opt, corpus.size());
  auto report = retrieval::alpha_sweep(corpus, alphas, protocols, fitted);
  report.split = a.split;

  const json config = {{"checkpoint", ckpt_path.filename().string()},
                       {"checkpoint_epoch", ckpt.epoch},
                       {"data", a.data},
                       {"split", a.split},
                       {"alphas", alphas},
                       {"protocols", a.protocols},
                       {"ks", a.ks},
                       {"subset_size", fitted.subset_size},
                       {"subsets", a.subsets},
                       {"subset_seed", a.subset_seed},
                       {"exclude_own_pair", a.exclude_own_pair},
                       {"select_split", a.select_split}};
  json doc = retrieval::to_json(report);
  doc["reproducibility"] =
      reproducibility_stanza(sweep ? "sweep" : "eval", ckpt.train_config.seed, config);

  if (!a.select_split.empty()) {
    const auto sel = retrieval::embed_corpus(ckpt.model, d, data::parse_split(a.select_split));
    const auto sel_opt = retrieval::fit_subsets(opt, sel.size());
    const auto sel_report = retrieval::alpha_sweep(sel, alphas, protocols, sel_opt);
    const std::size_t k = *std::max_element(a.ks.begin(), a.ks.end());
    json selected = json::object();
    for (auto p : protocols) {
      const double best = retrieval::select_optimal_alpha(sel_report, p, k);
      const auto metrics = retrieval::alpha_sweep(corpus, {best}, {p}, fitted);
      selected[retrieval::to_string(p)] = {{"alpha", best},
                                           {"metric_k", k},
                                           {"selected_on", a.select_split},
                                           {"report", retrieval::to_json(metrics)["rows"][0]}};
    }
    doc["selected"] = selected;
  }

  const std::string table = retrieval::format_table(report);
  const std::string stem = sweep ? "sweep" : "report";
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    write_json(fs::path(a.out) / (stem + ".json"), doc);
    write_text(fs::path(a.out) / (stem + ".txt"), table);
    write_text(fs::path(a.out) / "series.csv", retrieval::format_series_csv(report));
  }
  out << table;
  json summary = {{"split", a.split}, {"corpus_size", corpus.size()}};
  if (doc.contains("optimal_alpha")) summary["optimal_alpha"] = doc["optimal_alpha"];
  if (doc.contains("selected")) {
    for (auto& [p, s] : doc["selected"].items()) summary["selected_alpha"][p] = s["alpha"];
  }
  out << summary.dump() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// serve

void add_serve(CLI::App& app, ServeArgs& a) {
  auto* c = app.add_subcommand("serve", "Serve alpha-controlled retrieval over HTTP");
  c->add_option("--checkpoint,--ckpt", a.checkpoint,
                "Checkpoint file, path without .ckpt, or training directory")
      ->required();
  c->add_option("--data,--manifest", a.data, "Dataset directory or manifest.jsonl")->required();
  c->add_option("--split", a.split, "Items to serve: train, val, test or all")
      ->capture_default_str()->check(CLI::IsMember({"train", "val", "test", "all"}));
  c->add_option("--host", a.host, "Bind address")->capture_default_str();
  c->add_option("--port", a.port, "Port (0 picks a free one)")->capture_default_str()
      ->check(CLI::Range(0, 65535));
  c->add_option("--cors-origin", a.cors_origin, "Access-Control-Allow-Origin value")
      ->capture_default_str();
  c->add_option("--subset-size", a.subset_size,
                "Self-supervised subset size for the cached sweep; 0 uses floor(n / subsets)")
      ->capture_default_str();
  c->add_option("--subsets", a.subsets, "Subset count for the cached sweep")
      ->capture_default_str()->check(CLI::PositiveNumber);
}

int run_serve(const ServeArgs& a, std::ostream& out) {
  const auto ckpt_path = train::resolve_checkpoint_path(a.checkpoint);
  const auto ckpt = train::load_checkpoint(ckpt_path);
  const auto d = data::load_dataset(a.data);
  service::ServiceOptions opt;
  opt.split = a.split;
  opt.cors_origin = a.cors_origin;
  opt.sweep.subset_size = a.subset_size;
  opt.sweep.subset_count = a.subsets;
  auto state = std::make_shared<const service::ServiceState>(service::make_state(ckpt, d, opt));
  service::Server server(state);
  const int port = server.bind(a.host, a.port);
  const json config = {{"checkpoint", ckpt_path.filename().string()},
                       {"data", a.data},
                       {"split", a.split},
                       {"subset_size", a.subset_size},
                       {"subsets", a.subsets}};
  out << json{{"reproducibility",
               reproducibility_stanza("serve", ckpt.train_config.seed, config)},
              {"listening", "http://" + a.host + ":" + std::to_string(port)},
              {"items", state->corpus.size()}}
             .dump()
      << std::endl;
  server.listen();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// inspect

void add_inspect(CLI::App& app, InspectArgs& a) {
  auto* c = app.add_subcommand("inspect",
                               "Describe a checkpoint, feature file, manifest or dataset directory");
  c->add_option("path", a.path, "File or directory to describe")->required()
      ->check(CLI::ExistingPath);
}

std::string magic_of(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  char buf[8] = {};
  f.read(buf, sizeof buf);
  return std::string(buf, static_cast<std::size_t>(f.gcount()));
}

int run_inspect(const InspectArgs& a, std::ostream& out) {
  const fs::path p(a.path);
  json doc;
  if (!fs::is_directory(p) && magic_of(p) == "DUETCKPT") {
    const auto c = train::load_checkpoint(p);
    json tensors = json::array();
    auto& m = const_cast<model::Model&>(c.model);
    for (const auto& t : m.parameters()) {
      tensors.push_back({{"name", t.name}, {"rows", t.value->rows()}, {"cols", t.value->cols()}});
    }
    doc = {{"kind", "checkpoint"},
           {"model_config", c.model.config},
           {"train_config", c.train_config},
           {"epoch", c.epoch},
           {"optimizer_step", c.optimizer.step},
           {"parameter_count", c.model.parameter_count()},
           {"tensors", tensors}};
  } else if (!fs::is_directory(p) &&
             magic_of(p) == std::string(data::kFeatureMagic, sizeof data::kFeatureMagic)) {
    const auto f = data::read_features(p);
    doc = {{"kind", "features"}, {"rows", f.rows}, {"cols", f.cols}};
  } else {
    const auto d = data::load_dataset(p);
    const auto& h = d.manifest.header;
    const auto counts = d.manifest.split_counts();
    std::vector<std::size_t> per_class(h.class_names.size(), 0);
    for (const auto& it : d.manifest.items) ++per_class[static_cast<std::size_t>(it.genre)];
    json classes = json::object();
    for (std::size_t c = 0; c < per_class.size(); ++c) classes[h.class_names[c]] = per_class[c];
    doc = {{"kind", "dataset"},
           {"items", d.manifest.items.size()},
           {"audio_dim", h.audio_dim},
           {"audio_layers", h.audio_layers},
           {"video_dim", h.video_dim},
           {"class_names", h.class_names},
           {"class_counts", classes},
           {"split_counts", {{"train", counts[0]}, {"val", counts[1]}, {"test", counts[2]}}}};
  }
  doc["reproducibility"] = reproducibility_stanza("inspect", 0, {{"path", a.path}});
  out << doc.dump(2) << "\n";
  return kExitOk;
}

std::string one_line(std::string s) {
  for (auto& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message,
                 int code) {
  err << json{{"error", {{"kind", kind}, {"message", one_line(message)}, {"exit", code}}}}.dump()
      << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"duet: controllable cross-modal music/video embeddings", "duet"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML or INI file; flags on the command line take precedence");
  app.get_formatter()->column_width(34);

  SynthArgs synth;
  IngestArgs ingest;
  TrainArgs train_args;
  EvalArgs eval_args;
  eval_args.split = "test";
  EvalArgs sweep_args;
  sweep_args.split = "val";
  sweep_args.subset_size = 0;
  ServeArgs serve;
  InspectArgs inspect;
  add_synth(app, synth);
  add_ingest(app, ingest);
  add_train(app, train_args);
  add_eval(app, eval_args, false);
  add_eval(app, sweep_args, true);
  add_serve(app, serve);
  add_inspect(app, inspect);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and --version.
      std::ostringstream o;
      std::ostringstream ignored;
      app.exit(e, o, ignored);
      out << o.str();
      return kExitOk;
    }
    print_error(err, "usage", e.what(), kExitUsage);
    return kExitUsage;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "synth") return run_synth(synth, out);
    if (cmd == "split") return run_ingest(ingest, out);
    if (cmd == "train") return run_train(train_args, out);
    if (cmd == "eval") return run_eval(eval_args, false, out);
    if (cmd == "sweep") return run_eval(sweep_args, true, out);
    if (cmd == "serve") return run_serve(serve, out);
    if (cmd == "inspect") return run_inspect(inspect, out);
  } catch (const Error& e) {
    print_error(err, e.kind(), e.what(), kExitRuntime);
    return kExitRuntime;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what(), kExitRuntime);
    return kExitRuntime;
  }
  print_error(err, "usage", "unknown command " + cmd, kExitUsage);
  return kExitUsage;
}

}  // namespace duet::cli
