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


#include "duet/service/service.hpp"

#include <algorithm>
#include <cmath>
#include <httplib.h>

#include "duet/errors.hpp"
#include "duet/version.hpp"

namespace duet::service {

using nlohmann::json;
using retrieval::Direction;
using retrieval::Protocol;

ServiceState make_state(const train::Checkpoint& ckpt, const data::Dataset& dataset,
                        const ServiceOptions& options) {
  train::check_compatible(ckpt.model.config, dataset.manifest.header);
  const auto& items = dataset.manifest.items;
  std::vector<std::size_t> indices;
  if (options.split == "all") {
    for (std::size_t i = 0; i < items.size(); ++i) indices.push_back(i);
  } else {
    indices = dataset.manifest.indices_of(data::parse_split(options.split));
  }
  if (indices.empty()) throw ConfigError("split '" + options.split + "' has no items");

  ServiceState state;
  state.cors_origin = options.cors_origin;
  state.corpus = retrieval::embed_items(ckpt.model, dataset, indices);
  for (std::size_t i : indices) state.item_splits.emplace_back(data::to_string(items[i].split));

  const std::size_t n = state.corpus.size();
  retrieval::EvalOptions sweep = options.sweep;
  if (sweep.subset_count == 0) sweep.subset_count = 1;
  sweep = retrieval::fit_subsets(sweep, n);
  if (sweep.subset_size * sweep.subset_count > n) {
    sweep.subset_size = std::max<std::size_t>(1, n / sweep.subset_count);
    if (sweep.subset_size * sweep.subset_count > n) sweep.subset_count = 1;
  }
  std::vector<Protocol> protocols{Protocol::kSelfSupervised};
  // The genre protocol needs every class present.
  std::vector<bool> seen(state.corpus.class_names.size(), false);
  for (int l : state.corpus.labels) seen[static_cast<std::size_t>(l)] = true;
  const bool all_classes = std::find(seen.begin(), seen.end(), false) == seen.end();
  if (all_classes) protocols.push_back(Protocol::kGenre);
  state.sweep = retrieval::alpha_sweep(state.corpus, options.sweep_alphas, protocols, sweep);
  state.sweep.split = options.split;

  const auto& h = dataset.manifest.header;
  const auto& tc = ckpt.train_config;
  state.meta = {
      {"version", kVersion},
      {"model", ckpt.model.config},
      {"dims",
       {{"audio", h.audio_dim},
        {"audio_layers", h.audio_layers},
        {"video", h.video_dim},
        {"embed", ckpt.model.config.embed_dim}}},
      {"class_names", h.class_names},
      {"train_alpha", tc.train_alpha},
      {"temperature", tc.temperature},
      {"seed", tc.seed},
      {"epoch", ckpt.epoch},
      {"corpus", {{"split", options.split}, {"size", n}}},
      {"sweep",
       {{"alphas", options.sweep_alphas},
        {"ks", sweep.ks},
        {"subset_size", sweep.subset_size},
        {"subset_count", sweep.subset_count},
        {"protocols", all_classes ? json{"ssl", "genre"} : json{"ssl"}}}},
  };
  return state;
}

std::string Response::text() const { return body.dump(); }

double transport_round(double v) { return std::round(v * 1e6) / 1e6; }

namespace {

Response error(int status, const std::string& kind, const std::string& message) {
  Response r;
  r.status = status;
  r.body = {{"error", {{"kind", kind}, {"message", message}}}};
  return r;
}

std::optional<std::string> param(const Request& r, const std::string& key) {
  const auto it = r.params.find(key);
  if (it == r.params.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

// Whole-string numeric parses; anything else is a client error.
double parse_double(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used != s.size() || !std::isfinite(v)) throw ParameterError(key + " is not a number: " + s);
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 12) {
    throw ParameterError(key + " is not a non-negative integer: " + s);
  }
  return static_cast<std::size_t>(std::stoull(s));
}

}  // namespace

Response get_items(const ServiceState& state, const Request& request) {
  const auto& c = state.corpus;
  std::optional<int> cls;
  if (const auto name = param(request, "class")) {
    const auto& names = c.class_names;
    const auto it = std::find(names.begin(), names.end(), *name);
    if (it == names.end()) return error(400, "unknown_class", "unknown class '" + *name + "'");
    cls = static_cast<int>(it - names.begin());
  }
  std::optional<std::string> split;
  if (const auto s = param(request, "split")) {
    try {
      split = std::string(data::to_string(data::parse_split(*s)));
    } catch (const Error&) {
      return error(400, "unknown_split", "unknown split '" + *s + "'");
    }
  }
  std::size_t limit = 100;
  std::size_t offset = 0;
  try {
    if (const auto l = param(request, "limit")) limit = parse_count("limit", *l);
    if (const auto o = param(request, "offset")) offset = parse_count("offset", *o);
  } catch (const ParameterError& e) {
    return error(400, "bad_parameter", e.what());
  }

  json items = json::array();
  std::size_t total = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (cls && c.labels[i] != *cls) continue;
    if (split && state.item_splits[i] != *split) continue;
    if (total >= offset && items.size() < limit) {
      items.push_back({{"id", c.ids[i]},
                       {"genre", c.class_names[static_cast<std::size_t>(c.labels[i])]},
                       {"split", state.item_splits[i]}});
    }
    ++total;
  }
  Response r;
  r.body = {{"total", total}, {"offset", offset}, {"limit", limit}, {"items", items}};
  r.headers["X-Total-Count"] = std::to_string(total);
  return r;
}

Response get_retrieve(const ServiceState& state, const Request& request) {
  retrieval::RetrievalQuery q;
  try {
    const auto id = param(request, "query_id");
    if (!id) return error(400, "bad_parameter", "query_id is required");
    q.query_id = *id;
    if (const auto d = param(request, "direction")) q.direction = retrieval::parse_direction(*d);
    if (const auto a = param(request, "alpha")) q.alpha = parse_double("alpha", *a);
    if (const auto k = param(request, "k")) q.k = parse_count("k", *k);
    if (!(q.alpha >= 0.0 && q.alpha <= 1.0)) {
      return error(400, "bad_alpha", "alpha must lie in [0, 1]");
    }
    if (q.k < 1) return error(400, "bad_parameter", "k must be at least 1");
  } catch (const ParameterError& e) {
    return error(400, "bad_parameter", e.what());
  }

  const auto qi = state.corpus.index_of(q.query_id);
  if (!qi) return error(404, "unknown_id", "unknown item id '" + q.query_id + "'");
  const auto ranked = retrieval::rank(state.corpus, q);
  const int qlabel = state.corpus.labels[*qi];
  json results = json::array();
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& r = ranked[i];
    const int label = state.corpus.labels[r.index];
    results.push_back({{"rank", i + 1},
                       {"id", r.id},
                       {"score", transport_round(r.score)},
                       {"genre", state.corpus.class_names[static_cast<std::size_t>(label)]},
                       {"same_pair", r.index == *qi},
                       {"same_genre", label == qlabel}});
  }
  Response out;
  out.body = {{"query_id", q.query_id},
              {"query_genre", state.corpus.class_names[static_cast<std::size_t>(qlabel)]},
              {"direction", retrieval::to_string(q.direction)},
              {"alpha", q.alpha},
              {"k", q.k},
              {"candidates", state.corpus.size()},
              {"results", results}};
  return out;
}

Response get_sweep(const ServiceState& state, const Request& request) {
  Protocol p = Protocol::kSelfSupervised;
  std::optional<Direction> d;
  std::size_t k = 10;
  try {
    if (const auto s = param(request, "protocol")) p = retrieval::parse_protocol(*s);
    if (const auto s = param(request, "direction"); s && *s != "mean") {
      d = retrieval::parse_direction(*s);
    }
    if (const auto s = param(request, "k")) k = parse_count("k", *s);
  } catch (const ParameterError& e) {
    return error(400, "bad_parameter", e.what());
  }
  const auto& ks = state.sweep.options.ks;
  if (std::find(ks.begin(), ks.end(), k) == ks.end()) {
    return error(400, "bad_parameter", "k=" + std::to_string(k) + " was not swept");
  }
  std::vector<std::pair<double, double>> series;
  try {
    series = state.sweep.series(p, k, d);
  } catch (const ProtocolError& e) {
    return error(400, "unavailable", e.what());
  }
  json points = json::array();
  for (const auto& [a, v] : series) points.push_back({{"alpha", a}, {"value", v}});
  Response r;
  r.body = {{"protocol", retrieval::to_string(p)},
            {"metric", std::string(p == Protocol::kSelfSupervised ? "R@" : "P@") + std::to_string(k)},
            {"direction", d ? retrieval::to_string(*d) : "mean"},
            {"optimal_alpha", retrieval::select_optimal_alpha(state.sweep, p, k)},
            {"points", points}};
  return r;
}

Response get_meta(const ServiceState& state) {
  Response r;
  r.body = state.meta;
  return r;
}

Response handle(const ServiceState& state, const Request& request) {
  Response r;
  if (request.method != "GET") {
    r = error(405, "method_not_allowed", "only GET is supported");
  } else if (request.path == "/items") {
    r = get_items(state, request);
  } else if (request.path == "/retrieve") {
    r = get_retrieve(state, request);
  } else if (request.path == "/sweep") {
    r = get_sweep(state, request);
  } else if (request.path == "/meta") {
    r = get_meta(state);
  } else {
    r = error(404, "not_found", "no endpoint " + request.path);
  }
  return r;
}

struct Server::Impl {
  std::shared_ptr<const ServiceState> state;
  httplib::Server http;
  std::thread worker;
};

Server::Server(std::shared_ptr<const ServiceState> state) : impl_(std::make_unique<Impl>()) {
  impl_->state = std::move(state);
  const std::string origin = impl_->state->cors_origin;
  impl_->http.set_default_headers({{"Access-Control-Allow-Origin", origin},
                                   {"Access-Control-Allow-Methods", "GET, OPTIONS"},
                                   {"Access-Control-Allow-Headers", "Content-Type"},
                                   {"Access-Control-Expose-Headers", "X-Total-Count"}});
  impl_->http.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  auto serve = [state = impl_->state](const httplib::Request& req, httplib::Response& res) {
    Request r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.params.emplace(k, v);
    Response out;
    try {
      out = handle(*state, r);
    } catch (const std::exception& e) {
      out.status = 500;
      out.body = {{"error", {{"kind", "internal"}, {"message", e.what()}}}};
    }
    res.status = out.status;
    for (const auto& [k, v] : out.headers) res.set_header(k, v);
    res.set_content(out.text(), "application/json");
  };
  impl_->http.Get(R"(.*)", serve);
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->http.bind_to_any_port(host);
    if (p < 0) throw ConfigError("cannot bind " + host);
    return p;
  }
  if (!impl_->http.bind_to_port(host, port)) {
    throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void Server::listen() { impl_->http.listen_after_bind(); }

int Server::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  impl_->worker = std::thread([this] { listen(); });
  impl_->http.wait_until_ready();
  return bound;
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace duet::service
