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

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "duet/data/manifest.hpp"
#include "duet/retrieval/retrieval.hpp"
#include "duet/trainer/trainer.hpp"

namespace duet::service {

struct ServiceOptions {
  // "train", "val", "test" or "all".
  std::string split = "test";
  retrieval::EvalOptions sweep;
  std::vector<double> sweep_alphas = retrieval::alpha_grid();
  std::string cors_origin = "*";
};

// Built once at startup and never mutated afterwards.
struct ServiceState {
  retrieval::EmbeddedCorpus corpus;
  std::vector<std::string> item_splits;  // aligned with corpus.ids
  nlohmann::json meta;
  retrieval::RetrievalReport sweep;
  std::string cors_origin = "*";
};

// Embeds the requested split and precomputes the sweep. When the corpus is
// smaller than subset_size x subset_count the subset size shrinks to
// floor(n / subset_count).
ServiceState make_state(const train::Checkpoint& ckpt, const data::Dataset& dataset,
                        const ServiceOptions& options = {});

struct Request {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> params;
};

struct Response {
  int status = 200;
  nlohmann::json body;
  std::map<std::string, std::string> headers;

  std::string text() const;
};

Response handle(const ServiceState& state, const Request& request);

// Individual endpoints; all are pure reads of the state.
Response get_items(const ServiceState& state, const Request& request);
Response get_retrieve(const ServiceState& state, const Request& request);
Response get_sweep(const ServiceState& state, const Request& request);
Response get_meta(const ServiceState& state);

// Scores travel rounded to 6 decimals.
double transport_round(double v);

// HTTP front end over handle().
class Server {
 public:
  explicit Server(std::shared_ptr<const ServiceState> state);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and returns the bound port (an ephemeral one when port is 0).
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  // bind + listen on a background thread.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace duet::service
