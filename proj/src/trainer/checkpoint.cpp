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


#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "duet/errors.hpp"
#include "duet/trainer/trainer.hpp"

namespace duet::train {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'D', 'U', 'E', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kPreamble = 24;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void put_matrix(std::string& out, const num::Matrix& m) {
  for (double d : m.data()) put_u64(out, std::bit_cast<std::uint64_t>(d));
}

}  // namespace

void save_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
  auto& model = const_cast<model::Model&>(ckpt.model);
  const auto params = model.parameters();
  if (ckpt.optimizer.first_moment.size() != params.size() ||
      ckpt.optimizer.second_moment.size() != params.size()) {
    throw ShapeError("checkpoint optimizer state does not match the model parameters");
  }

  json tensors = json::array();
  for (const auto& p : params) {
    tensors.push_back({{"name", p.name}, {"rows", p.value->rows()}, {"cols", p.value->cols()}});
  }
  const auto& opt = ckpt.optimizer;
  const json meta = {
      {"model_config", ckpt.model.config},
      {"train_config", ckpt.train_config},
      {"epoch", ckpt.epoch},
      {"seed", ckpt.train_config.seed},
      {"train_alpha", ckpt.train_config.train_alpha},
      {"tensors", tensors},
      {"optimizer",
       {{"step", opt.step},
        {"learning_rate", opt.config.learning_rate},
        {"beta1", opt.config.beta1},
        {"beta2", opt.config.beta2},
        {"epsilon", opt.config.epsilon},
        {"weight_decay", opt.config.weight_decay}}},
  };
  const std::string meta_text = meta.dump();

  std::string bytes(kMagic, sizeof kMagic);
  put_u32(bytes, kVersion);
  put_u32(bytes, 0);
  put_u64(bytes, meta_text.size());
  bytes += meta_text;
  for (const auto& p : params) put_matrix(bytes, *p.value);
  for (const auto& m : opt.first_moment) put_matrix(bytes, m);
  for (const auto& m : opt.second_moment) put_matrix(bytes, m);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  auto fail = [&](std::size_t offset, const std::string& what) {
    throw FormatError(path.string() + " at byte " + std::to_string(offset) + ": " + what);
  };
  if (bytes.size() < kPreamble) fail(bytes.size(), "truncated preamble");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) fail(0, "bad magic number");
  const std::uint32_t version = static_cast<std::uint32_t>(get_u64(bytes.data() + 8) & 0xffffffffu);
  if (version != kVersion) fail(8, "unsupported version " + std::to_string(version));
  const std::uint64_t meta_len = get_u64(bytes.data() + 16);
  if (bytes.size() - kPreamble < meta_len) fail(bytes.size(), "truncated metadata");

  json meta;
  try {
    meta = json::parse(bytes.begin() + kPreamble, bytes.begin() + kPreamble + meta_len);
  } catch (const json::exception& e) {
    fail(kPreamble, std::string("bad metadata: ") + e.what());
  }

  Checkpoint ckpt;
  try {
    const auto config = meta.at("model_config").get<model::ModelConfig>();
    num::Rng unused(0);
    ckpt.model = model::init_model(config, unused);
    ckpt.train_config = meta.at("train_config").get<TrainConfig>();
    ckpt.epoch = meta.at("epoch").get<std::size_t>();
    const auto& o = meta.at("optimizer");
    num::AdamWConfig oc;
    o.at("learning_rate").get_to(oc.learning_rate);
    o.at("beta1").get_to(oc.beta1);
    o.at("beta2").get_to(oc.beta2);
    o.at("epsilon").get_to(oc.epsilon);
    o.at("weight_decay").get_to(oc.weight_decay);
    ckpt.optimizer = num::AdamWState::for_params(ckpt.model.parameter_values(), oc);
    o.at("step").get_to(ckpt.optimizer.step);

    const auto params = ckpt.model.parameters();
    const auto& tensors = meta.at("tensors");
    if (tensors.size() != params.size()) fail(kPreamble, "tensor count does not match config");
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (tensors[i].at("name").get<std::string>() != params[i].name ||
          tensors[i].at("rows").get<std::size_t>() != params[i].value->rows() ||
          tensors[i].at("cols").get<std::size_t>() != params[i].value->cols()) {
        fail(kPreamble, "tensor '" + params[i].name + "' does not match the model config");
      }
    }
  } catch (const json::exception& e) {
    fail(kPreamble, std::string("bad metadata: ") + e.what());
  }

  std::size_t offset = kPreamble + meta_len;
  auto read_matrix = [&](num::Matrix& m) {
    if (bytes.size() - offset < 8 * m.size()) fail(bytes.size(), "truncated tensor payload");
    for (auto& d : m.data()) {
      d = std::bit_cast<double>(get_u64(bytes.data() + offset));
      offset += 8;
    }
  };
  for (auto& p : ckpt.model.parameters()) read_matrix(*p.value);
  for (auto& m : ckpt.optimizer.first_moment) read_matrix(m);
  for (auto& m : ckpt.optimizer.second_moment) read_matrix(m);
  if (offset != bytes.size()) fail(offset, "trailing bytes after payload");
  return ckpt;
}

fs::path resolve_checkpoint_path(const fs::path& path) {
  if (fs::is_directory(path)) return path / kBestCheckpoint;
  if (fs::exists(path)) return path;
  fs::path with_ext = path;
  with_ext += ".ckpt";
  if (fs::exists(with_ext)) return with_ext;
  throw FormatError("no checkpoint at " + path.string());
}

}  // namespace duet::train
