// Copyright 2026 The AIRI Authors.
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

// YAML run configs. Keys are the field names of PagtnConfig and TrainConfig
// in one flat mapping, e.g.
//
//   depth: 4
//   hidden_size: 64
//   lr: 5.0e-4
//   optimizer: adamw

#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <yaml-cpp/yaml.h>

#include "airi/pagtn.hpp"
#include "airi/train.hpp"

namespace airi {

struct RunConfig {
  PagtnConfig model;
  TrainConfig train;
  bool operator==(const RunConfig&) const = default;
};

namespace detail {

template <class T>
void read_key(const YAML::Node& node, const char* key, T& out, std::set<std::string>& seen) {
  const YAML::Node v = node[key];
  if (!v) return;
  seen.insert(key);
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    throw Error(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace detail

// dropout (training) and dropout_p (model) name the same rate. Either may be
// given; if both are, they must agree.
inline RunConfig parse_run_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw FormatError(std::string("bad YAML: ") + e.what());
  }
  RunConfig rc;
  if (root.IsNull()) return rc;
  if (!root.IsMap()) throw FormatError("config must be a YAML mapping");

  std::set<std::string> seen;
  PagtnConfig& m = rc.model;
  TrainConfig& t = rc.train;
  detail::read_key(root, "depth", m.depth, seen);
  detail::read_key(root, "heads", m.heads, seen);
  detail::read_key(root, "max_path_len", m.max_path_len, seen);
  detail::read_key(root, "hidden_size", m.hidden_size, seen);
  detail::read_key(root, "query_size", m.query_size, seen);
  detail::read_key(root, "leaky_slope", m.leaky_slope, seen);
  detail::read_key(root, "use_residual", m.use_residual, seen);
  detail::read_key(root, "output_scale", m.output_scale, seen);
  std::optional<double> dropout, dropout_p;
  if (root["dropout"]) dropout.emplace(), detail::read_key(root, "dropout", *dropout, seen);
  if (root["dropout_p"]) dropout_p.emplace(), detail::read_key(root, "dropout_p", *dropout_p, seen);
  detail::read_key(root, "lr", t.lr, seen);
  detail::read_key(root, "batch_size", t.batch_size, seen);
  detail::read_key(root, "clip_norm", t.clip_norm, seen);
  detail::read_key(root, "max_epochs", t.max_epochs, seen);
  detail::read_key(root, "patience", t.patience, seen);
  detail::read_key(root, "max_steps", t.max_steps, seen);
  std::string optimizer = to_string(t.optimizer);
  detail::read_key(root, "optimizer", optimizer, seen);
  t.optimizer = parse_optimizer(optimizer);
  detail::read_key(root, "beta1", t.beta1, seen);
  detail::read_key(root, "beta2", t.beta2, seen);
  detail::read_key(root, "eps", t.eps, seen);
  detail::read_key(root, "weight_decay", t.weight_decay, seen);
  detail::read_key(root, "seed", t.seed, seen);

  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    if (!seen.count(key)) throw Error("unknown config key '" + key + "'");
  }
  if (dropout && dropout_p && *dropout != *dropout_p) {
    throw Error("config gives dropout and dropout_p with different values");
  }
  if (dropout) t.dropout = *dropout;
  else if (dropout_p) t.dropout = *dropout_p;
  m.dropout_p = t.dropout;
  m.validate();
  t.validate();
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return parse_run_config(ss.str());
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace airi
