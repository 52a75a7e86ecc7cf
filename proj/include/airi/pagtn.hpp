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

// Path-augmented graph transformer.
//
// Atoms are embedded as the sum of per-feature tables and pair paths by a
// linear projection P = f W_path of the flattened path features f. Each layer
// and head scores
//
//   e_ij = a . leaky_relu(W_q h_i + W_ka h_j + W_kp p_ij)
//
// normalizes over j != i, and aggregates c_i = sum_j alpha_ij (W_v h_j +
// W_pv p_ij). The layer update is dropout(relu(concat_heads(c) + bias)),
// added to H when residuals are on. The readout is linear in the sum of the
// final atom states. Outputs are RI / 10000.

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "airi/error.hpp"
#include "airi/featurize.hpp"
#include "airi/rng.hpp"
#include "airi/tensor.hpp"
#include "json.hpp"

namespace airi {

struct PagtnConfig {
  int depth = 8;
  int heads = 1;
  int max_path_len = 5;
  int hidden_size = 280;
  int query_size = 280;
  double dropout_p = 0.2;
  double leaky_slope = 0.01;
  bool use_residual = true;
  double output_scale = kTargetScale;

  void validate() const {
    if (depth < 1) throw Error("depth must be at least 1");
    if (heads < 1) throw Error("heads must be at least 1");
    if (max_path_len < 1) throw Error("max_path_len must be at least 1");
    if (hidden_size < 1 || query_size < 1) throw Error("hidden_size and query_size must be positive");
    if (hidden_size % heads != 0) throw Error("hidden_size must be divisible by heads");
    if (query_size % heads != 0) throw Error("query_size must be divisible by heads");
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw Error("dropout_p must lie in [0, 1)");
    if (output_scale <= 0.0) throw Error("output_scale must be positive");
  }
  bool operator==(const PagtnConfig&) const = default;
};

inline void to_json(nlohmann::json& j, const PagtnConfig& c) {
  j = nlohmann::json{{"depth", c.depth},
                     {"heads", c.heads},
                     {"max_path_len", c.max_path_len},
                     {"hidden_size", c.hidden_size},
                     {"query_size", c.query_size},
                     {"dropout_p", c.dropout_p},
                     {"leaky_slope", c.leaky_slope},
                     {"use_residual", c.use_residual},
                     {"output_scale", c.output_scale}};
}

inline void from_json(const nlohmann::json& j, PagtnConfig& c) {
  c = PagtnConfig{};
  if (j.contains("depth")) j.at("depth").get_to(c.depth);
  if (j.contains("heads")) j.at("heads").get_to(c.heads);
  if (j.contains("max_path_len")) j.at("max_path_len").get_to(c.max_path_len);
  if (j.contains("hidden_size")) j.at("hidden_size").get_to(c.hidden_size);
  if (j.contains("query_size")) j.at("query_size").get_to(c.query_size);
  if (j.contains("dropout_p")) j.at("dropout_p").get_to(c.dropout_p);
  if (j.contains("leaky_slope")) j.at("leaky_slope").get_to(c.leaky_slope);
  if (j.contains("use_residual")) j.at("use_residual").get_to(c.use_residual);
  if (j.contains("output_scale")) j.at("output_scale").get_to(c.output_scale);
}

// Named weight arrays in a fixed order.
template <class T>
class BasicParams {
 public:
  void add(const std::string& name, BasicTensor<T> t) {
    if (index_.count(name)) throw InternalError("duplicate parameter " + name);
    index_[name] = entries_.size();
    entries_.emplace_back(name, std::move(t));
  }
  const BasicTensor<T>& operator[](const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) throw Error("unknown parameter " + name);
    return entries_[it->second].second;
  }
  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  const std::vector<std::pair<std::string, BasicTensor<T>>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : entries_) n += t.numel();
    return n;
  }

  // Deep copy with fresh leaves.
  template <class U>
  BasicParams<U> cast(bool requires_grad) const {
    BasicParams<U> out;
    for (const auto& [name, t] : entries_) out.add(name, t.template cast<U>(requires_grad));
    return out;
  }
  BasicParams clone(bool requires_grad) const { return cast<T>(requires_grad); }

  void zero_grad() const {
    for (const auto& [name, t] : entries_) t.zero_grad();
  }

 private:
  std::vector<std::pair<std::string, BasicTensor<T>>> entries_;
  std::map<std::string, std::size_t> index_;
};

using Params = BasicParams<float>;

inline std::string layer_name(int layer, const std::string& what) {
  return "layer" + std::to_string(layer) + "." + what;
}
inline std::string head_name(int layer, int head, const std::string& what) {
  return "layer" + std::to_string(layer) + ".head" + std::to_string(head) + "." + what;
}

// Name and shape of every array, in file order.
inline std::vector<std::pair<std::string, Shape>> param_manifest(const PagtnConfig& cfg) {
  cfg.validate();
  const int d = cfg.hidden_size;
  const int dq = cfg.query_size / cfg.heads;
  const int dv = cfg.hidden_size / cfg.heads;
  std::vector<std::pair<std::string, Shape>> m;
  m.push_back({"embed.atomic_number", {kAtomicNumberVocab, d}});
  m.push_back({"embed.formal_charge", {kChargeVocab, d}});
  m.push_back({"embed.degree", {kDegreeVocab, d}});
  m.push_back({"path.weight", {path_feature_width(cfg.max_path_len), d}});
  for (int l = 0; l < cfg.depth; ++l) {
    for (int h = 0; h < cfg.heads; ++h) {
      m.push_back({head_name(l, h, "query"), {d, dq}});
      m.push_back({head_name(l, h, "key_atom"), {d, dq}});
      m.push_back({head_name(l, h, "key_path"), {d, dq}});
      m.push_back({head_name(l, h, "score"), {dq, 1}});
      m.push_back({head_name(l, h, "value"), {d, dv}});
      m.push_back({head_name(l, h, "path_value"), {d, dv}});
    }
    m.push_back({layer_name(l, "bias"), {d}});
  }
  m.push_back({"readout.weight", {d, 1}});
  m.push_back({"readout.bias", {1}});
  return m;
}

inline bool is_bias(const std::string& name) {
  return name.size() >= 4 && name.compare(name.size() - 4, 4, "bias") == 0;
}

// Xavier-uniform weights drawn in manifest order. Biases and the readout
// weight start at zero, so an untrained model predicts RI 0 instead of a
// sum over atoms of arbitrary size.
inline Params init_params(const PagtnConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  Params p;
  for (const auto& [name, shape] : param_manifest(cfg)) {
    std::vector<float> v(shape_numel(shape), 0.0f);
    if (!is_bias(name) && name != "readout.weight") {
      const double fan_in = shape[0];
      const double fan_out = shape.size() > 1 ? shape[1] : 1;
      const double s = std::sqrt(6.0 / (fan_in + fan_out));
      for (auto& x : v) x = static_cast<float>(rng.uniform(-s, s));
    }
    p.add(name, Tensor::from_vector(shape, std::move(v), true));
  }
  return p;
}

inline std::size_t count_params(const Params& p) { return p.count(); }

// ---------------------------------------------------------------------------
// Forward pass

// Attendable pairs (i != j, both real atoms) of a batch and the non-zero
// entries of their flattened path features, in increasing (b, i, j) order.
struct PairPaths {
  int batch = 0;
  int atoms = 0;
  int width = 0;
  std::vector<std::int64_t> pair;      // (b N + i) N + j
  std::vector<std::uint32_t> offset;   // pair p owns entries offset[p] .. offset[p + 1]
  std::vector<std::uint16_t> index;
  std::vector<float> value;

  std::size_t size() const { return pair.size(); }
};

inline std::shared_ptr<const PairPaths> pair_paths(const Batch& batch) {
  auto pp = std::make_shared<PairPaths>();
  pp->batch = batch.size;
  pp->atoms = batch.max_atoms;
  pp->width = batch.path_width;
  const std::size_t F = static_cast<std::size_t>(batch.path_width);
  pp->offset.push_back(0);
  for (std::size_t flat = 0; flat < batch.attend_mask.size(); ++flat) {
    if (!batch.attend_mask[flat]) continue;
    const float* f = batch.path_features.data() + flat * F;
    for (std::size_t k = 0; k < F; ++k) {
      if (f[k] != 0.0f) {
        pp->index.push_back(static_cast<std::uint16_t>(k));
        pp->value.push_back(f[k]);
      }
    }
    pp->pair.push_back(static_cast<std::int64_t>(flat));
    pp->offset.push_back(static_cast<std::uint32_t>(pp->index.size()));
  }
  return pp;
}

template <class T>
struct BatchInputs {
  std::shared_ptr<const PairPaths> paths;
  BasicTensor<T> atom_mask;  // [B, N, 1]
};

template <class T>
BatchInputs<T> batch_inputs(const Batch& batch) {
  const int B = batch.size, N = batch.max_atoms;
  BatchInputs<T> in;
  in.paths = pair_paths(batch);
  std::vector<T> mask(batch.atom_mask.begin(), batch.atom_mask.end());
  in.atom_mask = BasicTensor<T>::from_vector({B, N, 1}, std::move(mask));
  return in;
}

// Attention logits [B, N, N]
//
//   e_ij = a . leaky_relu(q_i + k_j + f_ij P)
//
// for every attendable pair, 0 elsewhere. query and key are [B, N, dq],
// path_proj is P [F, dq] and score is a [dq, 1]. The per-pair hidden vector
// is recomputed in the backward pass instead of being stored.
template <class T>
BasicTensor<T> pair_logits(const BasicTensor<T>& query, const BasicTensor<T>& key, const BasicTensor<T>& path_proj,
                           const BasicTensor<T>& score, const std::shared_ptr<const PairPaths>& pp, T slope) {
  const int B = pp->batch, N = pp->atoms, F = pp->width;
  const int dq = path_proj.ndim() == 2 ? path_proj.shape()[1] : -1;
  if (query.shape() != Shape{B, N, dq} || key.shape() != Shape{B, N, dq} || path_proj.shape() != Shape{F, dq} ||
      score.shape() != Shape{dq, 1}) {
    throw ShapeError("pair_logits: inconsistent shapes " + shape_str(query.shape()) + ", " + shape_str(key.shape()) +
                     ", " + shape_str(path_proj.shape()) + ", " + shape_str(score.shape()));
  }
  const std::size_t NN = static_cast<std::size_t>(N) * N;
  std::vector<T> out(static_cast<std::size_t>(B) * NN, T(0));
  std::vector<T> pre(dq);
  auto hidden = [pp, N, NN, dq](const T* q, const T* k, const T* P, std::size_t p, T* h) {
    const auto flat = static_cast<std::size_t>(pp->pair[p]);
    const std::size_t b = flat / NN, i = (flat / N) % N, j = flat % N;
    const T* qi = q + (b * N + i) * dq;
    const T* kj = k + (b * N + j) * dq;
    for (int t = 0; t < dq; ++t) h[t] = qi[t] + kj[t];
    for (std::uint32_t e = pp->offset[p]; e < pp->offset[p + 1]; ++e) {
      const T v = static_cast<T>(pp->value[e]);
      const T* row = P + static_cast<std::size_t>(pp->index[e]) * dq;
      for (int t = 0; t < dq; ++t) h[t] += v * row[t];
    }
    return std::array<std::size_t, 3>{b, i, j};
  };
  {
    const T* a = score.data().data();
    for (std::size_t p = 0; p < pp->size(); ++p) {
      hidden(query.data().data(), key.data().data(), path_proj.data().data(), p, pre.data());
      T e = T(0);
      for (int t = 0; t < dq; ++t) e += a[t] * (pre[t] > T(0) ? pre[t] : slope * pre[t]);
      out[static_cast<std::size_t>(pp->pair[p])] = e;
    }
  }
  return detail::make_result<T>(
      {B, N, N}, std::move(out), {query.node(), key.node(), path_proj.node(), score.node()},
      [pp, hidden, dq, N, slope](Node<T>& self) {
        auto& nq = *self.parents[0];
        auto& nk = *self.parents[1];
        auto& nP = *self.parents[2];
        auto& na = *self.parents[3];
        for (auto* n : {&nq, &nk, &nP, &na}) {
          if (n->requires_grad) n->ensure_grad();
        }
        std::vector<T> h(dq), dh(dq);
        const T* a = na.value.data();
        for (std::size_t p = 0; p < pp->size(); ++p) {
          const T g = self.grad[static_cast<std::size_t>(pp->pair[p])];
          if (g == T(0)) continue;
          const auto [b, i, j] = hidden(nq.value.data(), nk.value.data(), nP.value.data(), p, h.data());
          for (int t = 0; t < dq; ++t) {
            const bool pos = h[t] > T(0);
            if (na.requires_grad) na.grad[t] += g * (pos ? h[t] : slope * h[t]);
            dh[t] = g * a[t] * (pos ? T(1) : slope);
          }
          if (nq.requires_grad) {
            T* gq = nq.grad.data() + (b * N + i) * dq;
            for (int t = 0; t < dq; ++t) gq[t] += dh[t];
          }
          if (nk.requires_grad) {
            T* gk = nk.grad.data() + (b * N + j) * dq;
            for (int t = 0; t < dq; ++t) gk[t] += dh[t];
          }
          if (nP.requires_grad) {
            for (std::uint32_t e = pp->offset[p]; e < pp->offset[p + 1]; ++e) {
              const T v = static_cast<T>(pp->value[e]);
              T* row = nP.grad.data() + static_cast<std::size_t>(pp->index[e]) * dq;
              for (int t = 0; t < dq; ++t) row[t] += v * dh[t];
            }
          }
        }
      },
      "pair_logits");
}

// Attention-weighted path features: out[b, i] = sum_j alpha[b, i, j] f_ij,
// shape [B, N, F].
template <class T>
BasicTensor<T> pair_mix(const BasicTensor<T>& alpha, const std::shared_ptr<const PairPaths>& pp) {
  const int B = pp->batch, N = pp->atoms, F = pp->width;
  if (alpha.shape() != Shape{B, N, N}) throw ShapeError("pair_mix: alpha has shape " + shape_str(alpha.shape()));
  std::vector<T> out(static_cast<std::size_t>(B) * N * F, T(0));
  for (std::size_t p = 0; p < pp->size(); ++p) {
    const auto flat = static_cast<std::size_t>(pp->pair[p]);
    const T w = alpha.data()[flat];
    if (w == T(0)) continue;
    T* row = out.data() + (flat / N) * F;
    for (std::uint32_t e = pp->offset[p]; e < pp->offset[p + 1]; ++e) {
      row[pp->index[e]] += w * static_cast<T>(pp->value[e]);
    }
  }
  return detail::make_result<T>(
      {B, N, F}, std::move(out), {alpha.node()},
      [pp, N, F](Node<T>& self) {
        auto& na = *self.parents[0];
        na.ensure_grad();
        for (std::size_t p = 0; p < pp->size(); ++p) {
          const auto flat = static_cast<std::size_t>(pp->pair[p]);
          const T* g = self.grad.data() + (flat / N) * F;
          T acc = T(0);
          for (std::uint32_t e = pp->offset[p]; e < pp->offset[p + 1]; ++e) {
            acc += g[pp->index[e]] * static_cast<T>(pp->value[e]);
          }
          na.grad[flat] += acc;
        }
      },
      "pair_mix");
}

// One attention layer; returns the new atom states [B, N, d].
template <class T>
BasicTensor<T> attention_layer(const PagtnConfig& cfg, const BasicParams<T>& params, int layer,
                               const BasicTensor<T>& H, const std::shared_ptr<const PairPaths>& paths,
                               bool training, Rng& rng) {
  const int B = H.shape()[0], N = H.shape()[1];
  if (paths->batch != B || paths->atoms != N) {
    throw ShapeError("attention_layer: atom states " + shape_str(H.shape()) + " do not match the pair list");
  }
  const T slope = static_cast<T>(cfg.leaky_slope);
  const BasicTensor<T>& w_path = params["path.weight"];
  std::vector<std::uint8_t> attend(static_cast<std::size_t>(B) * N * N, 0);
  for (auto flat : paths->pair) attend[static_cast<std::size_t>(flat)] = 1;

  std::vector<BasicTensor<T>> contexts;
  for (int h = 0; h < cfg.heads; ++h) {
    const auto& wq = params[head_name(layer, h, "query")];
    const auto& wka = params[head_name(layer, h, "key_atom")];
    const auto& wkp = params[head_name(layer, h, "key_path")];
    const auto& a = params[head_name(layer, h, "score")];
    const auto& wv = params[head_name(layer, h, "value")];
    const auto& wpv = params[head_name(layer, h, "path_value")];

    // W_kp p_ij with p_ij = f_ij W_path, evaluated as f_ij (W_path W_kp).
    const auto logits = pair_logits(matmul(H, wq), matmul(H, wka), matmul(w_path, wkp), a, paths, slope);
    const auto alpha = masked_softmax(logits, attend, 2);

    const auto from_atoms = bmm(alpha, matmul(H, wv));
    // sum_j alpha_ij W_pv p_ij = (sum_j alpha_ij f_ij) W_path W_pv
    const auto from_paths = matmul(pair_mix(alpha, paths), matmul(w_path, wpv));
    contexts.push_back(add(from_atoms, from_paths));
  }
  const auto context = cfg.heads == 1 ? contexts[0] : concat(contexts, 2);
  auto update = relu(add(context, params[layer_name(layer, "bias")]));
  update = dropout(update, cfg.dropout_p, training, rng);
  return cfg.use_residual ? add(H, update) : update;
}

// Scaled predictions (RI / output_scale), shape [B].
template <class T>
BasicTensor<T> forward(const PagtnConfig& cfg, const BasicParams<T>& params, const Batch& batch,
                       bool training, Rng& rng) {
  if (batch.max_path_len != cfg.max_path_len) {
    throw ShapeError("batch was featurized with max path length " + std::to_string(batch.max_path_len) +
                     " but the model expects " + std::to_string(cfg.max_path_len));
  }
  const int B = batch.size, N = batch.max_atoms;
  const BatchInputs<T> in = batch_inputs<T>(batch);
  BasicTensor<T> H = add(add(embedding_gather(params["embed.atomic_number"], batch.atomic_number, {B, N}),
                             embedding_gather(params["embed.formal_charge"], batch.formal_charge, {B, N})),
                         embedding_gather(params["embed.degree"], batch.degree, {B, N}));
  for (int l = 0; l < cfg.depth; ++l) {
    H = attention_layer(cfg, params, l, H, in.paths, training, rng);
  }
  const auto pooled = sum(mul(H, in.atom_mask), 1);  // [B, d]
  const auto out = add(matmul(pooled, params["readout.weight"]), params["readout.bias"]);
  return reshape(out, {B});
}

struct Model {
  PagtnConfig config;
  Params params;
};

// Eval-mode predictions in RI units, in input order.
inline std::vector<double> predict_ri(const Model& model, const std::vector<const FeaturizedGraph*>& graphs,
                                      int batch_size = 50) {
  NoGradGuard no_grad;
  Rng unused(0);
  std::vector<double> out;
  out.reserve(graphs.size());
  for (std::size_t start = 0; start < graphs.size(); start += batch_size) {
    const std::size_t end = std::min(graphs.size(), start + static_cast<std::size_t>(batch_size));
    const std::vector<const FeaturizedGraph*> chunk(graphs.begin() + start, graphs.begin() + end);
    const Tensor pred = forward(model.config, model.params, batch_graphs(chunk), false, unused);
    for (float v : pred.data()) out.push_back(static_cast<double>(v) * model.config.output_scale);
  }
  return out;
}

inline std::vector<double> predict_ri(const Model& model, const std::vector<FeaturizedGraph>& graphs,
                                      int batch_size = 50) {
  std::vector<const FeaturizedGraph*> ptrs;
  for (const auto& g : graphs) ptrs.push_back(&g);
  return predict_ri(model, ptrs, batch_size);
}

// ---------------------------------------------------------------------------
// Weight files
//
//   "AIRI" | u32 version | u64 header length | JSON header | float32 data
//
// All integers and floats little-endian. The header holds the config and a
// manifest of {name, shape, offset} with byte offsets into the data section.

inline constexpr char kWeightMagic[4] = {'A', 'I', 'R', 'I'};
inline constexpr std::uint32_t kWeightVersion = 1;

namespace detail {

template <class U>
U byteswap_value(U v) {
  unsigned char b[sizeof(U)];
  std::memcpy(b, &v, sizeof v);
  std::reverse(b, b + sizeof v);
  std::memcpy(&v, b, sizeof v);
  return v;
}

template <class U>
void write_le(std::ostream& os, U v) {
  if constexpr (std::endian::native == std::endian::big) v = byteswap_value(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class U>
U read_le(std::istream& is, const char* what) {
  U v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError(std::string("truncated file reading ") + what);
  if constexpr (std::endian::native == std::endian::big) v = byteswap_value(v);
  return v;
}

}  // namespace detail

inline void write_weights(std::ostream& os, const Params& params, const PagtnConfig& cfg,
                          std::uint32_t version = kWeightVersion) {
  nlohmann::json manifest = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : params.entries()) {
    manifest.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    offset += t.numel() * sizeof(float);
  }
  const std::string header = nlohmann::json{{"config", cfg}, {"tensors", manifest}}.dump();
  os.write(kWeightMagic, 4);
  detail::write_le<std::uint32_t>(os, version);
  detail::write_le<std::uint64_t>(os, header.size());
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& [name, t] : params.entries()) {
    for (float v : t.data()) detail::write_le<float>(os, v);
  }
  if (!os) throw Error("failed writing weights");
}

inline Model read_weights(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4)) throw FormatError("truncated weight file: missing magic");
  if (std::memcmp(magic, kWeightMagic, 4) != 0) throw FormatError("not a weight file: bad magic");
  const auto version = detail::read_le<std::uint32_t>(is, "version");
  if (version != kWeightVersion) {
    throw VersionError("unsupported weight file version " + std::to_string(version) + " (reader supports " +
                       std::to_string(kWeightVersion) + ")");
  }
  const auto header_len = detail::read_le<std::uint64_t>(is, "header length");
  if (header_len > (std::uint64_t{1} << 32)) throw FormatError("implausible weight header length");
  std::string header(header_len, '\0');
  if (!is.read(header.data(), static_cast<std::streamsize>(header_len))) throw FormatError("truncated weight header");

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed weight header: ") + e.what());
  }
  Model model;
  try {
    model.config = j.at("config").get<PagtnConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed config in weight header: ") + e.what());
  }
  model.config.validate();
  const auto expected = param_manifest(model.config);
  const auto& tensors = j.at("tensors");
  if (!tensors.is_array() || tensors.size() != expected.size()) {
    throw FormatError("weight manifest lists " + std::to_string(tensors.size()) + " tensors, config needs " +
                      std::to_string(expected.size()));
  }
  std::uint64_t offset = 0;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    const auto& entry = tensors[k];
    const std::string name = entry.at("name").get<std::string>();
    const Shape shape = entry.at("shape").get<Shape>();
    if (name != expected[k].first || shape != expected[k].second) {
      throw FormatError("weight manifest entry " + name + " " + shape_str(shape) + " disagrees with config (" +
                        expected[k].first + " " + shape_str(expected[k].second) + ")");
    }
    if (entry.at("offset").get<std::uint64_t>() != offset) throw FormatError("weight manifest offset mismatch at " + name);
    std::vector<float> v(shape_numel(shape));
    for (auto& x : v) x = detail::read_le<float>(is, name.c_str());
    offset += v.size() * sizeof(float);
    model.params.add(name, Tensor::from_vector(shape, std::move(v), true));
  }
  return model;
}

inline void save_weights(const Params& params, const PagtnConfig& cfg, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  write_weights(os, params, cfg);
}

inline Model load_weights(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  return read_weights(is);
}

}  // namespace airi
