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

// Loss, gradient clipping, Adam/AdamW, the training loop and the
// hyperparameter grid search.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "airi/dataset.hpp"
#include "airi/error.hpp"
#include "airi/featurize.hpp"
#include "airi/pagtn.hpp"
#include "airi/rng.hpp"
#include "airi/tensor.hpp"
#include "json.hpp"

namespace airi {

enum class OptimizerKind { kAdam, kAdamW };

inline std::string to_string(OptimizerKind k) { return k == OptimizerKind::kAdam ? "adam" : "adamw"; }

inline OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "adam") return OptimizerKind::kAdam;
  if (s == "adamw") return OptimizerKind::kAdamW;
  throw Error("optimizer must be 'adam' or 'adamw', got '" + s + "'");
}

struct TrainConfig {
  double lr = 5e-4;
  double dropout = 0.2;
  int batch_size = 50;
  double clip_norm = 1.0;  // global L2
  int max_epochs = 200;
  int patience = 20;
  std::int64_t max_steps = 0;  // 0: no limit
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;  // AdamW only
  std::uint64_t seed = 0;

  void validate() const {
    if (!(lr > 0.0)) throw Error("lr must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("dropout must lie in [0, 1)");
    if (batch_size < 1) throw Error("batch_size must be positive");
    if (!(clip_norm > 0.0)) throw Error("clip_norm must be positive");
    if (max_epochs < 1) throw Error("max_epochs must be positive");
    if (patience < 1) throw Error("patience must be positive");
    if (max_steps < 0) throw Error("max_steps must be non-negative");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw Error("betas must lie in [0, 1)");
    if (!(eps > 0.0)) throw Error("eps must be positive");
    if (!(weight_decay >= 0.0)) throw Error("weight_decay must be non-negative");
  }
  bool operator==(const TrainConfig&) const = default;
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"lr", c.lr},
                     {"dropout", c.dropout},
                     {"batch_size", c.batch_size},
                     {"clip_norm", c.clip_norm},
                     {"max_epochs", c.max_epochs},
                     {"patience", c.patience},
                     {"max_steps", c.max_steps},
                     {"optimizer", to_string(c.optimizer)},
                     {"beta1", c.beta1},
                     {"beta2", c.beta2},
                     {"eps", c.eps},
                     {"weight_decay", c.weight_decay},
                     {"seed", c.seed}};
}

// ---------------------------------------------------------------------------
// Loss and clipping

// Mean absolute error; the subgradient of |x| at 0 is 0.
template <class T>
BasicTensor<T> mae_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("mae_loss: prediction shape " + shape_str(pred.shape()) + " vs target " +
                     shape_str(target.shape()));
  }
  return mean_all(abs(sub(pred, target)));
}

// Scales all gradients by max_norm / norm when their global L2 norm exceeds
// max_norm. Returns the norm before clipping.
template <class T>
double clip_gradients(const BasicParams<T>& params, double max_norm) {
  if (!(max_norm > 0.0)) throw Error("clip_gradients: max_norm must be positive");
  double sq = 0.0;
  for (const auto& [name, t] : params.entries()) {
    for (T g : t.grad()) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const T s = static_cast<T>(max_norm / norm);
    for (const auto& [name, t] : params.entries()) {
      for (T& g : t.mutable_grad()) g *= s;
    }
  }
  return norm;
}

// ---------------------------------------------------------------------------
// Adam / AdamW

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::kAdam;
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;
  std::int64_t step = 0;
  std::vector<std::string> names;
  std::vector<Shape> shapes;
  std::vector<std::vector<float>> m;
  std::vector<std::vector<float>> v;

  bool operator==(const OptimizerState&) const = default;
};

template <class T>
OptimizerState make_optimizer_state(const BasicParams<T>& params, const TrainConfig& cfg) {
  OptimizerState s;
  s.kind = cfg.optimizer;
  s.lr = cfg.lr;
  s.beta1 = cfg.beta1;
  s.beta2 = cfg.beta2;
  s.eps = cfg.eps;
  s.weight_decay = cfg.weight_decay;
  for (const auto& [name, t] : params.entries()) {
    s.names.push_back(name);
    s.shapes.push_back(t.shape());
    s.m.emplace_back(t.numel(), 0.0f);
    s.v.emplace_back(t.numel(), 0.0f);
  }
  return s;
}

namespace detail {

template <class T>
void adam_update(const BasicParams<T>& params, OptimizerState& s, bool decoupled_decay) {
  if (params.size() != s.names.size()) throw ShapeError("optimizer state does not match parameters");
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  const double decay = decoupled_decay ? s.lr * s.weight_decay : 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& [name, t] = params.entries()[k];
    if (name != s.names[k] || t.shape() != s.shapes[k]) {
      throw ShapeError("optimizer state entry " + s.names[k] + " does not match parameter " + name);
    }
    auto& w = t.mutable_data();
    const auto& g = t.grad();
    auto& m = s.m[k];
    auto& v = s.v[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = static_cast<double>(g[i]);
      m[i] = static_cast<float>(s.beta1 * m[i] + (1.0 - s.beta1) * gi);
      v[i] = static_cast<float>(s.beta2 * v[i] + (1.0 - s.beta2) * gi * gi);
      double wi = static_cast<double>(w[i]);
      wi -= decay * wi;
      wi -= s.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + s.eps);
      w[i] = static_cast<T>(wi);
    }
  }
}

}  // namespace detail

// Bias-corrected Adam step using the gradients stored on `params`.
template <class T>
void adam_step(const BasicParams<T>& params, OptimizerState& state) {
  detail::adam_update(params, state, false);
}

// Adam with decoupled weight decay: w <- w - lr wd w, then the Adam delta.
template <class T>
void adamw_step(const BasicParams<T>& params, OptimizerState& state) {
  detail::adam_update(params, state, true);
}

template <class T>
void optimizer_step(const BasicParams<T>& params, OptimizerState& state) {
  if (state.kind == OptimizerKind::kAdam) {
    adam_step(params, state);
  } else {
    adamw_step(params, state);
  }
}

// Optimizer state file:
//
//   "AIRO" | u32 version | u64 header length | JSON header | float32 m, v
//
// m and v follow tensor by tensor in manifest order.
inline constexpr char kOptimizerMagic[4] = {'A', 'I', 'R', 'O'};
inline constexpr std::uint32_t kOptimizerVersion = 1;

inline void write_optimizer_state(std::ostream& os, const OptimizerState& s) {
  nlohmann::json tensors = nlohmann::json::array();
  for (std::size_t k = 0; k < s.names.size(); ++k) {
    tensors.push_back({{"name", s.names[k]}, {"shape", s.shapes[k]}});
  }
  const std::string header = nlohmann::json{{"kind", to_string(s.kind)},
                                            {"lr", s.lr},
                                            {"beta1", s.beta1},
                                            {"beta2", s.beta2},
                                            {"eps", s.eps},
                                            {"weight_decay", s.weight_decay},
                                            {"step", s.step},
                                            {"tensors", tensors}}
                                 .dump();
  os.write(kOptimizerMagic, 4);
  detail::write_le<std::uint32_t>(os, kOptimizerVersion);
  detail::write_le<std::uint64_t>(os, header.size());
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (std::size_t k = 0; k < s.names.size(); ++k) {
    for (float x : s.m[k]) detail::write_le<float>(os, x);
    for (float x : s.v[k]) detail::write_le<float>(os, x);
  }
  if (!os) throw Error("failed writing optimizer state");
}

inline OptimizerState read_optimizer_state(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4)) throw FormatError("truncated optimizer file: missing magic");
  if (std::memcmp(magic, kOptimizerMagic, 4) != 0) throw FormatError("not an optimizer state file: bad magic");
  const auto version = detail::read_le<std::uint32_t>(is, "version");
  if (version != kOptimizerVersion) {
    throw VersionError("unsupported optimizer state version " + std::to_string(version));
  }
  const auto header_len = detail::read_le<std::uint64_t>(is, "header length");
  if (header_len > (std::uint64_t{1} << 32)) throw FormatError("implausible optimizer header length");
  std::string header(header_len, '\0');
  if (!is.read(header.data(), static_cast<std::streamsize>(header_len))) {
    throw FormatError("truncated optimizer header");
  }
  OptimizerState s;
  try {
    const auto j = nlohmann::json::parse(header);
    s.kind = parse_optimizer(j.at("kind").get<std::string>());
    j.at("lr").get_to(s.lr);
    j.at("beta1").get_to(s.beta1);
    j.at("beta2").get_to(s.beta2);
    j.at("eps").get_to(s.eps);
    j.at("weight_decay").get_to(s.weight_decay);
    j.at("step").get_to(s.step);
    for (const auto& t : j.at("tensors")) {
      s.names.push_back(t.at("name").get<std::string>());
      s.shapes.push_back(t.at("shape").get<Shape>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed optimizer header: ") + e.what());
  }
  for (std::size_t k = 0; k < s.names.size(); ++k) {
    const std::size_t n = shape_numel(s.shapes[k]);
    s.m.emplace_back(n);
    s.v.emplace_back(n);
    for (auto& x : s.m[k]) x = detail::read_le<float>(is, s.names[k].c_str());
    for (auto& x : s.v[k]) x = detail::read_le<float>(is, s.names[k].c_str());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Training loop

struct EpochLog {
  int epoch = 0;
  double train_mae_ri = 0.0;  // mean training-mode batch loss over the epoch
  double val_mae_ri = 0.0;    // eval-mode MAE on the validation split
  double wall_s = 0.0;
  std::int64_t steps = 0;     // optimizer steps so far
};

inline nlohmann::json to_json_line(const EpochLog& e) {
  return nlohmann::json{
      {"epoch", e.epoch}, {"train_mae_ri", e.train_mae_ri}, {"val_mae_ri", e.val_mae_ri}, {"wall_s", e.wall_s}};
}

struct Checkpoint {
  Model model;  // parameters from the best validation epoch
  int best_epoch = 0;
  double best_val_mae_ri = 0.0;
  std::vector<EpochLog> log;
  OptimizerState optimizer;  // state after the last step
  Params final_params;
};

// MAE in RI units between eval-mode predictions and the graphs' targets.
inline double evaluate_mae_ri(const Model& model, const std::vector<FeaturizedGraph>& graphs,
                              int batch_size = 50) {
  if (graphs.empty()) throw DataError("cannot evaluate on an empty set");
  const auto pred = predict_ri(model, graphs, batch_size);
  double s = 0.0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (!graphs[i].target_ri) throw DataError("record '" + graphs[i].id + "' has no RI");
    s += std::abs(pred[i] - *graphs[i].target_ri);
  }
  return s / static_cast<double>(graphs.size());
}

struct TrainHooks {
  std::ostream* log = nullptr;  // receives one JSON line per epoch
  const Params* init = nullptr;  // start from these weights instead of a fresh init
};

inline Checkpoint train_model(PagtnConfig model_cfg, const TrainConfig& cfg, const std::vector<FeaturizedGraph>& train,
                              const std::vector<FeaturizedGraph>& val, std::uint64_t seed,
                              const TrainHooks& hooks = {}) {
  cfg.validate();
  model_cfg.dropout_p = cfg.dropout;
  model_cfg.validate();
  if (train.empty()) throw DataError("training split is empty");
  if (val.empty()) throw DataError("validation split is empty");
  for (const auto* set : {&train, &val}) {
    for (const auto& g : *set) {
      if (!g.target_ri) throw DataError("record '" + g.id + "' has no RI");
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  Checkpoint ck;
  ck.model.config = model_cfg;
  Params params = hooks.init ? hooks.init->clone(true) : init_params(model_cfg, seed);
  OptimizerState opt = make_optimizer_state(params, cfg);
  ck.best_val_mae_ri = std::numeric_limits<double>::infinity();
  int since_best = 0;

  std::vector<std::size_t> order(train.size());
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(epoch));
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order.begin(), order.end());

    double loss_sum = 0.0;
    std::size_t seen = 0;
    bool budget_hit = false;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<const FeaturizedGraph*> chunk;
      for (std::size_t i = start; i < end; ++i) chunk.push_back(&train[order[i]]);
      const Batch batch = batch_graphs(chunk);

      params.zero_grad();
      const Tensor pred = forward(model_cfg, params, batch, true, rng);
      const Tensor target = Tensor::from_vector({batch.size}, batch.targets);
      const Tensor loss = mae_loss(pred, target);
      const double l = static_cast<double>(loss.item());
      if (!std::isfinite(l)) {
        std::string ids;
        for (const auto& id : batch.ids) ids += (ids.empty() ? "" : ",") + id;
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(opt.step + 1) + "; batch ids: " + ids);
      }
      backward(loss);
      clip_gradients(params, cfg.clip_norm);
      optimizer_step(params, opt);
      loss_sum += l * static_cast<double>(batch.size);
      seen += static_cast<std::size_t>(batch.size);
      if (cfg.max_steps > 0 && opt.step >= cfg.max_steps) {
        budget_hit = true;
        break;
      }
    }

    EpochLog e;
    e.epoch = epoch;
    e.train_mae_ri = loss_sum / static_cast<double>(seen) * model_cfg.output_scale;
    e.val_mae_ri = evaluate_mae_ri(Model{model_cfg, params}, val, cfg.batch_size);
    e.steps = opt.step;
    e.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ck.log.push_back(e);
    if (hooks.log) *hooks.log << to_json_line(e).dump() << '\n' << std::flush;

    if (e.val_mae_ri < ck.best_val_mae_ri) {
      ck.best_val_mae_ri = e.val_mae_ri;
      ck.best_epoch = epoch;
      ck.model.params = params.clone(true);
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
    if (budget_hit) break;
  }
  if (ck.model.params.size() == 0) ck.model.params = params.clone(true);
  ck.optimizer = std::move(opt);
  ck.final_params = std::move(params);
  return ck;
}

// Trains `members` models with seeds seed, seed+1, ... on up to `threads`
// threads (0: hardware concurrency).
inline std::vector<Checkpoint> train_ensemble(const PagtnConfig& model_cfg, const TrainConfig& cfg,
                                              const std::vector<FeaturizedGraph>& train,
                                              const std::vector<FeaturizedGraph>& val, std::uint64_t seed,
                                              int members, unsigned threads = 0,
                                              const std::function<std::ostream*(int)>& log_for = {}) {
  if (members < 1) throw Error("ensemble size must be positive");
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(members));
  std::vector<Checkpoint> out(members);
  std::vector<std::exception_ptr> errors(members);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < members; k = next++) {
      try {
        TrainHooks hooks;
        if (log_for) hooks.log = log_for(k);
        out[k] = train_model(model_cfg, cfg, train, val, seed + static_cast<std::uint64_t>(k), hooks);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grid search

inline std::vector<int> int_range(int lo, int hi, int step = 1) {
  std::vector<int> v;
  for (int x = lo; x <= hi; x += step) v.push_back(x);
  return v;
}

struct SearchSpace {
  std::vector<int> depth = int_range(4, 10);
  std::vector<int> heads = {1, 2};
  std::vector<int> max_path_len = int_range(2, 6);
  std::vector<int> hidden_size = int_range(120, 400, 40);
  std::vector<int> query_size = int_range(120, 400, 40);

  // Every valid combination, starting from `base` for the other fields.
  std::vector<PagtnConfig> expand(const PagtnConfig& base = {}) const {
    std::vector<PagtnConfig> out;
    for (int d : depth) {
      for (int h : heads) {
        for (int l : max_path_len) {
          for (int hs : hidden_size) {
            for (int qs : query_size) {
              PagtnConfig c = base;
              c.depth = d;
              c.heads = h;
              c.max_path_len = l;
              c.hidden_size = hs;
              c.query_size = qs;
              try {
                c.validate();
              } catch (const Error&) {
                continue;
              }
              out.push_back(c);
            }
          }
        }
      }
    }
    return out;
  }
};

struct SearchBudget {
  int max_epochs = 0;               // 0: keep the training config's value
  std::int64_t max_steps = 0;       // 0: keep the training config's value
  std::size_t max_candidates = 0;   // 0: all; otherwise a seeded subset
};

struct SearchResult {
  PagtnConfig config;
  double val_mae_ri = 0.0;
  std::size_t n_params = 0;
  int best_epoch = 0;
};

// Trains every candidate and ranks by validation MAE, ties to fewer
// parameters.
inline std::vector<SearchResult> grid_search(const SearchSpace& space, const PagtnConfig& base, TrainConfig cfg,
                                             const std::vector<DatasetRecord>& train,
                                             const std::vector<DatasetRecord>& val, const SearchBudget& budget,
                                             std::uint64_t seed, std::ostream* progress = nullptr) {
  std::vector<PagtnConfig> candidates = space.expand(base);
  if (candidates.empty()) throw Error("search space has no valid configuration");
  if (budget.max_candidates > 0 && candidates.size() > budget.max_candidates) {
    std::vector<std::size_t> idx(candidates.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng = Rng::derive(seed, 0x5ea4c4);
    rng.shuffle(idx.begin(), idx.end());
    idx.resize(budget.max_candidates);
    std::sort(idx.begin(), idx.end());
    std::vector<PagtnConfig> kept;
    for (std::size_t i : idx) kept.push_back(candidates[i]);
    candidates = std::move(kept);
  }
  if (budget.max_epochs > 0) cfg.max_epochs = budget.max_epochs;
  if (budget.max_steps > 0) cfg.max_steps = budget.max_steps;

  std::map<int, std::pair<std::vector<FeaturizedGraph>, std::vector<FeaturizedGraph>>> by_len;
  std::vector<SearchResult> results;
  for (const auto& c : candidates) {
    auto it = by_len.find(c.max_path_len);
    if (it == by_len.end()) {
      it = by_len.emplace(c.max_path_len, std::make_pair(featurize_records(train, c.max_path_len),
                                                         featurize_records(val, c.max_path_len)))
               .first;
    }
    const Checkpoint ck = train_model(c, cfg, it->second.first, it->second.second, seed);
    SearchResult r;
    r.config = ck.model.config;
    r.val_mae_ri = ck.best_val_mae_ri;
    r.n_params = count_params(ck.model.params);
    r.best_epoch = ck.best_epoch;
    if (progress) {
      *progress << nlohmann::json{{"config", r.config}, {"val_mae_ri", r.val_mae_ri}, {"n_params", r.n_params}}.dump()
                << '\n';
    }
    results.push_back(r);
  }
  std::stable_sort(results.begin(), results.end(), [](const SearchResult& a, const SearchResult& b) {
    if (a.val_mae_ri != b.val_mae_ri) return a.val_mae_ri < b.val_mae_ri;
    return a.n_params < b.n_params;
  });
  return results;
}

}  // namespace airi
