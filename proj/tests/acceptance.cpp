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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include <unistd.h>

#include "airi/airi.hpp"
#include "airi/cli.hpp"
#include "oracles.hpp"

namespace {

using namespace airi;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

FeaturizedGraph graph(const std::string& smiles, int L) {
  return featurize_graph(chem::standardize(chem::parse_smiles(smiles)), L);
}

PagtnConfig small_config(int depth, int d) {
  PagtnConfig c;
  c.depth = depth;
  c.hidden_size = d;
  c.query_size = d;
  c.dropout_p = 0.0;
  return c;
}

// 1
Outcome gradient_check() {
  const Stopwatch sw;
  const PagtnConfig cfg = small_config(2, 16);
  auto pf = init_params(cfg, 101);
  Rng rng(5);
  // random biases and readout keep units off the relu kinks and the output non-trivial
  for (const auto& [name, t] : pf.entries()) {
    if (is_bias(name) || name.rfind("readout", 0) == 0) {
      for (auto& v : t.mutable_data()) v = static_cast<float>(rng.uniform(-0.1, 0.1));
    }
  }
  const auto pd = pf.cast<double>(true);
  const Batch b = batch_graphs(std::vector<FeaturizedGraph>{graph("CC(O)C=O", cfg.max_path_len),
                                                            graph("C1CC1N", cfg.max_path_len)});
  std::vector<BasicTensor<double>> leaves;
  for (const auto& [name, t] : pd.entries()) leaves.push_back(t);
  auto f = [&] {
    Rng unused(0);
    return sum_all(forward(cfg, pd, b, false, unused));
  };
  const double err = finite_diff_check<double>(f, leaves, 1e-6);
  const double s = sw.seconds();
  return {err < 1e-3 && s < 10.0, "max rel err " + fmt("%.3g", err) + ", " + fmt("%.2f", s) + " s"};
}

// 2
Outcome permutation_invariance() {
  const PagtnConfig cfg = small_config(4, 64);
  Params p = init_params(cfg, 102);
  Rng rng(6);
  for (auto& v : p["readout.weight"].mutable_data()) v = static_cast<float>(rng.normal() * 0.1);
  const Model model{cfg, p};

  synth::SynthSpec spec;
  spec.n = 400;
  spec.seed = 102;
  std::mt19937_64 shuffle_rng(102);
  std::vector<FeaturizedGraph> orig, permuted;
  for (const auto& rec : synth::generate_records(spec)) {
    const auto mol = record_molecule(rec);
    if (mol.num_atoms() > 20) continue;
    std::vector<int> perm(mol.num_atoms());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), shuffle_rng);
    orig.push_back(featurize_graph(mol, cfg.max_path_len));
    permuted.push_back(featurize_graph(chem::relabel_atoms(mol, perm), cfg.max_path_len));
    if (orig.size() == 100) break;
  }
  if (orig.size() < 100) return {false, "only " + std::to_string(orig.size()) + " molecules with <= 20 atoms"};
  const auto a = predict_ri(model, orig), bp = predict_ri(model, permuted);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - bp[i]) / std::max(std::abs(a[i]), 1.0));
  }
  return {worst <= 1e-4, "100 molecules, max relative drift " + fmt("%.3g", worst)};
}

// 3
Outcome overfit() {
  const Stopwatch sw;
  synth::SynthSpec spec;
  spec.n = 32;
  spec.seed = 11;
  const auto graphs = featurize_records(synth::generate_records(spec), FeaturizeConfig{});
  const PagtnConfig mc = small_config(2, 32);
  TrainConfig tc;
  tc.lr = 5e-4;
  tc.dropout = 0.0;
  tc.batch_size = 8;
  tc.max_epochs = 100000;
  tc.patience = 100000;
  tc.max_steps = 3000;
  const double initial = evaluate_mae_ri(Model{mc, init_params(mc, 0)}, graphs);
  const Checkpoint ck = train_model(mc, tc, graphs, graphs, 0);
  const double final_mae = evaluate_mae_ri(ck.model, graphs);
  const double s = sw.seconds();
  return {final_mae < 5.0 && s < 300.0,
          "train MAE " + fmt("%.2f", final_mae) + " RI after " + std::to_string(ck.optimizer.step) +
              " steps (initial " + fmt("%.1f", initial) + "), " + fmt("%.1f", s) + " s"};
}

// 5
Outcome calibration_exactness() {
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> us(0.5, 40.0);
  std::vector<Residual> doubled, identity;
  for (int i = 0; i < 3000; ++i) {
    const double s = us(rng);
    const double sign = i % 2 ? 1.0 : -1.0;
    doubled.push_back({sign * 2.0 * s, s});
    identity.push_back({sign * s, s});
  }
  double worst_doubled = 0.0, worst_identity = 0.0;
  for (int p : {50, 78, 95}) {
    for (double b : {2.0, 5.0}) {
      const auto t2 = build_calibration(doubled, p, b);
      const auto t1 = build_calibration(identity, p, b);
      for (double r : t2.ratios) worst_doubled = std::max(worst_doubled, std::abs(r - 2.0));
      for (double r : t1.ratios) worst_identity = std::max(worst_identity, std::abs(r - 1.0));
    }
  }
  return {worst_doubled <= 1e-6 && worst_identity <= 1e-6,
          "|ratio - 2| <= " + fmt("%.3g", worst_doubled) + ", |ratio - 1| <= " + fmt("%.3g", worst_identity)};
}

// 6
Outcome oracles() {
  std::mt19937_64 rng(106);
  std::normal_distribution<double> nd(0.0, 50.0);
  int n_pct = 0, n_std = 0, n_sp = 0, n_met = 0, bad = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> v(1 + t % 60);
    for (auto& x : v) x = nd(rng);
    const double q = static_cast<double>(rng() % 10001) / 100.0;
    bad += std::abs(percentile(v, q) - oracle::percentile_sort_interp(v, q)) > 1e-9;
    ++n_pct;

    std::vector<double> members(2 + t % 9);
    for (auto& x : members) x = 1000.0 + nd(rng);
    bad += std::abs(ensemble_stats(members).std - oracle::sample_std(members)) > 1e-9;
    ++n_std;

    const int n = 1 + static_cast<int>(rng() % 20);
    const auto g = oracle::random_connected_graph(rng, n, static_cast<int>(rng() % 6));
    const auto sp = all_pairs_shortest_paths(oracle::graph_to_molecule(g));
    const auto fw = oracle::floyd_warshall(g.n, g.edges);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) bad += sp.distance(i, j) != fw[i * n + j];
    }
    ++n_sp;

    std::vector<double> pred(3 + t % 50), obs;
    for (auto& x : pred) {
      x = 500.0 + 10.0 * nd(rng);
      obs.push_back(x + nd(rng));
    }
    double s = 0.0;
    std::vector<double> e;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      s += std::abs(pred[i] - obs[i]);
      e.push_back(std::abs(pred[i] - obs[i]));
    }
    bad += std::abs(mae(pred, obs) - s / pred.size()) > 1e-9;
    bad += std::abs(pearson_r(pred, obs) - oracle::pearson(pred, obs)) > 1e-12;
    const auto pct = abs_error_percentiles(pred, obs, {50, 90, 95, 99});
    const double levels[] = {50, 90, 95, 99};
    for (int k = 0; k < 4; ++k) bad += std::abs(pct[k] - oracle::percentile_sort_interp(e, levels[k])) > 1e-9;
    ++n_met;
  }
  return {bad == 0, std::to_string(n_pct) + " percentile, " + std::to_string(n_std) + " ensemble std, " +
                        std::to_string(n_sp) + " shortest-path, " + std::to_string(n_met) +
                        " metric instances, " + std::to_string(bad) + " mismatches"};
}

// 7
Outcome parameter_count() {
  const PagtnConfig cfg;
  const std::size_t n = count_params(init_params(cfg, 0));
  return {n >= 2'000'000 && n <= 3'200'000, std::to_string(n) + " parameters in the reference config"};
}

// 8
Outcome round_trips(const fs::path& dir) {
  std::vector<std::string> failures;

  PagtnConfig cfg = small_config(2, 24);
  cfg.heads = 2;
  Params p = init_params(cfg, 108);
  Rng rng(8);
  for (auto& v : p["readout.weight"].mutable_data()) v = static_cast<float>(rng.normal());
  const std::string weights = (dir / "w.airi").string();
  save_weights(p, cfg, weights);
  const Model back = load_weights(weights);
  bool same = back.config == cfg && back.params.size() == p.size();
  for (std::size_t k = 0; same && k < p.size(); ++k) {
    const auto& x = p.entries()[k].second.data();
    const auto& y = back.params.entries()[k].second.data();
    same = x.size() == y.size() && std::memcmp(x.data(), y.data(), x.size() * sizeof(float)) == 0;
  }
  std::stringstream w1, w2;
  write_weights(w1, p, cfg);
  write_weights(w2, back.params, back.config);
  if (!same || w1.str() != w2.str()) failures.push_back("weights");

  CalibrationTable t;
  t.p = 83;
  t.b = 3.0;
  std::uniform_real_distribution<double> ur(0.3, 4.0);
  std::mt19937_64 mt(108);
  for (int k = 0; k <= 12; ++k) t.bin_edges.push_back(3.0 * k);
  for (int k = 0; k < 12; ++k) t.ratios.push_back(ur(mt));
  t.fallback_ratio = ur(mt);
  t.fit_set_size = 1234;
  const std::string cal = (dir / "cal.json").string();
  save_calibration(t, cal);
  if (!(load_calibration(cal) == t)) failures.push_back("calibration");

  std::vector<DatasetRecord> recs;
  std::vector<PredictionRow> rows;
  for (int i = 0; i < 500; ++i) {
    DatasetRecord r;
    r.id = "r," + std::to_string(i);
    r.smiles = "CC(=O)O";
    r.ri = 300.0 + 3000.0 * ur(mt);
    if (i % 3 == 0) r.tags = {"TMS"};
    recs.push_back(r);
    PredictionRow row;
    row.id = r.id;
    row.smiles = "C\"C";
    row.ri_pred = *r.ri;
    row.sigma_pred = ur(mt) * 10;
    if (i % 2) row.sigma_corrected = row.sigma_pred * 1.3;
    if (i % 5) row.ri_obs = *r.ri + ur(mt);
    row.tags = r.tags;
    set_z(row);
    rows.push_back(row);
  }
  std::stringstream d1;
  write_dataset(d1, recs);
  const auto recs_back = read_dataset(d1);
  bool ds_ok = recs_back.size() == recs.size();
  for (std::size_t i = 0; ds_ok && i < recs.size(); ++i) {
    ds_ok = recs_back[i].id == recs[i].id && recs_back[i].ri == recs[i].ri && recs_back[i].tags == recs[i].tags;
  }
  if (!ds_ok) failures.push_back("dataset csv");

  std::stringstream p1, p2;
  write_dump(p1, rows);
  const std::string dump_text = p1.str();
  const auto rows_back = read_dump(p1);
  write_dump(p2, rows_back);
  if (rows_back.size() != rows.size() || p2.str() != dump_text) failures.push_back("prediction csv");

  std::string detail = "weights, calibration JSON, dataset and prediction CSV";
  if (failures.empty()) return {true, detail + " round trip"};
  for (const auto& f : failures) detail += "; " + f + " differs";
  return {false, detail};
}

// CLI helpers for the end-to-end run.
int airi(std::vector<std::string> args, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

struct E2E {
  bool ran = false;
  fs::path dir;
  std::size_t n_test = 0;
};

// 4
Outcome end_to_end(const fs::path& root, E2E& e2e) {
  const Stopwatch sw;
  const fs::path d = root / "e2e";
  fs::create_directories(d);
  const std::string data = (d / "data.csv").string(), sp = (d / "split").string(), models = (d / "models").string(),
                    cal = (d / "cal.json").string(), pred = (d / "pred.csv").string(),
                    rep = (d / "report.json").string();
  const std::string cfg = std::string(AIRI_SOURCE_DIR) + "/configs/desk.yaml";
  const std::vector<std::vector<std::string>> steps = {
      {"synth", "--n", "5000", "--seed", "7", "--out", data},
      {"split", "--in", data, "--frac", "0.8,0.1,0.1", "--seed", "7", "--out-dir", sp},
      {"train", "--config", cfg, "--train", sp + "/train.csv", "--val", sp + "/val.csv", "--seed", "11",
       "--ensemble", "4", "--out-dir", models},
      {"calibrate", "--models", models, "--train", sp + "/train.csv", "--val", sp + "/val.csv", "--out", cal},
      {"predict", "--models", models, "--in", sp + "/test.csv", "--calibration", cal, "--out", pred},
      {"eval", "--pred", pred, "--out", rep}};
  for (const auto& s : steps) {
    std::string err;
    if (const int code = airi(s, &err); code != 0) {
      return {false, "airi " + s[0] + " exited " + std::to_string(code) + ": " + err};
    }
  }
  e2e.ran = true;
  e2e.dir = d;

  const auto train = load_dataset(sp + "/train.csv");
  const auto test = load_dataset(sp + "/test.csv");
  e2e.n_test = test.size();
  double mean = 0.0;
  for (const auto& r : train) mean += *r.ri;
  mean /= static_cast<double>(train.size());
  double baseline = 0.0;
  for (const auto& r : test) baseline += std::abs(*r.ri - mean);
  baseline /= static_cast<double>(test.size());

  std::ifstream is(rep);
  const auto report = nlohmann::json::parse(is);
  const auto& all = report["groups"][0];
  const double test_mae = all["mae"].get<double>();
  const double z_corr = all["z_std"].get<double>();
  const double z_raw = all["uncorrected"]["z_std"].get<double>();
  const double s = sw.seconds();
  const bool pass = test_mae * 3.0 <= baseline && z_corr >= 0.8 && z_corr <= 1.3 && z_corr <= z_raw && s < 1800.0;
  return {pass, "test MAE " + fmt("%.2f", test_mae) + " vs mean baseline " + fmt("%.2f", baseline) +
                    ", Z std " + fmt("%.3f", z_raw) + " -> " + fmt("%.3f", z_corr) + ", " + fmt("%.0f", s) +
                    " s"};
}

double sidecar_column_sum(const std::string& path, const std::string& column) {
  std::ifstream is(path);
  const auto rows = csv::read(is);
  if (rows.empty()) throw DataError(path + " is empty");
  const auto it = std::find(rows[0].begin(), rows[0].end(), column);
  if (it == rows[0].end()) throw DataError(path + " has no column " + column);
  const auto col = static_cast<std::size_t>(it - rows[0].begin());
  double total = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) total += *parse_double(rows[i][col]);
  return total;
}

// 9
Outcome figures(const E2E& e2e) {
  if (!e2e.ran) return {false, "end-to-end run did not produce predictions"};
  const std::string pred = (e2e.dir / "pred.csv").string(), cal = (e2e.dir / "cal.json").string();
  const std::vector<std::pair<std::string, std::vector<std::string>>> kinds = {
      {"error-hist", {"count"}}, {"z-hist", {"count_uncorrected", "count_corrected"}}, {"ratio-curve", {"count"}}};
  const double n = static_cast<double>(e2e.n_test);
  std::string detail;
  bool pass = true;
  for (const auto& [kind, columns] : kinds) {
    const std::string svg = (e2e.dir / (kind + ".svg")).string();
    std::vector<std::string> args = {"plot", "--pred", pred, "--kind", kind, "--out", svg};
    if (kind == "ratio-curve") {
      args.push_back("--calibration");
      args.push_back(cal);
    }
    std::string err;
    if (const int code = airi(args, &err); code != 0) return {false, kind + " exited " + std::to_string(code) + ": " + err};
    std::ifstream is(svg);
    const std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    pass = pass && text.find("<svg") != std::string::npos;
    for (const auto& c : columns) {
      const double total = sidecar_column_sum(cli::sidecar_path(svg), c);
      pass = pass && total == n;
      detail += (detail.empty() ? "" : ", ") + kind + " " + c + " " + fmt("%.0f", total);
    }
  }
  return {pass, detail + " of " + fmt("%.0f", n)};
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / ("airi_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(root);
  E2E e2e;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient check", gradient_check},
      {"permutation invariance", permutation_invariance},
      {"overfit", overfit},
      {"end-to-end", [&] { return end_to_end(root, e2e); }},
      {"calibration exactness", calibration_exactness},
      {"oracles", oracles},
      {"parameter count", parameter_count},
      {"round trips", [&] { return round_trips(root); }},
      {"figures", [&] { return figures(e2e); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
              << "): " << o.detail << std::endl;
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
