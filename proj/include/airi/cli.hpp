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

// The `airi` command line. run() returns the process exit code: 0 on
// success, 1 for bad input or usage, 2 for internal errors.

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "airi/chem.hpp"
#include "airi/config.hpp"
#include "airi/dataset.hpp"
#include "airi/metrics.hpp"
#include "airi/pagtn.hpp"
#include "airi/plot.hpp"
#include "airi/synth.hpp"
#include "airi/train.hpp"
#include "airi/uncertainty.hpp"

namespace airi::cli {

namespace fs = std::filesystem;

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  os << text;
  if (!os) throw Error("write failed: " + path);
}

inline std::string lower_ext(const std::string& path) {
  std::string e = fs::path(path).extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

// Structures from a dataset CSV, a .smi file (SMILES, optional tab and id)
// or an SDF file (title line as id).
inline std::vector<DatasetRecord> read_structures(const std::string& path) {
  const std::string ext = lower_ext(path);
  std::vector<DatasetRecord> out;
  if (ext == ".smi") {
    std::istringstream is(read_file(path));
    std::string line;
    int n = 0;
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      ++n;
      DatasetRecord r;
      const auto tab = line.find('\t');
      r.smiles = line.substr(0, tab);
      r.id = tab == std::string::npos ? "mol" + std::to_string(n) : line.substr(tab + 1);
      out.push_back(std::move(r));
    }
    return out;
  }
  if (ext == ".sdf" || ext == ".mol") {
    int n = 0;
    for (const auto& block : chem::split_sdf(read_file(path))) {
      ++n;
      DatasetRecord r;
      const std::string title = block.substr(0, block.find('\n'));
      r.id = title.find_first_not_of(" \t\r") == std::string::npos ? "mol" + std::to_string(n) : title;
      try {
        r.smiles = chem::write_smiles(chem::parse_molfile(block));
      } catch (const ChemError& e) {
        throw DataError("record '" + r.id + "': " + e.what());
      }
      out.push_back(std::move(r));
    }
    return out;
  }
  return load_dataset(path, false);
}

// *.airi files in name order.
inline std::vector<Model> load_models(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir);
  std::vector<std::string> paths;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".airi") paths.push_back(e.path().string());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw Error("no .airi weight files in " + dir);
  std::vector<Model> models;
  for (const auto& p : paths) {
    try {
      models.push_back(load_weights(p));
    } catch (const Error& e) {
      throw Error(p + ": " + e.what());
    }
  }
  return models;
}

// Ensemble mean and std; a single model gets std 0.
inline std::vector<EnsemblePrediction> predict_records(const std::vector<Model>& models,
                                                       const std::vector<DatasetRecord>& records) {
  const auto graphs = featurize_records(records, models.front().config.max_path_len);
  if (models.size() >= 2) return ensemble_predict(models, graphs);
  std::vector<EnsemblePrediction> out;
  for (double v : predict_ri(models.front(), graphs)) {
    EnsemblePrediction p;
    p.mean = v;
    p.members = {v};
    out.push_back(p);
  }
  return out;
}

inline std::vector<double> observed(const std::vector<DatasetRecord>& records) {
  std::vector<double> out;
  for (const auto& r : records) {
    if (!r.ri) throw DataError("record '" + r.id + "' has no RI");
    out.push_back(*r.ri);
  }
  return out;
}

inline std::string model_stem(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "model_%02d", k);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands

inline void cmd_standardize(const std::string& in, const std::string& out, const std::string& fragment,
                            std::ostream& log) {
  chem::StandardizeConfig cfg;
  if (fragment == "largest") cfg.fragments = chem::FragmentPolicy::kLargest;
  else if (fragment != "reject") throw Error("--fragment must be 'reject' or 'largest'");
  auto records = detail::read_structures(in);
  for (auto& r : records) r.smiles = chem::write_smiles(record_molecule(r, cfg));
  save_dataset(out, records);
  log << "standardized " << records.size() << " structures\n";
}

inline void cmd_synth(int n, std::uint64_t seed, const std::string& out, double tms_fraction, int max_units,
                      std::ostream& log) {
  synth::SynthSpec spec;
  spec.n = n;
  spec.seed = seed;
  spec.tms_fraction = tms_fraction;
  spec.max_units = max_units;
  save_dataset(out, synth::generate_records(spec));
  log << "wrote " << n << " synthetic records to " << out << '\n';
}

inline std::array<double, 3> parse_fractions(const std::string& s) {
  std::array<double, 3> f{};
  std::size_t start = 0;
  for (int k = 0; k < 3; ++k) {
    const std::size_t end = s.find(',', start);
    if ((k < 2) == (end == std::string::npos)) throw Error("--frac needs three comma-separated numbers");
    const auto v = parse_double(std::string_view(s).substr(start, end == std::string::npos ? s.npos : end - start));
    if (!v) throw Error("--frac needs three comma-separated numbers");
    f[k] = *v;
    start = end + 1;
  }
  return f;
}

inline void cmd_split(const std::string& in, const std::string& frac, std::uint64_t seed, double cutoff,
                      const std::string& out_dir, std::ostream& log) {
  const auto s = split_dataset(load_dataset(in), parse_fractions(frac), seed, cutoff);
  fs::create_directories(out_dir);
  save_dataset((fs::path(out_dir) / "train.csv").string(), s.train);
  save_dataset((fs::path(out_dir) / "val.csv").string(), s.validation);
  save_dataset((fs::path(out_dir) / "test.csv").string(), s.test);
  log << "train " << s.train.size() << ", validation " << s.validation.size() << ", test " << s.test.size()
      << ", excluded above cutoff " << s.excluded << '\n';
}

inline void cmd_train(const std::string& config, const std::string& train_path, const std::string& val_path,
                      std::optional<std::uint64_t> seed, int members, unsigned threads, const std::string& out_dir,
                      std::ostream& log) {
  RunConfig rc = config.empty() ? RunConfig{} : load_run_config(config);
  if (seed) rc.train.seed = *seed;
  rc.model.dropout_p = rc.train.dropout;
  const auto train_records = load_dataset(train_path);
  const auto val_records = load_dataset(val_path);
  const auto train = featurize_records(train_records, rc.model.max_path_len);
  const auto val = featurize_records(val_records, rc.model.max_path_len);
  fs::create_directories(out_dir);

  std::vector<std::unique_ptr<std::ofstream>> logs;
  for (int k = 0; k < members; ++k) {
    const auto p = fs::path(out_dir) / (detail::model_stem(k) + ".log.jsonl");
    logs.push_back(std::make_unique<std::ofstream>(p, std::ios::binary));
    if (!*logs.back()) throw Error("cannot write " + p.string());
  }
  const auto cks = train_ensemble(rc.model, rc.train, train, val, rc.train.seed, members, threads,
                                  [&](int k) -> std::ostream* { return logs[k].get(); });

  nlohmann::json summary{{"model", rc.model}, {"train", rc.train}, {"members", nlohmann::json::array()}};
  std::vector<Model> models;
  for (int k = 0; k < members; ++k) {
    const auto stem = (fs::path(out_dir) / detail::model_stem(k)).string();
    save_weights(cks[k].model.params, cks[k].model.config, stem + ".airi");
    std::ofstream os(stem + ".opt", std::ios::binary);
    write_optimizer_state(os, cks[k].optimizer);
    if (!os) throw Error("write failed: " + stem + ".opt");
    summary["members"].push_back({{"seed", rc.train.seed + static_cast<std::uint64_t>(k)},
                                  {"best_epoch", cks[k].best_epoch},
                                  {"best_val_mae_ri", cks[k].best_val_mae_ri},
                                  {"epochs", cks[k].log.size()}});
    log << detail::model_stem(k) << ": best epoch " << cks[k].best_epoch << ", validation MAE "
        << format_g6(cks[k].best_val_mae_ri) << '\n';
    models.push_back(cks[k].model);
  }
  const auto preds = detail::predict_records(models, val_records);
  std::vector<double> mean;
  for (const auto& p : preds) mean.push_back(p.mean);
  const double val_mae = mae(mean, detail::observed(val_records));
  summary["ensemble_val_mae_ri"] = val_mae;
  detail::write_file((fs::path(out_dir) / "summary.json").string(), summary.dump(2) + "\n");
  log << "ensemble validation MAE " << format_g6(val_mae) << '\n';
}

inline std::vector<PredictionRow> make_rows(const std::vector<DatasetRecord>& records,
                                            const std::vector<EnsemblePrediction>& preds,
                                            const std::optional<CalibrationTable>& calibration) {
  std::vector<PredictionRow> rows;
  for (std::size_t i = 0; i < records.size(); ++i) {
    PredictionRow r;
    r.id = records[i].id;
    r.smiles = records[i].smiles;
    r.ri_pred = preds[i].mean;
    r.sigma_pred = preds[i].std;
    if (calibration) r.sigma_corrected = apply_calibration(*calibration, r.sigma_pred);
    r.ri_obs = records[i].ri;
    r.tags = records[i].tags;
    set_z(r);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void cmd_predict(const std::string& models_dir, const std::string& in, const std::string& calibration,
                        const std::string& out, std::ostream& log) {
  const auto models = detail::load_models(models_dir);
  const auto records = detail::read_structures(in);
  std::optional<CalibrationTable> table;
  if (!calibration.empty()) table = load_calibration(calibration);
  save_dump(out, make_rows(records, detail::predict_records(models, records), table));
  log << "predicted " << records.size() << " structures with " << models.size() << " models\n";
}

inline void cmd_calibrate(const std::string& models_dir, const std::string& train_path, const std::string& val_path,
                          const CalibrationGrid& grid, const std::string& out, std::ostream& log) {
  const auto models = detail::load_models(models_dir);
  if (models.size() < 2) throw Error("calibration needs an ensemble of at least 2 models");
  const auto train = load_dataset(train_path);
  const auto val = load_dataset(val_path);
  const auto fit = residuals(detail::predict_records(models, train), detail::observed(train));
  const auto held = residuals(detail::predict_records(models, val), detail::observed(val));
  const auto s = search_calibration(fit, held, grid);
  save_calibration(s.table, out);
  std::vector<double> err, sigma;
  for (const auto& r : held) {
    err.push_back(r.error);
    sigma.push_back(r.sigma);
  }
  const ZSummary raw = summarize_z(err, sigma);
  log << "selected p=" << s.table.p << " b=" << format_g6(s.table.b) << " (" << s.table.ratios.size()
      << " bins); validation Z std " << format_g6(raw.z_std) << " -> " << format_g6(s.val.z_std)
      << ", 95th percentile |Z| x mean std " << format_g6(s.val.z_abs_p95_ri) << '\n';
}

inline void cmd_eval(const std::string& pred, const std::string& tag, const std::string& out, std::ostream& log) {
  const auto rep = group_report(load_dump(pred), tag);
  if (rep.groups.empty()) throw DataError("no rows with ri_obs in " + pred);
  if (!out.empty()) detail::write_file(out, report_to_json(rep).dump(2) + "\n");
  log << report_to_text(rep);
}

inline std::string sidecar_path(const std::string& out) {
  return fs::path(out).replace_extension(".csv").string();
}

inline void cmd_plot(const std::string& pred, const std::string& kind, const std::string& calibration,
                     const std::string& out, std::ostream& log) {
  const auto rows = load_dump(pred);
  plot::Figure fig;
  if (kind == "error-hist") {
    fig = plot::error_hist(rows);
  } else if (kind == "z-hist") {
    fig = plot::z_hist(rows);
  } else if (kind == "ratio-curve") {
    if (calibration.empty()) throw Error("ratio-curve needs --calibration");
    fig = plot::ratio_curve(load_calibration(calibration), rows);
  } else {
    throw Error("--kind must be error-hist, z-hist or ratio-curve");
  }
  if (sidecar_path(out) == out) throw Error("--out must not end in .csv");
  detail::write_file(out, fig.svg);
  detail::write_file(sidecar_path(out), fig.csv);
  log << "wrote " << out << " and " << sidecar_path(out) << '\n';
}

// ---------------------------------------------------------------------------

inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Retention index prediction with path-augmented graph transformers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "airi 1.0.0");

  std::string in, out_path, dir, frac = "0.93,0.02,0.05", fragment = "reject", config, train_path, val_path,
                                    calibration, kind, tag = kTmsTag;
  int n = 1000, members = 1, max_units = 5;
  unsigned threads = 0;
  std::uint64_t seed = 0;
  double cutoff = kDefaultRiCutoff, tms_fraction = 0.5;
  CalibrationGrid grid;

  auto* standardize = app.add_subcommand("standardize", "Standardize structures to canonical dataset CSV");
  standardize->add_option("--in", in, "CSV, .smi or .sdf input")->required();
  standardize->add_option("--out", out_path, "dataset CSV")->required();
  standardize->add_option("--fragment", fragment, "reject|largest")->check(CLI::IsMember({"reject", "largest"}));

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--n", n)->required()->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", seed);
  synth->add_option("--out", out_path)->required();
  synth->add_option("--tms-fraction", tms_fraction)->check(CLI::Range(0.0, 1.0));
  synth->add_option("--max-units", max_units)->check(CLI::PositiveNumber);

  auto* split = app.add_subcommand("split", "Split a dataset into train/val/test");
  split->add_option("--in", in)->required();
  split->add_option("--frac", frac, "train,val,test fractions");
  split->add_option("--seed", seed);
  split->add_option("--cutoff", cutoff, "drop records with larger RI");
  split->add_option("--out-dir", dir)->required();

  std::optional<std::uint64_t> train_seed;
  auto* train = app.add_subcommand("train", "Train a model or an ensemble");
  train->add_option("--config", config, "YAML run config");
  train->add_option("--train", train_path)->required();
  train->add_option("--val", val_path)->required();
  train->add_option("--seed", train_seed, "overrides the config seed");
  train->add_option("--ensemble", members, "members, seeds seed..seed+N-1")->check(CLI::PositiveNumber);
  train->add_option("--threads", threads, "0: all cores");
  train->add_option("--out-dir", dir)->required();

  auto* predict = app.add_subcommand("predict", "Predict RI with an ensemble");
  predict->add_option("--models", dir)->required();
  predict->add_option("--in", in)->required();
  predict->add_option("--calibration", calibration);
  predict->add_option("--out", out_path)->required();
  predict->add_option("--seed", seed, "unused; predictions are deterministic");

  auto* calibrate = app.add_subcommand("calibrate", "Fit the std calibration table");
  calibrate->add_option("--models", dir)->required();
  calibrate->add_option("--train", train_path)->required();
  calibrate->add_option("--val", val_path)->required();
  calibrate->add_option("--p-min", grid.p_min)->check(CLI::Range(50, 99));
  calibrate->add_option("--p-max", grid.p_max)->check(CLI::Range(50, 99));
  calibrate->add_option("--b-min", grid.b_min)->check(CLI::PositiveNumber);
  calibrate->add_option("--b-max", grid.b_max)->check(CLI::PositiveNumber);
  calibrate->add_option("--b-step", grid.b_step)->check(CLI::PositiveNumber);
  calibrate->add_option("--min-bin-count", grid.min_bin_count)->check(CLI::PositiveNumber);
  calibrate->add_option("--out", out_path)->required();
  calibrate->add_option("--seed", seed, "unused; calibration is deterministic");

  auto* eval = app.add_subcommand("eval", "Evaluate a prediction dump");
  eval->add_option("--pred", in)->required();
  eval->add_option("--group-tag", tag);
  eval->add_option("--out", out_path, "JSON report");

  auto* plot = app.add_subcommand("plot", "Plot a prediction dump as SVG with a CSV sidecar");
  plot->add_option("--pred", in)->required();
  plot->add_option("--kind", kind)->required()->check(CLI::IsMember({"error-hist", "z-hist", "ratio-curve"}));
  plot->add_option("--calibration", calibration);
  plot->add_option("--out", out_path)->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (*standardize) cmd_standardize(in, out_path, fragment, out);
    else if (*synth) cmd_synth(n, seed, out_path, tms_fraction, max_units, out);
    else if (*split) cmd_split(in, frac, seed, cutoff, dir, out);
    else if (*train) cmd_train(config, train_path, val_path, train_seed, members, threads, dir, out);
    else if (*predict) cmd_predict(dir, in, calibration, out_path, out);
    else if (*calibrate) cmd_calibrate(dir, train_path, val_path, grid, out_path, out);
    else if (*eval) cmd_eval(in, tag, out_path, out);
    else if (*plot) cmd_plot(in, kind, calibration, out_path, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 2;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args));
}

}  // namespace airi::cli
