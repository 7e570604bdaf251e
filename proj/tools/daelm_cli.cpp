/*
Copyright 2026 The DAELM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS-IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// daelm: command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "daelm/daelm.hpp"

namespace {

namespace fs = std::filesystem;
using namespace daelm;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options shared by bench, sweep and train. Method-dependent defaults stay
// empty until resolve() knows the method.
struct ExperimentFlags {
  std::string method = "daelm-s";
  std::string setting = "1";
  std::optional<Index> guides;
  Index hidden = 1000;
  std::string activation = "radbas";
  std::optional<double> c_s;
  std::optional<double> c_t;
  std::optional<double> c_tu;
  int runs = 10;
  std::uint64_t seed = 1;
  std::string scaling = "global";
  int jobs = 1;

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    try {
      cfg = default_config(parse_method(method));
      cfg.setting = parse_setting(setting);
      cfg.activation = parse_activation(activation);
      cfg.scaling = parse_scaling(scaling);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (guides) cfg.guides = *guides;
    if (c_s) cfg.penalties.source = *c_s;
    if (c_t) cfg.penalties.target = *c_t;
    if (c_tu) cfg.penalties.unlabeled = *c_tu;
    cfg.hidden = hidden;
    cfg.runs = runs;
    cfg.base_seed = seed;
    cfg.jobs = jobs;
    try {
      check_config(cfg);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

struct DataFlags {
  std::string data_dir;
  Index features = kGasFeatures;
};

void add_data_flags(CLI::App* cmd, DataFlags& d) {
  cmd->add_option("--data-dir", d.data_dir, "Directory holding batch1.dat .. batch10.dat")
      ->envname("DAELM_DATA_DIR")
      ->required();
  cmd->add_option("--features", d.features, "Feature count per sample")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f, bool with_setting, bool with_runs) {
  cmd->add_option("--method", f.method, "elm | daelm-s | daelm-t")
      ->capture_default_str()
      ->check(CLI::IsMember({"elm", "daelm-s", "daelm-t"}));
  if (with_setting)
    cmd->add_option("--setting", f.setting, "1 = fixed source batch 1, 2 = source batch K-1")
        ->capture_default_str()
        ->check(CLI::IsMember({"1", "2"}));
  cmd->add_option("--guides", f.guides,
                  "Labeled target guides chosen by SSA [default: 30 for elm/daelm-s, 50 for daelm-t]");
  cmd->add_option("--hidden", f.hidden, "Hidden neurons L")->capture_default_str();
  cmd->add_option("--activation", f.activation, "radbas | sigmoid")
      ->capture_default_str()
      ->check(CLI::IsMember({"radbas", "sigmoid"}));
  cmd->add_option("--c-s", f.c_s,
                  "Source penalty C_S (ELM penalty for elm) [default: 0.01 elm/daelm-s, 0.001 daelm-t]");
  cmd->add_option("--c-t", f.c_t, "Target guide penalty C_T [default: 10 daelm-s, 0.001 daelm-t]");
  cmd->add_option("--c-tu", f.c_tu, "Unlabeled target penalty C_Tu [default: 100]");
  if (with_runs) {
    cmd->add_option("--runs", f.runs, "Repetitions with seeds seed..seed+runs-1")
        ->capture_default_str();
    cmd->add_option("--jobs", f.jobs, "Parallel workers")->capture_default_str();
  }
  cmd->add_option("--seed", f.seed, "Base seed for the random hidden layers")->capture_default_str();
  cmd->add_option("--scaling", f.scaling, "global | per-task min-max fit")
      ->capture_default_str()
      ->check(CLI::IsMember({"global", "per-task"}));
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text_atomic(out_path, text);
  }
}

std::vector<SampleSet> load(const DataFlags& d) { return load_corpus(d.data_dir, kGasBatches, d.features); }

ScalerParams task_scaler(const ExperimentConfig& cfg, const std::vector<SampleSet>& corpus,
                         int source, std::optional<int> target) {
  if (cfg.scaling == ScalingMode::global) return fit_scaler(corpus);
  std::vector<SampleSet> parts{corpus.at(static_cast<std::size_t>(source - 1))};
  if (target) parts.push_back(corpus.at(static_cast<std::size_t>(*target - 1)));
  return fit_scaler(parts);
}

std::vector<Index> parse_ks(const std::string& text) {
  std::vector<Index> ks;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    Index k = 0;
    if (!daelm::detail::parse_int(item, k) || k < 2)
      throw UsageError("bad guide count '" + item + "'");
    ks.push_back(k);
  }
  if (ks.empty()) throw UsageError("--ks is empty");
  return ks;
}

void check_batch_id(int id, const char* flag) {
  if (id < 1 || id > kGasBatches)
    throw UsageError(std::string(flag) + " must be in 1.." + std::to_string(kGasBatches));
}

// Reads `key = value` lines ('#' starts a comment) and applies each to the
// flag --key of `cmd` unless that flag was given on the command line.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string v) {
      const auto first = v.find_first_not_of(" \t\r");
      if (first == std::string::npos) return std::string();
      return v.substr(first, v.find_last_not_of(" \t\r") - first + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config") throw UsageError("config files cannot nest");
    CLI::Option* opt = nullptr;
    try {
      opt = cmd->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Domain adaptation extreme learning machines for sensor drift compensation", "daelm"};
  app.require_subcommand(0, 1);

  // validate-data
  DataFlags validate_data;
  auto* validate = app.add_subcommand("validate-data", "Check batch files against published counts");
  add_data_flags(validate, validate_data);

  // select-guides
  DataFlags select_data;
  int select_batch = 2;
  Index select_k = 30;
  std::string select_out;
  auto* select = app.add_subcommand("select-guides", "Print SSA guide indices for one batch");
  add_data_flags(select, select_data);
  select->add_option("--batch", select_batch, "Target batch id")->capture_default_str();
  select->add_option("--guides", select_k, "Number of guides")->capture_default_str();
  select->add_option("--out", select_out, "Output file (default stdout)");

  // train
  DataFlags train_data;
  ExperimentFlags train_flags;
  int train_source = 1;
  std::optional<int> train_target;
  std::string train_model;
  auto* train = app.add_subcommand("train", "Train one classifier and save it");
  add_data_flags(train, train_data);
  add_experiment_flags(train, train_flags, false, false);
  train->add_option("--source", train_source, "Source batch id")->capture_default_str();
  train->add_option("--target", train_target, "Target batch id (required for daelm-s/daelm-t)");
  train->add_option("--model", train_model, "Output model file")->required();

  // predict
  std::string predict_model, predict_input, predict_out;
  auto* pred = app.add_subcommand("predict", "Classify a batch file with a saved model");
  pred->add_option("--model", predict_model, "Model file written by train")->required();
  pred->add_option("--input", predict_input, "Batch file to classify")->required();
  pred->add_option("--out", predict_out, "Output file for labels (default stdout)");

  // bench
  DataFlags bench_data;
  ExperimentFlags bench_flags;
  std::string bench_out, bench_format = "table";
  auto* bench = app.add_subcommand("bench", "Run setting 1 or 2 for one method");
  add_data_flags(bench, bench_data);
  add_experiment_flags(bench, bench_flags, true, true);
  bench->add_option("--out", bench_out, "Output file (default stdout)");
  bench->add_option("--format", bench_format, "table | csv | jsonl")
      ->capture_default_str()
      ->check(CLI::IsMember({"table", "csv", "jsonl"}));
  std::string bench_config;
  bench->add_option("--config", bench_config, "Flat key = value file with defaults for these flags");

  // sweep
  DataFlags sweep_data;
  ExperimentFlags sweep_flags;
  std::string sweep_out, sweep_ks = "5,10,15,20,25,30,35,40,45,50";
  auto* sweep = app.add_subcommand("sweep", "Run one protocol for several guide counts (CSV)");
  add_data_flags(sweep, sweep_data);
  add_experiment_flags(sweep, sweep_flags, true, true);
  sweep->add_option("--ks", sweep_ks, "Comma-separated guide counts")->capture_default_str();
  sweep->add_option("--out", sweep_out, "Output CSV file (default stdout)");
  std::string sweep_config;
  sweep->add_option("--config", sweep_config, "Flat key = value file with defaults for these flags");

  if (argc <= 1) {
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*bench && !bench_config.empty()) apply_config_file(bench, bench_config);
    if (*sweep && !sweep_config.empty()) apply_config_file(sweep, sweep_config);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*validate) {
      const auto report = validate_corpus(load(validate_data));
      std::cout << format_corpus_report(report);
      return report.ok() ? kExitOk : kExitData;
    }

    if (*select) {
      check_batch_id(select_batch, "--batch");
      const auto corpus = load(select_data);
      const auto scaled = apply_scaler(fit_scaler(corpus),
                                       corpus[static_cast<std::size_t>(select_batch - 1)]);
      const auto g = ssa_select(scaled, select_k);
      if (g.truncated)
        std::cerr << "warning: batch " << select_batch << " has only " << scaled.size()
                  << " samples; selected all\n";
      std::string text;
      for (Index i : g.indices) text += std::to_string(i) + '\n';
      emit(select_out, text);
      return kExitOk;
    }

    if (*train) {
      const auto cfg = train_flags.resolve();
      check_batch_id(train_source, "--source");
      if (train_target) check_batch_id(*train_target, "--target");
      if (cfg.method != Method::elm && !train_target)
        throw UsageError("--target is required for " + std::string(to_string(cfg.method)));
      const auto corpus = load(train_data);
      const auto scaler = task_scaler(cfg, corpus, train_source, train_target);
      const auto source = apply_scaler(scaler, corpus[static_cast<std::size_t>(train_source - 1)]);

      SampleSet guides = select_rows(source, {});
      SampleSet unlabeled = guides;
      if (train_target) {
        const auto target =
            apply_scaler(scaler, corpus[static_cast<std::size_t>(*train_target - 1)]);
        if (cfg.guides >= target.size())
          throw DataError("--guides must be fewer than the target batch size");
        std::tie(guides, unlabeled) = split_target(target, ssa_select(target, cfg.guides));
      }
      const auto model = train_method(cfg, source, guides, unlabeled, cfg.base_seed);

      std::ostringstream file;
      file << "daelm-model 1\n";
      file << "method " << to_string(cfg.method) << '\n';
      write_scaler(file, scaler);
      write_classifier(file, model.classifier);
      write_text_atomic(train_model, file.str());

      if (train_target) {
        const auto predicted = predict(model.classifier, unlabeled).labels;
        std::cout << "evaluated " << unlabeled.size() << " accuracy "
                  << daelm::detail::fixed(100.0 * accuracy(predicted, unlabeled.labels), 2)
                  << '\n';
      }
      return kExitOk;
    }

    if (*pred) {
      std::ifstream in(predict_model);
      if (!in) throw DataError("cannot open " + predict_model);
      std::string tag, method;
      int version = 0;
      if (!(in >> tag >> version) || tag != "daelm-model" || version != 1)
        throw DataError("not a daelm model file");
      if (!(in >> tag >> method) || tag != "method") throw DataError("malformed model header");
      const auto scaler = read_scaler(in);
      const auto classifier = read_classifier(in);
      if (classifier.map.inputs() != scaler.dims())
        throw DataError("model scaler and feature map disagree on dimensions");

      const auto batch = load_batch(predict_input, scaler.dims(), 1, classifier.classes);
      const auto result = predict(classifier, apply_scaler(scaler, batch));
      std::string text;
      for (int label : result.labels) text += std::to_string(label) + '\n';
      emit(predict_out, text);
      std::cerr << "accuracy "
                << daelm::detail::fixed(100.0 * accuracy(result.labels, batch.labels), 2) << '\n';
      return kExitOk;
    }

    if (*bench) {
      const auto cfg = bench_flags.resolve();
      const auto corpus = load(bench_data);
      const auto report = run_experiment(cfg, corpus);
      emit(bench_out, emit_report(report, parse_format(bench_format)));
      return kExitOk;
    }

    if (*sweep) {
      const auto cfg = sweep_flags.resolve();
      const auto ks = parse_ks(sweep_ks);
      const auto corpus = load(sweep_data);
      const auto reports = sweep_guides(cfg, corpus, ks);
      emit(sweep_out, emit_sweep_csv(reports));
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }

  std::cerr << app.help();
  return kExitUsage;
}
