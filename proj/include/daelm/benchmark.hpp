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

// Drift-compensation experiments over a sequence of batches.
//
// Setting 1 (fixed source) trains on batch 1 and evaluates batches 2..B;
// setting 2 (rolling source) trains on batch K-1 and evaluates batch K.
// For every task the guides are chosen once by SSA on the scaled target
// batch; each run then draws fresh feature maps from base_seed + run and
// scores the non-guide remainder of the target batch.

#ifndef DAELM_BENCHMARK_HPP_
#define DAELM_BENCHMARK_HPP_

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "daelm/common.hpp"
#include "daelm/dataset.hpp"
#include "daelm/feature_map.hpp"
#include "daelm/guide_selection.hpp"
#include "daelm/solvers.hpp"

namespace daelm {

enum class Method { elm, daelm_s, daelm_t };
enum class Setting { fixed_source, rolling_source };
enum class ScalingMode { global, per_task };
enum class ReportFormat { table, csv, jsonl };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::elm: return "elm";
    case Method::daelm_s: return "daelm-s";
    case Method::daelm_t: return "daelm-t";
  }
  return "";
}

inline Method parse_method(std::string_view s) {
  if (s == "elm") return Method::elm;
  if (s == "daelm-s" || s == "daelm_s") return Method::daelm_s;
  if (s == "daelm-t" || s == "daelm_t") return Method::daelm_t;
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

inline int setting_number(Setting s) { return s == Setting::fixed_source ? 1 : 2; }

inline Setting parse_setting(std::string_view s) {
  if (s == "1" || s == "fixed_source" || s == "fixed-source") return Setting::fixed_source;
  if (s == "2" || s == "rolling_source" || s == "rolling-source") return Setting::rolling_source;
  throw std::invalid_argument("unknown setting '" + std::string(s) + "'");
}

inline std::string_view to_string(ScalingMode m) {
  return m == ScalingMode::global ? "global" : "per-task";
}

inline ScalingMode parse_scaling(std::string_view s) {
  if (s == "global") return ScalingMode::global;
  if (s == "per-task" || s == "per_task") return ScalingMode::per_task;
  throw std::invalid_argument("unknown scaling mode '" + std::string(s) + "'");
}

inline ReportFormat parse_format(std::string_view s) {
  if (s == "table") return ReportFormat::table;
  if (s == "csv") return ReportFormat::csv;
  if (s == "jsonl" || s == "json-lines") return ReportFormat::jsonl;
  throw std::invalid_argument("unknown format '" + std::string(s) + "'");
}

// Published hyperparameters. ELM reads its single penalty from `source`.
inline Penalties default_penalties(Method m) {
  switch (m) {
    case Method::elm: return {0.01, 0.0, 0.0};
    case Method::daelm_s: return {0.01, 10.0, 0.0};
    case Method::daelm_t: return {0.001, 0.001, 100.0};
  }
  return {};
}

inline Index default_guides(Method m) { return m == Method::daelm_t ? 50 : 30; }

struct ExperimentConfig {
  Method method = Method::daelm_s;
  Setting setting = Setting::fixed_source;
  Index guides = 30;
  Index hidden = 1000;
  Penalties penalties = default_penalties(Method::daelm_s);
  int runs = 10;
  std::uint64_t base_seed = 1;
  Activation activation = Activation::radbas;
  ScalingMode scaling = ScalingMode::global;
  int jobs = 1;
};

inline ExperimentConfig default_config(Method m) {
  ExperimentConfig cfg;
  cfg.method = m;
  cfg.guides = default_guides(m);
  cfg.penalties = default_penalties(m);
  return cfg;
}

inline void check_config(const ExperimentConfig& cfg) {
  if (cfg.runs < 1) throw std::invalid_argument("runs must be at least 1");
  if (cfg.hidden < 1) throw std::invalid_argument("hidden size must be at least 1");
  if (cfg.guides < 2) throw std::invalid_argument("guides must be at least 2");
  if (cfg.jobs < 1) throw std::invalid_argument("jobs must be at least 1");
  if (!(cfg.penalties.source > 0.0)) throw std::invalid_argument("C_S must be positive");
  if (cfg.method != Method::elm && !(cfg.penalties.target > 0.0))
    throw std::invalid_argument("C_T must be positive");
  if (cfg.method == Method::daelm_t && !(cfg.penalties.unlabeled > 0.0))
    throw std::invalid_argument("C_Tu must be positive");
}

/// Seed of the second (target) hidden layer used by DAELM-T.
inline std::uint64_t target_map_seed(std::uint64_t seed) { return seed + 0x9E3779B97F4A7C15ULL; }

// ---------------------------------------------------------------------------
// Training one method on one task

struct TrainedModel {
  Classifier classifier;           // used for prediction on the target domain
  std::optional<Classifier> base;  // DAELM-T only: source-trained base classifier
};

/// Trains `cfg.method` from scaled inputs. `guides` may be empty for ELM.
/// `unlabeled` is only read by DAELM-T.
inline TrainedModel train_method(const ExperimentConfig& cfg, const SampleSet& source,
                                 const SampleSet& guides, const SampleSet& unlabeled,
                                 std::uint64_t seed) {
  const int m = source.classes;
  const Index n = source.dims();
  TrainedModel model;

  switch (cfg.method) {
    case Method::elm: {
      const SampleSet train = guides.size() > 0 ? concat(source, guides) : source;
      auto map = new_feature_map(cfg.hidden, n, cfg.activation, seed);
      const Matrix t = encode_targets(train.labels, m).targets;
      auto w = train_elm(hidden_output(map, train), t, cfg.penalties.source);
      model.classifier = {std::move(map), std::move(w), m};
      break;
    }
    case Method::daelm_s: {
      if (guides.size() == 0) throw std::invalid_argument("DAELM-S needs labeled guides");
      auto map = new_feature_map(cfg.hidden, n, cfg.activation, seed);
      auto w = train_daelm_s(hidden_output(map, source), encode_targets(source.labels, m).targets,
                             hidden_output(map, guides), encode_targets(guides.labels, m).targets,
                             cfg.penalties);
      model.classifier = {std::move(map), std::move(w), m};
      break;
    }
    case Method::daelm_t: {
      if (guides.size() == 0) throw std::invalid_argument("DAELM-T needs labeled guides");
      auto base_map = new_feature_map(cfg.hidden, n, cfg.activation, seed);
      auto base_w = train_daelm_t_base(hidden_output(base_map, source),
                                       encode_targets(source.labels, m).targets,
                                       cfg.penalties.source);
      Classifier base{std::move(base_map), std::move(base_w), m};

      auto map = new_feature_map(cfg.hidden, n, cfg.activation, target_map_seed(seed));
      const Matrix h_unlabeled = hidden_output(map, unlabeled);
      // Pseudo-targets are the base classifier's raw scores through its own
      // hidden layer.
      const Matrix pseudo = predict(base, unlabeled).scores;
      auto w = train_daelm_t(hidden_output(map, guides), encode_targets(guides.labels, m).targets,
                             h_unlabeled, pseudo, cfg.penalties);
      model.classifier = {std::move(map), std::move(w), m};
      model.base = std::move(base);
      break;
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Experiment protocol

struct TaskResult {
  int source = 0;
  int target = 0;
  std::vector<Index> guide_indices;
  Index evaluated = 0;
  std::vector<double> run_accuracy;  // percent
  double mean = 0.0;                 // percent
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<TaskResult> tasks;
  double average = 0.0;  // mean of task means, percent
};

namespace detail {

inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline const SampleSet& batch_by_id(std::span<const SampleSet> corpus, int id) {
  for (const auto& s : corpus)
    if (s.batch_id == id) return s;
  throw DataError("missing batch " + std::to_string(id));
}

struct PreparedTask {
  int source_id = 0;
  int target_id = 0;
  SampleSet source;
  SampleSet guides;
  SampleSet unlabeled;
  GuideSelection selection;
};

}  // namespace detail

/// Source/target batch pairs for `setting` over batches 1..count.
inline std::vector<std::pair<int, int>> task_pairs(Setting setting, int count) {
  std::vector<std::pair<int, int>> pairs;
  for (int k = 2; k <= count; ++k)
    pairs.emplace_back(setting == Setting::fixed_source ? 1 : k - 1, k);
  return pairs;
}

/// Runs the configured protocol. `corpus` holds unscaled, labeled batches
/// with ids 1..B (B >= 2); scaling follows `cfg.scaling`.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                       std::span<const SampleSet> corpus) {
  check_config(cfg);
  const int count = static_cast<int>(corpus.size());
  if (count < 2) throw DataError("need at least two batches");
  for (int b = 1; b <= count; ++b) {
    const auto& s = detail::batch_by_id(corpus, b);
    if (!s.labeled()) throw DataError("batch " + std::to_string(b) + " is unlabeled");
  }

  std::optional<ScalerParams> global;
  if (cfg.scaling == ScalingMode::global) global = fit_scaler(corpus);

  const auto pairs = task_pairs(cfg.setting, count);
  std::vector<detail::PreparedTask> prepared(pairs.size());

  detail::parallel_for(pairs.size(), cfg.jobs, [&](std::size_t i) {
    auto& t = prepared[i];
    t.source_id = pairs[i].first;
    t.target_id = pairs[i].second;
    const auto& raw_source = detail::batch_by_id(corpus, t.source_id);
    const auto& raw_target = detail::batch_by_id(corpus, t.target_id);
    if (cfg.guides >= raw_target.size())
      throw DataError("guides (" + std::to_string(cfg.guides) + ") must be fewer than the " +
                      std::to_string(raw_target.size()) + " samples of batch " +
                      std::to_string(t.target_id));
    const ScalerParams scaler =
        global ? *global : fit_scaler(std::vector<SampleSet>{raw_source, raw_target});
    t.source = apply_scaler(scaler, raw_source);
    const SampleSet target = apply_scaler(scaler, raw_target);
    t.selection = ssa_select(target, cfg.guides);
    std::tie(t.guides, t.unlabeled) = split_target(target, t.selection);
  });

  const auto runs = static_cast<std::size_t>(cfg.runs);
  std::vector<double> accuracy(pairs.size() * runs);
  detail::parallel_for(accuracy.size(), cfg.jobs, [&](std::size_t item) {
    const auto& t = prepared[item / runs];
    const auto run = item % runs;
    const auto model =
        train_method(cfg, t.source, t.guides, t.unlabeled, cfg.base_seed + run);
    const auto predicted = predict(model.classifier, t.unlabeled).labels;
    accuracy[item] = 100.0 * daelm::accuracy(predicted, t.unlabeled.labels);
  });

  ExperimentReport report;
  report.config = cfg;
  double sum = 0.0;
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    const auto& t = prepared[i];
    TaskResult r;
    r.source = t.source_id;
    r.target = t.target_id;
    r.guide_indices = t.selection.indices;
    r.evaluated = t.unlabeled.size();
    r.run_accuracy.assign(accuracy.begin() + static_cast<std::ptrdiff_t>(i * runs),
                          accuracy.begin() + static_cast<std::ptrdiff_t>((i + 1) * runs));
    double task_sum = 0.0;
    for (double a : r.run_accuracy) task_sum += a;
    r.mean = task_sum / static_cast<double>(runs);
    sum += r.mean;
    report.tasks.push_back(std::move(r));
  }
  report.average = report.tasks.empty() ? 0.0 : sum / static_cast<double>(report.tasks.size());
  return report;
}

inline ExperimentReport run_setting1(ExperimentConfig cfg, std::span<const SampleSet> corpus) {
  cfg.setting = Setting::fixed_source;
  return run_experiment(cfg, corpus);
}

inline ExperimentReport run_setting2(ExperimentConfig cfg, std::span<const SampleSet> corpus) {
  cfg.setting = Setting::rolling_source;
  return run_experiment(cfg, corpus);
}

/// One report per guide count in `ks`.
inline std::vector<ExperimentReport> sweep_guides(ExperimentConfig cfg,
                                                  std::span<const SampleSet> corpus,
                                                  std::span<const Index> ks) {
  if (ks.empty()) throw std::invalid_argument("sweep needs at least one guide count");
  for (Index k : ks)
    if (k < 2) throw std::invalid_argument("guide counts must be at least 2");
  std::vector<ExperimentReport> reports;
  for (Index k : ks) {
    cfg.guides = k;
    reports.push_back(run_experiment(cfg, corpus));
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Emission

inline std::string method_label(const ExperimentConfig& cfg) {
  switch (cfg.method) {
    case Method::elm: return "ELM-" + std::string(cfg.activation == Activation::radbas ? "rbf" : "sigmoid");
    case Method::daelm_s: return "DAELM-S(" + std::to_string(cfg.guides) + ")";
    case Method::daelm_t: return "DAELM-T(" + std::to_string(cfg.guides) + ")";
  }
  return "";
}

namespace detail {

inline std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

inline std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

inline std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

inline std::string format_table(const ExperimentReport& r) {
  constexpr std::size_t kLabel = 16, kCell = 9;
  std::ostringstream out;
  out << pad_right("Method", kLabel);
  for (const auto& t : r.tasks) {
    const std::string head = r.config.setting == Setting::fixed_source
                                 ? "Batch " + std::to_string(t.target)
                                 : std::to_string(t.source) + "->" + std::to_string(t.target);
    out << pad_left(head, kCell);
  }
  out << pad_left("Average", kCell) << '\n';
  out << pad_right(method_label(r.config), kLabel);
  for (const auto& t : r.tasks) out << pad_left(fixed(t.mean, 2), kCell);
  out << pad_left(fixed(r.average, 2), kCell) << '\n';
  return out.str();
}

inline std::string format_csv(const ExperimentReport& r, bool with_k) {
  std::ostringstream out;
  for (const auto& t : r.tasks)
    for (std::size_t run = 0; run < t.run_accuracy.size(); ++run) {
      if (with_k) out << r.config.guides << ',';
      out << t.source << ',' << t.target << ',' << run << ',' << fixed(t.run_accuracy[run], 6)
          << '\n';
    }
  return out.str();
}

inline std::string format_jsonl(const ExperimentReport& r) {
  std::ostringstream out;
  for (const auto& t : r.tasks)
    for (std::size_t run = 0; run < t.run_accuracy.size(); ++run) {
      nlohmann::ordered_json j;
      j["method"] = to_string(r.config.method);
      j["setting"] = setting_number(r.config.setting);
      j["guides"] = r.config.guides;
      j["hidden"] = r.config.hidden;
      j["source"] = t.source;
      j["target"] = t.target;
      j["run"] = run;
      j["seed"] = r.config.base_seed + run;
      j["evaluated"] = t.evaluated;
      j["accuracy"] = t.run_accuracy[run];
      out << j.dump() << '\n';
    }
  return out.str();
}

}  // namespace detail

/// CSV columns: source,target,run,accuracy (percent, 6 decimals).
inline std::string emit_report(const ExperimentReport& r, ReportFormat format) {
  switch (format) {
    case ReportFormat::table: return detail::format_table(r);
    case ReportFormat::csv: return "source,target,run,accuracy\n" + detail::format_csv(r, false);
    case ReportFormat::jsonl: return detail::format_jsonl(r);
  }
  return {};
}

/// Sweep data as CSV with a leading guide-count column.
inline std::string emit_sweep_csv(std::span<const ExperimentReport> reports) {
  std::string out = "k,source,target,run,accuracy\n";
  for (const auto& r : reports) out += detail::format_csv(r, true);
  return out;
}

/// Writes `content` to a sibling temporary file and renames it over `path`.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw DataError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace daelm

#endif  // DAELM_BENCHMARK_HPP_
