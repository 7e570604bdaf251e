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

// Gas-sensor drift batches: libsvm-style loading, corpus validation against
// the published per-batch class counts, min-max scaling to [-1, 1], and
// +1/-1 target encoding. Also hosts the synthetic drift generator used by
// the tests.

#ifndef DAELM_DATASET_HPP_
#define DAELM_DATASET_HPP_

#include <array>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "daelm/common.hpp"

namespace daelm {

inline constexpr int kGasClasses = 6;
inline constexpr Index kGasFeatures = 128;
inline constexpr int kGasBatches = 10;

inline constexpr std::array<const char*, kGasClasses> kGasNames = {
    "acetone", "acetaldehyde", "ethanol", "ethylene", "ammonia", "toluene"};

// Per-batch class counts of the published corpus (rows: batch 1..10,
// columns: class 1..6).
inline constexpr std::array<std::array<int, kGasClasses>, kGasBatches> kGasClassCounts = {{
    {90, 98, 83, 30, 70, 74},
    {164, 334, 100, 109, 532, 5},
    {365, 490, 216, 240, 275, 0},
    {64, 43, 12, 30, 12, 0},
    {28, 40, 20, 46, 63, 0},
    {514, 574, 110, 29, 606, 467},
    {649, 662, 360, 744, 630, 568},
    {30, 30, 40, 33, 143, 18},
    {61, 55, 100, 75, 78, 101},
    {600, 600, 600, 600, 600, 600},
}};

inline constexpr std::array<int, kGasBatches> kGasBatchTotals = {
    445, 1244, 1586, 161, 197, 2300, 3613, 294, 470, 3600};

inline constexpr int kGasTotal = 13910;

/// A batch of samples: one row of `features` per measurement.
///
/// `labels` is either empty (unlabeled) or holds one class id in
/// 1..classes per row.
struct SampleSet {
  Matrix features;
  std::vector<int> labels;
  int batch_id = 1;
  int classes = kGasClasses;

  Index size() const { return features.rows(); }
  Index dims() const { return features.cols(); }
  bool labeled() const { return !labels.empty(); }
};

/// Throws std::invalid_argument if `s` breaks a SampleSet invariant.
inline void check_sample_set(const SampleSet& s) {
  if (s.size() < 1 || s.dims() < 1) throw std::invalid_argument("sample set is empty");
  if (s.classes < 1) throw std::invalid_argument("class count must be positive");
  if (!s.features.allFinite()) throw std::invalid_argument("features contain NaN or Inf");
  if (s.labeled()) {
    if (static_cast<Index>(s.labels.size()) != s.size())
      throw std::invalid_argument("label count does not match sample count");
    for (int label : s.labels)
      if (label < 1 || label > s.classes)
        throw std::invalid_argument("label " + std::to_string(label) + " outside 1.." +
                                    std::to_string(s.classes));
  }
}

/// Rows of `s` at `rows`, in that order. Labels follow their rows.
inline SampleSet select_rows(const SampleSet& s, std::span<const Index> rows) {
  SampleSet out;
  out.batch_id = s.batch_id;
  out.classes = s.classes;
  out.features.resize(static_cast<Index>(rows.size()), s.dims());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Index>(i)) = s.features.row(rows[i]);
    if (s.labeled()) out.labels.push_back(s.labels[static_cast<std::size_t>(rows[i])]);
  }
  return out;
}

/// Vertical concatenation. Both sets must agree on dims, classes and
/// labeled-ness.
inline SampleSet concat(const SampleSet& a, const SampleSet& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("concat: dimension mismatch");
  if (a.labeled() != b.labeled()) throw std::invalid_argument("concat: label mismatch");
  SampleSet out;
  out.batch_id = a.batch_id;
  out.classes = a.classes;
  out.features.resize(a.size() + b.size(), a.dims());
  out.features.topRows(a.size()) = a.features;
  out.features.bottomRows(b.size()) = b.features;
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

// ---------------------------------------------------------------------------
// libsvm-style batch files

/// Parses `<label>[;<concentration>] <idx>:<value> ...` lines.
///
/// Feature indices are 1-based and must not exceed `expected_n`; absent
/// indices are 0. Blank lines are skipped. Errors carry the 1-based line
/// number.
inline SampleSet parse_batch(std::istream& in, Index expected_n, int batch_id = 1,
                             int classes = kGasClasses) {
  if (expected_n < 1) throw std::invalid_argument("expected_n must be positive");
  std::vector<double> values;
  std::vector<int> labels;
  std::string line;
  long line_no = 0;

  auto fail = [&](const std::string& what) {
    throw DataError("line " + std::to_string(line_no) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;

    std::string_view label_text(token);
    if (auto semi = label_text.find(';'); semi != std::string_view::npos) {
      double concentration = 0.0;
      if (!detail::parse_double(label_text.substr(semi + 1), concentration))
        fail("malformed concentration '" + token + "'");
      label_text = label_text.substr(0, semi);
    }
    int label = 0;
    if (!detail::parse_int(label_text, label)) fail("malformed class label '" + token + "'");
    if (label < 1 || label > classes)
      fail("class id " + std::to_string(label) + " outside 1.." + std::to_string(classes));

    const std::size_t row = labels.size();
    labels.push_back(label);
    values.resize(values.size() + static_cast<std::size_t>(expected_n), 0.0);
    std::vector<bool> seen(static_cast<std::size_t>(expected_n), false);

    while (tokens >> token) {
      auto colon = token.find(':');
      if (colon == std::string::npos) fail("expected <index>:<value>, got '" + token + "'");
      long index = 0;
      double value = 0.0;
      if (!detail::parse_int(std::string_view(token).substr(0, colon), index))
        fail("malformed feature index in '" + token + "'");
      if (!detail::parse_double(std::string_view(token).substr(colon + 1), value))
        fail("malformed feature value in '" + token + "'");
      if (index < 1) fail("feature index " + std::to_string(index) + " is not 1-based");
      if (index > expected_n)
        fail("feature index " + std::to_string(index) + " exceeds " +
             std::to_string(expected_n));
      if (!std::isfinite(value)) fail("non-finite feature value");
      auto col = static_cast<std::size_t>(index - 1);
      if (seen[col]) fail("duplicate feature index " + std::to_string(index));
      seen[col] = true;
      values[row * static_cast<std::size_t>(expected_n) + col] = value;
    }
  }

  if (labels.empty()) throw DataError("no samples");

  SampleSet out;
  out.batch_id = batch_id;
  out.classes = classes;
  out.labels = std::move(labels);
  out.features = Eigen::Map<const Matrix>(values.data(), static_cast<Index>(out.labels.size()),
                                          expected_n);
  return out;
}

inline SampleSet load_batch(const std::filesystem::path& path, Index expected_n = kGasFeatures,
                            int batch_id = 1, int classes = kGasClasses) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return parse_batch(in, expected_n, batch_id, classes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

/// Writes `s` in the same format parse_batch reads. Values use the shortest
/// round-tripping representation; zeros are omitted. Unlabeled sets are
/// written with class 1.
inline void write_batch(std::ostream& out, const SampleSet& s) {
  for (Index i = 0; i < s.size(); ++i) {
    out << (s.labeled() ? s.labels[static_cast<std::size_t>(i)] : 1);
    for (Index j = 0; j < s.dims(); ++j) {
      const double v = s.features(i, j);
      if (v != 0.0 || std::signbit(v)) out << ' ' << (j + 1) << ':' << detail::format_double(v);
    }
    out << '\n';
  }
}

inline std::filesystem::path batch_path(const std::filesystem::path& dir, int batch_id) {
  return dir / ("batch" + std::to_string(batch_id) + ".dat");
}

/// Loads batch1.dat .. batch<count>.dat from `dir`.
inline std::vector<SampleSet> load_corpus(const std::filesystem::path& dir,
                                          int count = kGasBatches,
                                          Index expected_n = kGasFeatures) {
  if (!std::filesystem::is_directory(dir))
    throw DataError("data directory not found: " + dir.string());
  std::vector<SampleSet> corpus;
  for (int b = 1; b <= count; ++b)
    corpus.push_back(load_batch(batch_path(dir, b), expected_n, b));
  return corpus;
}

inline void write_corpus(const std::filesystem::path& dir, std::span<const SampleSet> corpus) {
  std::filesystem::create_directories(dir);
  for (const auto& s : corpus) {
    std::ofstream out(batch_path(dir, s.batch_id));
    write_batch(out, s);
    if (!out) throw DataError("cannot write " + batch_path(dir, s.batch_id).string());
  }
}

// ---------------------------------------------------------------------------
// Corpus validation

struct BatchCount {
  int batch_id = 0;
  std::array<int, kGasClasses> per_class{};
  int total = 0;
};

struct CorpusReport {
  std::vector<BatchCount> batches;
  std::vector<std::string> issues;
  int total = 0;

  bool ok() const { return issues.empty(); }
};

/// Compares class counts of `batches` against the published table.
/// Never throws on mismatch; every discrepancy becomes an issue line.
inline CorpusReport validate_corpus(std::span<const SampleSet> batches) {
  CorpusReport report;
  std::array<const SampleSet*, kGasBatches> by_id{};

  for (const auto& s : batches) {
    if (s.batch_id < 1 || s.batch_id > kGasBatches) {
      report.issues.push_back("unexpected batch id " + std::to_string(s.batch_id));
      continue;
    }
    if (by_id[static_cast<std::size_t>(s.batch_id - 1)] != nullptr)
      report.issues.push_back("duplicate batch " + std::to_string(s.batch_id));
    by_id[static_cast<std::size_t>(s.batch_id - 1)] = &s;
  }

  for (int b = 1; b <= kGasBatches; ++b) {
    const SampleSet* s = by_id[static_cast<std::size_t>(b - 1)];
    if (s == nullptr) {
      report.issues.push_back("missing batch " + std::to_string(b));
      continue;
    }
    BatchCount count;
    count.batch_id = b;
    count.total = static_cast<int>(s->size());
    for (int label : s->labels)
      if (label >= 1 && label <= kGasClasses) ++count.per_class[static_cast<std::size_t>(label - 1)];
    if (!s->labeled()) report.issues.push_back("batch " + std::to_string(b) + " is unlabeled");

    const auto& expected = kGasClassCounts[static_cast<std::size_t>(b - 1)];
    for (int c = 0; c < kGasClasses; ++c) {
      const auto ci = static_cast<std::size_t>(c);
      if (count.per_class[ci] != expected[ci])
        report.issues.push_back("batch " + std::to_string(b) + " " + kGasNames[ci] + ": " +
                                std::to_string(count.per_class[ci]) + " != " +
                                std::to_string(expected[ci]));
    }
    const int expected_total = kGasBatchTotals[static_cast<std::size_t>(b - 1)];
    if (count.total != expected_total)
      report.issues.push_back("batch " + std::to_string(b) + " total: " +
                              std::to_string(count.total) + " != " +
                              std::to_string(expected_total));
    report.total += count.total;
    report.batches.push_back(count);
  }

  if (report.total != kGasTotal)
    report.issues.push_back("grand total: " + std::to_string(report.total) +
                            " != " + std::to_string(kGasTotal));
  return report;
}

/// Human-readable table followed by `key=value` lines.
inline std::string format_corpus_report(const CorpusReport& r) {
  std::ostringstream out;
  out << "batch";
  for (const char* name : kGasNames) out << ' ' << name;
  out << " total\n";
  for (const auto& b : r.batches) {
    out << b.batch_id;
    for (int c : b.per_class) out << ' ' << c;
    out << ' ' << b.total << '\n';
  }
  for (const auto& issue : r.issues) out << "mismatch: " << issue << '\n';
  out << "total " << r.total << '\n';
  out << (r.ok() ? "ok" : "FAILED") << '\n';

  for (const auto& b : r.batches) {
    for (std::size_t c = 0; c < b.per_class.size(); ++c)
      out << "batch" << b.batch_id << '.' << kGasNames[c] << '=' << b.per_class[c] << '\n';
    out << "batch" << b.batch_id << ".total=" << b.total << '\n';
  }
  out << "total=" << r.total << '\n';
  out << "issues=" << r.issues.size() << '\n';
  out << "status=" << (r.ok() ? "ok" : "mismatch") << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Scaling

struct ScalerParams {
  Vector min;
  Vector max;

  Index dims() const { return min.size(); }

  std::vector<Index> constant_features() const {
    std::vector<Index> out;
    for (Index j = 0; j < min.size(); ++j)
      if (min[j] == max[j]) out.push_back(j);
    return out;
  }
};

/// Per-feature min and max over the union of `batches`.
inline ScalerParams fit_scaler(std::span<const SampleSet> batches) {
  ScalerParams p;
  bool any = false;
  for (const auto& s : batches) {
    if (s.size() == 0) continue;
    if (!any) {
      p.min = s.features.colwise().minCoeff().transpose();
      p.max = s.features.colwise().maxCoeff().transpose();
      any = true;
      continue;
    }
    if (s.dims() != p.dims()) throw std::invalid_argument("fit_scaler: dimension mismatch");
    p.min = p.min.cwiseMin(s.features.colwise().minCoeff().transpose());
    p.max = p.max.cwiseMax(s.features.colwise().maxCoeff().transpose());
  }
  if (!any) throw std::invalid_argument("fit_scaler: no samples");
  return p;
}

inline ScalerParams fit_scaler(const SampleSet& s) { return fit_scaler(std::span(&s, 1)); }

/// Maps each feature to 2(v - min)/(max - min) - 1. Constant features map
/// to 0. Values outside the fitted range extrapolate linearly.
inline SampleSet apply_scaler(const ScalerParams& p, const SampleSet& x) {
  if (x.dims() != p.dims()) throw std::invalid_argument("apply_scaler: dimension mismatch");
  SampleSet out = x;
  for (Index j = 0; j < x.dims(); ++j) {
    const double lo = p.min[j];
    const double range = p.max[j] - lo;
    if (range == 0.0) {
      out.features.col(j).setZero();
      continue;
    }
    for (Index i = 0; i < x.size(); ++i) {
      out.features(i, j) = 2.0 * (x.features(i, j) - lo) / range - 1.0;
    }
  }
  return out;
}

inline void write_scaler(std::ostream& out, const ScalerParams& p) {
  out << "scaler " << p.dims() << '\n';
  for (Index j = 0; j < p.dims(); ++j)
    out << detail::format_hex(p.min[j]) << ' ' << detail::format_hex(p.max[j]) << '\n';
}

inline ScalerParams read_scaler(std::istream& in) {
  std::string tag;
  Index n = 0;
  if (!(in >> tag >> n) || tag != "scaler" || n < 1) throw DataError("malformed scaler header");
  ScalerParams p;
  p.min.resize(n);
  p.max.resize(n);
  for (Index j = 0; j < n; ++j) {
    std::string lo, hi;
    if (!(in >> lo >> hi) || !detail::parse_double(lo, p.min[j], std::chars_format::hex) ||
        !detail::parse_double(hi, p.max[j], std::chars_format::hex))
      throw DataError("malformed scaler entry " + std::to_string(j));
    if (p.min[j] > p.max[j]) throw DataError("scaler min exceeds max");
  }
  return p;
}

// ---------------------------------------------------------------------------
// Targets

struct TargetEncoding {
  Matrix targets;  // N x m, +1 at the true class, -1 elsewhere
};

inline TargetEncoding encode_targets(std::span<const int> labels, int classes) {
  if (classes < 1) throw std::invalid_argument("class count must be positive");
  TargetEncoding t;
  t.targets = Matrix::Constant(static_cast<Index>(labels.size()), classes, -1.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 1 || labels[i] > classes)
      throw std::invalid_argument("label " + std::to_string(labels[i]) + " outside 1.." +
                                  std::to_string(classes));
    t.targets(static_cast<Index>(i), labels[i] - 1) = 1.0;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Synthetic drift fixtures

struct SyntheticCorpusOptions {
  int classes = 6;
  int per_class = 50;
  Index dims = 16;
  int batches = 2;
  double shift = 1.0;          // translation added per batch along the drift direction
  double center_spread = 3.0;  // class centers uniform on [-spread, spread]^dims
  double noise = 1.0;          // isotropic Gaussian standard deviation
  std::uint64_t seed = 1;
};

/// Gaussian class blobs. Batch b (1-based) is the batch-1 distribution
/// translated by (b - 1) * shift along a fixed unit direction. Rows are
/// grouped by class.
inline std::vector<SampleSet> make_synthetic_corpus(const SyntheticCorpusOptions& opt) {
  if (opt.classes < 2 || opt.per_class < 1 || opt.dims < 1 || opt.batches < 1)
    throw std::invalid_argument("make_synthetic_corpus: bad options");
  Rng rng(opt.seed);

  Matrix centers(opt.classes, opt.dims);
  for (Index c = 0; c < centers.rows(); ++c)
    for (Index j = 0; j < centers.cols(); ++j)
      centers(c, j) = rng.uniform(-opt.center_spread, opt.center_spread);

  Vector direction = Vector::Ones(opt.dims) / std::sqrt(static_cast<double>(opt.dims));

  std::vector<SampleSet> corpus;
  for (int b = 1; b <= opt.batches; ++b) {
    SampleSet s;
    s.batch_id = b;
    s.classes = opt.classes;
    s.features.resize(static_cast<Index>(opt.classes) * opt.per_class, opt.dims);
    const double offset = (b - 1) * opt.shift;
    Index row = 0;
    for (int c = 0; c < opt.classes; ++c) {
      for (int k = 0; k < opt.per_class; ++k, ++row) {
        for (Index j = 0; j < opt.dims; ++j)
          s.features(row, j) = centers(c, j) + offset * direction[j] + opt.noise * rng.normal();
        s.labels.push_back(c + 1);
      }
    }
    corpus.push_back(std::move(s));
  }
  return corpus;
}

/// Two-batch drift fixture: returns (source, target).
inline std::pair<SampleSet, SampleSet> make_synthetic_drift(int classes, int per_class,
                                                            double shift, std::uint64_t seed) {
  SyntheticCorpusOptions opt;
  opt.classes = classes;
  opt.per_class = per_class;
  opt.shift = shift;
  opt.seed = seed;
  opt.batches = 2;
  auto corpus = make_synthetic_corpus(opt);
  return {std::move(corpus[0]), std::move(corpus[1])};
}

}  // namespace daelm

#endif  // DAELM_DATASET_HPP_
