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

// Closed-form output-weight solvers.
//
// Every trainer minimizes a strictly convex ridge objective of the form
//
//   1/2 |beta|^2 + c_p/2 |T_p - H_p beta|^2 + c_a/2 |T_a - H_a beta|^2
//
// where the "primary" block is the main training set and the optional
// "auxiliary" block is the adaptation term:
//
//   ELM       primary = labeled training data,  no auxiliary block
//   DAELM-S   primary = source data (c_s),      auxiliary = target guides (c_t)
//   DAELM-T   primary = target guides (c_t),    auxiliary = unlabeled target
//                                               rows with pseudo-targets (c_tu)
//
// Two algebraically equivalent routes exist. The primal route factors an
// L x L system; the dual route solves for Lagrange multipliers with
// N_p x N_p and N_a x N_a systems and a Schur complement. The automatic
// rule picks the dual route when N_p < L.

#ifndef DAELM_SOLVERS_HPP_
#define DAELM_SOLVERS_HPP_

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "daelm/common.hpp"
#include "daelm/feature_map.hpp"

namespace daelm {

enum class Branch { automatic, primal, dual };

struct OutputWeights {
  Matrix beta;  // L x m
};

/// Penalty coefficients. `source`, `target` and `unlabeled` play the roles
/// of C_S, C_T and C_Tu; DAELM-S ignores `unlabeled`.
struct Penalties {
  double source = 0.01;
  double target = 10.0;
  double unlabeled = 100.0;
};

/// Intermediates of the dual route, kept for inspection.
///
/// For DAELM-S the blocks are A = H_T H_S^T, B = H_T H_T^T + I/C_T,
/// C = H_S H_T^T, D = H_S H_S^T + I/C_S. For DAELM-T they are the analogous
/// O, P, Q, R with (H_T, H_Tu) in place of (H_S, H_T). For plain ELM only
/// `primary_gram` and `alpha_primary` are filled.
struct DualSolveScratch {
  Matrix aux_primary;   // A / O
  Matrix aux_gram;      // B / P
  Matrix primary_aux;   // C / Q
  Matrix primary_gram;  // D / R
  Matrix alpha_primary;
  Matrix alpha_aux;
  Matrix residual_primary;  // xi = T - H beta at the solution
  Matrix residual_aux;
  bool jittered = false;
};

struct Classifier {
  RandomFeatureMap map;
  OutputWeights weights;
  int classes = 0;
};

namespace detail {

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + " contains NaN or Inf");
}

// Cholesky solve of an SPD system. On failure the diagonal is shifted once
// by 1e-10 * trace / size; a second failure is an error.
inline Matrix spd_solve(Matrix a, const Matrix& rhs, bool* jittered = nullptr) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    const double shift = 1e-10 * a.trace() / static_cast<double>(a.rows());
    a.diagonal().array() += shift;
    llt.compute(a);
    if (llt.info() != Eigen::Success || !(shift > 0.0))
      throw NumericalError("system is not positive definite beyond jitter tolerance");
    if (jittered != nullptr) *jittered = true;
  }
  Matrix x = llt.solve(rhs);
  if (!x.allFinite()) throw NumericalError("non-finite solution");
  return x;
}

inline Matrix gram_rows(const Matrix& a, const Matrix& b) { return a * b.transpose(); }

inline Matrix shifted_gram(const Matrix& h, double penalty) {
  Matrix g = h * h.transpose();
  g.diagonal().array() += 1.0 / penalty;
  return g;
}

// (I + c_p H_p^T H_p + c_a H_a^T H_a) beta = c_p H_p^T T_p + c_a H_a^T T_a.
// With no auxiliary block this is the ELM normal equation scaled by c_p.
inline Matrix solve_primal(const Matrix& hp, const Matrix& tp, double cp, const Matrix* ha,
                           const Matrix* ta, double ca, bool* jittered) {
  const Index l = hp.cols();
  Matrix system = Matrix::Identity(l, l);
  system.noalias() += cp * (hp.transpose() * hp);
  Matrix rhs = cp * (hp.transpose() * tp);
  if (ha != nullptr) {
    system.noalias() += ca * (ha->transpose() * *ha);
    rhs.noalias() += ca * (ha->transpose() * *ta);
  }
  return spd_solve(std::move(system), rhs, jittered);
}

// Multiplier route. With an auxiliary block:
//   alpha_p = (D - C B^-1 A)^-1 (T_p - C B^-1 T_a)
//   alpha_a = B^-1 T_a - B^-1 A alpha_p
//   beta    = H_p^T alpha_p + H_a^T alpha_a
// D - C B^-1 A is the Schur complement of the SPD block system, hence SPD.
inline Matrix solve_dual(const Matrix& hp, const Matrix& tp, double cp, const Matrix* ha,
                         const Matrix* ta, double ca, DualSolveScratch& s) {
  s.primary_gram = shifted_gram(hp, cp);
  if (ha == nullptr) {
    s.alpha_primary = spd_solve(s.primary_gram, tp, &s.jittered);
    return hp.transpose() * s.alpha_primary;
  }

  s.aux_primary = gram_rows(*ha, hp);
  s.primary_aux = s.aux_primary.transpose();
  s.aux_gram = shifted_gram(*ha, ca);

  Eigen::LLT<Matrix> aux(s.aux_gram);
  if (aux.info() != Eigen::Success) {
    Matrix shifted = s.aux_gram;
    shifted.diagonal().array() +=
        1e-10 * shifted.trace() / static_cast<double>(shifted.rows());
    aux.compute(shifted);
    if (aux.info() != Eigen::Success)
      throw NumericalError("auxiliary Gram block is not positive definite");
    s.jittered = true;
  }
  const Matrix aux_inv_coupling = aux.solve(s.aux_primary);  // B^-1 A
  const Matrix aux_inv_targets = aux.solve(*ta);             // B^-1 T_a

  Matrix schur = s.primary_gram - s.primary_aux * aux_inv_coupling;
  schur = 0.5 * (schur + schur.transpose()).eval();
  s.alpha_primary = spd_solve(std::move(schur), tp - s.primary_aux * aux_inv_targets,
                              &s.jittered);
  s.alpha_aux = aux_inv_targets - aux_inv_coupling * s.alpha_primary;
  return hp.transpose() * s.alpha_primary + ha->transpose() * s.alpha_aux;
}

inline OutputWeights solve_two_block(const Matrix& hp, const Matrix& tp, double cp,
                                     const Matrix* ha, const Matrix* ta, double ca,
                                     Branch branch, DualSolveScratch* scratch) {
  require_finite(hp, "hidden output");
  require_finite(tp, "targets");
  if (hp.rows() != tp.rows()) throw std::invalid_argument("H and T row counts differ");
  if (hp.rows() < 1 || hp.cols() < 1) throw std::invalid_argument("empty hidden output");
  if (!(cp > 0.0)) throw std::invalid_argument("penalty must be positive");
  if (ha != nullptr) {
    require_finite(*ha, "auxiliary hidden output");
    require_finite(*ta, "auxiliary targets");
    if (ha->cols() != hp.cols()) throw std::invalid_argument("hidden sizes differ");
    if (ha->rows() != ta->rows()) throw std::invalid_argument("auxiliary row counts differ");
    if (ta->cols() != tp.cols()) throw std::invalid_argument("target widths differ");
    if (!(ca >= 0.0)) throw std::invalid_argument("penalty must be non-negative");
    // A zero penalty removes the auxiliary term from the objective.
    if (ca == 0.0 || ha->rows() == 0) ha = ta = nullptr;
  }

  if (branch == Branch::automatic) branch = hp.rows() < hp.cols() ? Branch::dual : Branch::primal;

  DualSolveScratch local;
  DualSolveScratch& s = scratch != nullptr ? *scratch : local;
  s = DualSolveScratch{};

  OutputWeights w;
  if (branch == Branch::primal)
    w.beta = solve_primal(hp, tp, cp, ha, ta, ca, &s.jittered);
  else
    w.beta = solve_dual(hp, tp, cp, ha, ta, ca, s);

  s.residual_primary = tp - hp * w.beta;
  if (ha != nullptr) s.residual_aux = *ta - *ha * w.beta;
  return w;
}

}  // namespace detail

/// Regularized ELM: argmin 1/2|beta|^2 + c/2 |T - H beta|^2.
///
/// Primal: (H^T H + I/c)^-1 H^T T. Dual: H^T (H H^T + I/c)^-1 T. The
/// automatic rule uses the dual when N < L.
inline OutputWeights train_elm(const Matrix& h, const Matrix& t, double c,
                               Branch branch = Branch::automatic,
                               DualSolveScratch* scratch = nullptr) {
  if (branch == Branch::automatic) branch = h.rows() < h.cols() ? Branch::dual : Branch::primal;
  if (branch == Branch::primal) {
    detail::require_finite(h, "hidden output");
    detail::require_finite(t, "targets");
    if (h.rows() != t.rows()) throw std::invalid_argument("H and T row counts differ");
    if (!(c > 0.0)) throw std::invalid_argument("penalty must be positive");
    Matrix system = h.transpose() * h;
    system.diagonal().array() += 1.0 / c;
    bool jittered = false;
    OutputWeights w{detail::spd_solve(std::move(system), h.transpose() * t, &jittered)};
    if (scratch != nullptr) {
      *scratch = DualSolveScratch{};
      scratch->jittered = jittered;
      scratch->residual_primary = t - h * w.beta;
    }
    return w;
  }
  return detail::solve_two_block(h, t, c, nullptr, nullptr, 0.0, Branch::dual, scratch);
}

/// DAELM-S: source data plus target guides as a weighted second term.
/// Pass `p.target == 0` to drop the guide term.
inline OutputWeights train_daelm_s(const Matrix& h_source, const Matrix& t_source,
                                   const Matrix& h_target, const Matrix& t_target,
                                   const Penalties& p, Branch branch = Branch::automatic,
                                   DualSolveScratch* scratch = nullptr) {
  if (p.target == 0.0) return train_elm(h_source, t_source, p.source, branch, scratch);
  return detail::solve_two_block(h_source, t_source, p.source, &h_target, &t_target, p.target,
                                 branch, scratch);
}

/// Base classifier for DAELM-T: a regularized ELM on source data.
inline OutputWeights train_daelm_t_base(const Matrix& h_source, const Matrix& t_source,
                                        double c_source, Branch branch = Branch::automatic) {
  return train_elm(h_source, t_source, c_source, branch);
}

/// DAELM-T with explicit pseudo-targets for the unlabeled rows.
///
/// `pseudo_targets` (N_Tu x m) are the base classifier's continuous scores
/// on the unlabeled target rows. Pass `p.unlabeled == 0` to drop the
/// unlabeled term.
inline OutputWeights train_daelm_t(const Matrix& h_target, const Matrix& t_target,
                                   const Matrix& h_unlabeled, const Matrix& pseudo_targets,
                                   const Penalties& p, Branch branch = Branch::automatic,
                                   DualSolveScratch* scratch = nullptr) {
  if (p.unlabeled == 0.0) return train_elm(h_target, t_target, p.target, branch, scratch);
  return detail::solve_two_block(h_target, t_target, p.target, &h_unlabeled, &pseudo_targets,
                                 p.unlabeled, branch, scratch);
}

/// DAELM-T with pseudo-targets H_Tu * beta_B, for the case where the base
/// classifier shares the hidden layer that produced `h_unlabeled`.
inline OutputWeights train_daelm_t(const Matrix& h_target, const Matrix& t_target,
                                   const Matrix& h_unlabeled, const OutputWeights& base,
                                   const Penalties& p, Branch branch = Branch::automatic,
                                   DualSolveScratch* scratch = nullptr) {
  if (base.beta.rows() != h_unlabeled.cols())
    throw std::invalid_argument("base classifier hidden size differs from H_Tu");
  const Matrix pseudo = h_unlabeled * base.beta;
  return train_daelm_t(h_target, t_target, h_unlabeled, pseudo, p, branch, scratch);
}

// ---------------------------------------------------------------------------
// Prediction

/// 1-based index of the row maximum; ties go to the lowest class.
inline std::vector<int> argmax_labels(const Matrix& scores) {
  std::vector<int> labels(static_cast<std::size_t>(scores.rows()));
  for (Index i = 0; i < scores.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < scores.cols(); ++j)
      if (scores(i, j) > scores(i, best)) best = j;
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best) + 1;
  }
  return labels;
}

struct Prediction {
  Matrix scores;  // N x m
  std::vector<int> labels;
};

inline Prediction predict(const Classifier& c, const Matrix& x) {
  if (c.weights.beta.rows() != c.map.hidden())
    throw std::invalid_argument("classifier weights do not match its feature map");
  Prediction p;
  p.scores = hidden_output(c.map, x) * c.weights.beta;
  p.labels = argmax_labels(p.scores);
  return p;
}

inline Prediction predict(const Classifier& c, const SampleSet& x) {
  return predict(c, x.features);
}

/// Fraction of exact matches.
inline double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (predicted.empty()) throw std::invalid_argument("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

// ---------------------------------------------------------------------------
// Serialization
//
//   classifier
//   map <activation> <L> <n> <seed>
//   classes <m>
//   beta <rows> <cols>
//   <cols hex doubles per row>
//
// The feature map is rebuilt from its seed; beta is stored in exact hex.

inline void write_classifier(std::ostream& out, const Classifier& c) {
  out << "classifier\n";
  write_feature_map_descriptor(out, c.map);
  out << "classes " << c.classes << '\n';
  out << "beta " << c.weights.beta.rows() << ' ' << c.weights.beta.cols() << '\n';
  for (Index i = 0; i < c.weights.beta.rows(); ++i) {
    for (Index j = 0; j < c.weights.beta.cols(); ++j) {
      if (j > 0) out << ' ';
      out << detail::format_hex(c.weights.beta(i, j));
    }
    out << '\n';
  }
}

inline Classifier read_classifier(std::istream& in) {
  std::string tag;
  if (!(in >> tag) || tag != "classifier") throw DataError("expected 'classifier'");
  Classifier c;
  c.map = read_feature_map_descriptor(in);
  if (!(in >> tag >> c.classes) || tag != "classes" || c.classes < 1)
    throw DataError("malformed class count");
  Index rows = 0, cols = 0;
  if (!(in >> tag >> rows >> cols) || tag != "beta")
    throw DataError("malformed beta header");
  if (rows != c.map.hidden() || cols != c.classes)
    throw DataError("beta shape does not match feature map and class count");
  c.weights.beta.resize(rows, cols);
  std::string token;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (!(in >> token) ||
          !detail::parse_double(token, c.weights.beta(i, j), std::chars_format::hex))
        throw DataError("malformed beta entry");
  return c;
}

}  // namespace daelm

#endif  // DAELM_SOLVERS_HPP_
