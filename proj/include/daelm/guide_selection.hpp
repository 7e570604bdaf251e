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

#ifndef DAELM_GUIDE_SELECTION_HPP_
#define DAELM_GUIDE_SELECTION_HPP_

#include <algorithm>
#include <utility>
#include <vector>

#include "daelm/common.hpp"
#include "daelm/dataset.hpp"

namespace daelm {

/// Rows chosen as labeled guides, in selection order.
struct GuideSelection {
  std::vector<Index> indices;
  Index requested = 0;
  bool truncated = false;  // requested > N; every row was selected
};

namespace detail {

inline double squared_distance(const Matrix& x, Index a, Index b) {
  double sum = 0.0;
  for (Index j = 0; j < x.cols(); ++j) {
    const double d = x(a, j) - x(b, j);
    sum += d * d;
  }
  return sum;
}

}  // namespace detail

/// Representative sample selection: start from the farthest pair, then
/// repeatedly add the row whose distance to its nearest selected row is
/// largest.
///
/// Distances are Euclidean (compared squared). Ties go to the lowest
/// index; the initial pair is listed lower index first.
inline GuideSelection ssa_select(const Matrix& x, Index k) {
  const Index n = x.rows();
  if (n < 2) throw std::invalid_argument("ssa_select: need at least 2 samples");
  if (k < 2) throw std::invalid_argument("ssa_select: k must be at least 2");

  GuideSelection g;
  g.requested = k;
  if (k > n) {
    g.truncated = true;
    k = n;
  }

  Index first = 0, second = 1;
  double best = -1.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double d = detail::squared_distance(x, i, j);
      if (d > best) {
        best = d;
        first = i;
        second = j;
      }
    }
  }
  g.indices = {first, second};

  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  chosen[static_cast<std::size_t>(first)] = chosen[static_cast<std::size_t>(second)] = true;
  std::vector<double> nearest(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    nearest[static_cast<std::size_t>(i)] =
        std::min(detail::squared_distance(x, i, first), detail::squared_distance(x, i, second));

  while (static_cast<Index>(g.indices.size()) < k) {
    Index pick = -1;
    double far = -1.0;
    for (Index i = 0; i < n; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      if (!chosen[ii] && nearest[ii] > far) {
        far = nearest[ii];
        pick = i;
      }
    }
    chosen[static_cast<std::size_t>(pick)] = true;
    g.indices.push_back(pick);
    for (Index i = 0; i < n; ++i) {
      auto& d = nearest[static_cast<std::size_t>(i)];
      d = std::min(d, detail::squared_distance(x, i, pick));
    }
  }
  return g;
}

inline GuideSelection ssa_select(const SampleSet& x, Index k) { return ssa_select(x.features, k); }

/// Row indices not in `g`, ascending.
inline std::vector<Index> remainder_indices(Index n, const GuideSelection& g) {
  std::vector<bool> is_guide(static_cast<std::size_t>(n), false);
  for (Index i : g.indices) {
    if (i < 0 || i >= n) throw std::invalid_argument("guide index out of range");
    if (is_guide[static_cast<std::size_t>(i)]) throw std::invalid_argument("duplicate guide index");
    is_guide[static_cast<std::size_t>(i)] = true;
  }
  std::vector<Index> rest;
  for (Index i = 0; i < n; ++i)
    if (!is_guide[static_cast<std::size_t>(i)]) rest.push_back(i);
  return rest;
}

/// Splits `x` into (guides, remainder). Both keep their labels; the
/// remainder preserves the original row order.
inline std::pair<SampleSet, SampleSet> split_target(const SampleSet& x, const GuideSelection& g) {
  const auto rest = remainder_indices(x.size(), g);
  return {select_rows(x, g.indices), select_rows(x, rest)};
}

}  // namespace daelm

#endif  // DAELM_GUIDE_SELECTION_HPP_
