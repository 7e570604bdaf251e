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

#ifndef DAELM_FEATURE_MAP_HPP_
#define DAELM_FEATURE_MAP_HPP_

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include "daelm/common.hpp"
#include "daelm/dataset.hpp"

namespace daelm {

enum class Activation { radbas, sigmoid };

inline std::string_view to_string(Activation a) {
  return a == Activation::radbas ? "radbas" : "sigmoid";
}

inline Activation parse_activation(std::string_view s) {
  if (s == "radbas") return Activation::radbas;
  if (s == "sigmoid") return Activation::sigmoid;
  throw std::invalid_argument("unknown activation '" + std::string(s) + "'");
}

// radbas uses unit kernel width: exp(-z^2).
inline double activate(Activation a, double z) {
  switch (a) {
    case Activation::radbas:
      return std::exp(-z * z);
    case Activation::sigmoid:
      return 1.0 / (1.0 + std::exp(-z));
  }
  return 0.0;
}

/// Frozen random hidden layer. `weights` is L x n, `biases` has length L.
/// (seed, hidden, inputs, activation) fully determine the map.
struct RandomFeatureMap {
  Matrix weights;
  Vector biases;
  Activation activation = Activation::radbas;
  std::uint64_t seed = 0;

  Index hidden() const { return weights.rows(); }
  Index inputs() const { return weights.cols(); }
};

/// Draws W and B i.i.d. uniform on [-1, 1], row by row of W followed by B.
inline RandomFeatureMap new_feature_map(Index hidden, Index inputs, Activation activation,
                                        std::uint64_t seed) {
  if (hidden < 1 || inputs < 1) throw std::invalid_argument("feature map needs L >= 1, n >= 1");
  RandomFeatureMap f;
  f.activation = activation;
  f.seed = seed;
  f.weights.resize(hidden, inputs);
  f.biases.resize(hidden);
  Rng rng(seed);
  for (Index i = 0; i < hidden; ++i)
    for (Index j = 0; j < inputs; ++j) f.weights(i, j) = rng.uniform(-1.0, 1.0);
  for (Index i = 0; i < hidden; ++i) f.biases[i] = rng.uniform(-1.0, 1.0);
  return f;
}

/// H = act(X W^T + 1 B^T), one row per input row.
inline Matrix hidden_output(const RandomFeatureMap& f, const Matrix& x) {
  if (x.cols() != f.inputs())
    throw std::invalid_argument("hidden_output: input has " + std::to_string(x.cols()) +
                                " columns, map expects " + std::to_string(f.inputs()));
  Matrix h = x * f.weights.transpose();
  h.rowwise() += f.biases.transpose();
  const Activation a = f.activation;
  return h.unaryExpr([a](double z) { return activate(a, z); });
}

inline Matrix hidden_output(const RandomFeatureMap& f, const SampleSet& x) {
  return hidden_output(f, x.features);
}

inline void write_feature_map_descriptor(std::ostream& out, const RandomFeatureMap& f) {
  out << "map " << to_string(f.activation) << ' ' << f.hidden() << ' ' << f.inputs() << ' '
      << f.seed << '\n';
}

inline RandomFeatureMap read_feature_map_descriptor(std::istream& in) {
  std::string tag, activation;
  Index hidden = 0, inputs = 0;
  std::uint64_t seed = 0;
  if (!(in >> tag >> activation >> hidden >> inputs >> seed) || tag != "map")
    throw DataError("malformed feature map descriptor");
  try {
    return new_feature_map(hidden, inputs, parse_activation(activation), seed);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
}

/// Materialized W (one row per hidden unit, followed by its bias) in exact
/// hex notation, for comparison against other implementations.
inline void write_feature_map_weights(std::ostream& out, const RandomFeatureMap& f) {
  for (Index i = 0; i < f.hidden(); ++i) {
    for (Index j = 0; j < f.inputs(); ++j) out << detail::format_hex(f.weights(i, j)) << ' ';
    out << detail::format_hex(f.biases[i]) << '\n';
  }
}

}  // namespace daelm

#endif  // DAELM_FEATURE_MAP_HPP_
