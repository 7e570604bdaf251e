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

#include <gtest/gtest.h>

#include <sstream>

#include "daelm/daelm.hpp"
#include "oracles.hpp"

namespace daelm {
namespace {

using oracle::Block;
using oracle::relative_difference;

// Hidden outputs from a real feature map so the Gram structure is realistic.
Matrix hidden(Index rows, Index l, Rng& rng, std::uint64_t seed) {
  const auto f = new_feature_map(l, 8, Activation::radbas, seed);
  return hidden_output(f, oracle::random_matrix(rows, 8, rng));
}

double stationarity_bound(const Matrix& beta) { return 1e-8 * (1.0 + beta.norm()); }

TEST(TrainElm, IdentityMapWithWeakRegularizationReturnsTargets) {
  Rng rng(1);
  const Matrix t = oracle::random_targets(12, 3, rng);
  const Matrix h = Matrix::Identity(12, 12);
  for (auto b : {Branch::primal, Branch::dual})
    EXPECT_LT((train_elm(h, t, 1e8, b).beta - t).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(TrainElm, BranchesAgreeOnWideProblem) {
  Rng rng(2);
  const Matrix h = oracle::random_matrix(20, 50, rng);
  const Matrix t = oracle::random_matrix(20, 3, rng);
  const Matrix primal = train_elm(h, t, 1.0, Branch::primal).beta;
  const Matrix dual = train_elm(h, t, 1.0, Branch::dual).beta;
  EXPECT_LT(relative_difference(primal, dual), 1e-8);
  EXPECT_EQ(train_elm(h, t, 1.0).beta, dual);
}

TEST(TrainElm, SolutionMatchesLeastSquaresOracleAndIsStationary) {
  Rng rng(3);
  for (auto [rows, l] : {std::pair<Index, Index>{20, 50}, {80, 30}, {40, 40}}) {
    const Matrix h = hidden(rows, l, rng, 11);
    const Matrix t = oracle::random_targets(rows, 6, rng);
    for (auto b : {Branch::primal, Branch::dual}) {
      const Matrix beta = train_elm(h, t, 2.5, b).beta;
      EXPECT_LT(relative_difference(beta, oracle::ridge_least_squares({{&h, &t, 2.5}})), 1e-8);
      EXPECT_LT(oracle::ridge_gradient(beta, {{&h, &t, 2.5}}).norm(), stationarity_bound(beta));
    }
  }
}

TEST(TrainElm, BranchRuleUsesPrimalAtEquality) {
  Rng rng(4);
  DualSolveScratch s;
  const Matrix h = oracle::random_matrix(10, 10, rng);
  const Matrix t = oracle::random_targets(10, 2, rng);
  train_elm(h, t, 1.0, Branch::automatic, &s);
  EXPECT_EQ(s.alpha_primary.size(), 0);
  train_elm(h.topRows(9), t.topRows(9), 1.0, Branch::automatic, &s);
  EXPECT_EQ(s.alpha_primary.rows(), 9);
}

TEST(TrainElm, DualMultipliersEqualScaledResiduals) {
  Rng rng(5);
  const Matrix h = hidden(15, 40, rng, 3);
  const Matrix t = oracle::random_targets(15, 4, rng);
  DualSolveScratch s;
  train_elm(h, t, 0.7, Branch::dual, &s);
  EXPECT_LT((s.alpha_primary - 0.7 * s.residual_primary).norm(), 1e-6);
}

TEST(TrainElm, RejectsBadInput) {
  Matrix h = Matrix::Ones(3, 4);
  const Matrix t = Matrix::Ones(3, 2);
  EXPECT_THROW(train_elm(h, t, 0.0), std::invalid_argument);
  EXPECT_THROW(train_elm(h, Matrix::Ones(2, 2), 1.0), std::invalid_argument);
  h(1, 1) = std::nan("");
  EXPECT_THROW(train_elm(h, t, 1.0), std::invalid_argument);
  EXPECT_THROW(train_elm(h, t, 1.0, Branch::primal), std::invalid_argument);
}

TEST(TrainElm, MonotoneFitInPenalty) {
  Rng rng(6);
  const Matrix h = hidden(60, 30, rng, 8);
  const Matrix t = oracle::random_targets(60, 3, rng);
  double previous = INFINITY;
  for (double c : {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3}) {
    const double residual = (t - h * train_elm(h, t, c).beta).norm();
    EXPECT_LE(residual, previous * (1 + 1e-12));
    previous = residual;
  }
}

TEST(TrainDaelmS, ZeroTargetPenaltyReducesToElm) {
  Rng rng(7);
  for (auto [ns, l] : {std::pair<Index, Index>{30, 50}, {70, 40}}) {
    const Matrix hs = hidden(ns, l, rng, 1), ht = hidden(5, l, rng, 1);
    const Matrix ts = oracle::random_targets(ns, 6, rng), tt = oracle::random_targets(5, 6, rng);
    const Matrix elm = train_elm(hs, ts, 0.5).beta;
    const Matrix daelm = train_daelm_s(hs, ts, ht, tt, {0.5, 0.0, 0.0}).beta;
    EXPECT_LT(relative_difference(daelm, elm), 1e-8);
  }
}

TEST(TrainDaelmS, PrimalAndDualAgree) {
  Rng rng(8);
  const Matrix hs = hidden(30, 50, rng, 2), ht = hidden(5, 50, rng, 2);
  const Matrix ts = oracle::random_targets(30, 6, rng), tt = oracle::random_targets(5, 6, rng);
  const Penalties p{0.01, 10.0, 0.0};
  const Matrix primal = train_daelm_s(hs, ts, ht, tt, p, Branch::primal).beta;
  const Matrix dual = train_daelm_s(hs, ts, ht, tt, p, Branch::dual).beta;
  EXPECT_LT(relative_difference(primal, dual), 1e-6);
  EXPECT_LT(relative_difference(dual, oracle::ridge_least_squares({{&hs, &ts, 0.01}, {&ht, &tt, 10.0}})),
            1e-8);
}

TEST(TrainDaelmS, StationarityAndMultipliers) {
  Rng rng(9);
  const Matrix hs = hidden(25, 60, rng, 4), ht = hidden(8, 60, rng, 4);
  const Matrix ts = oracle::random_targets(25, 6, rng), tt = oracle::random_targets(8, 6, rng);
  const Penalties p{0.3, 4.0, 0.0};
  DualSolveScratch s;
  const Matrix beta = train_daelm_s(hs, ts, ht, tt, p, Branch::dual, &s).beta;
  EXPECT_LT(oracle::ridge_gradient(beta, {{&hs, &ts, 0.3}, {&ht, &tt, 4.0}}).norm(),
            stationarity_bound(beta));
  EXPECT_LT((s.alpha_primary - 0.3 * s.residual_primary).norm(), 1e-6);
  EXPECT_LT((s.alpha_aux - 4.0 * s.residual_aux).norm(), 1e-6);
  // Gram blocks with the 1/C shift are SPD.
  EXPECT_EQ(Eigen::LLT<Matrix>(s.aux_gram).info(), Eigen::Success);
  EXPECT_EQ(Eigen::LLT<Matrix>(s.primary_gram).info(), Eigen::Success);
  EXPECT_TRUE(s.primary_aux.isApprox(s.aux_primary.transpose()));
}

TEST(TrainDaelmS, MonotoneSourceFitInSourcePenalty) {
  Rng rng(10);
  const Matrix hs = hidden(40, 30, rng, 6), ht = hidden(6, 30, rng, 6);
  const Matrix ts = oracle::random_targets(40, 3, rng), tt = oracle::random_targets(6, 3, rng);
  double previous = INFINITY;
  for (double cs : {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0}) {
    const Matrix beta = train_daelm_s(hs, ts, ht, tt, {cs, 1.0, 0.0}).beta;
    const double residual = (ts - hs * beta).norm();
    EXPECT_LE(residual, previous * (1 + 1e-12));
    previous = residual;
  }
}

TEST(TrainDaelmTBase, IsRegularizedElm) {
  Rng rng(11);
  const Matrix h = hidden(45, 100, rng, 7);
  const Matrix t = oracle::random_targets(45, 6, rng);
  EXPECT_EQ(train_daelm_t_base(h, t, 0.001).beta, train_elm(h, t, 0.001).beta);
}

TEST(TrainDaelmT, ZeroUnlabeledPenaltyReducesToElmOnGuides) {
  Rng rng(12);
  const Matrix ht = hidden(10, 60, rng, 5), htu = hidden(40, 60, rng, 5);
  const Matrix tt = oracle::random_targets(10, 6, rng);
  const Matrix pseudo = oracle::random_matrix(40, 6, rng);
  const Matrix beta = train_daelm_t(ht, tt, htu, pseudo, {0.001, 0.5, 0.0}).beta;
  EXPECT_LT(relative_difference(beta, train_elm(ht, tt, 0.5).beta), 1e-8);
}

TEST(TrainDaelmT, PrimalAndDualAgreeAndAreStationary) {
  Rng rng(13);
  const Matrix ht = hidden(10, 60, rng, 9), htu = hidden(40, 60, rng, 9);
  const Matrix tt = oracle::random_targets(10, 6, rng);
  const Matrix pseudo = oracle::random_matrix(40, 6, rng);
  const Penalties p{0.001, 0.5, 100.0};
  DualSolveScratch s;
  const Matrix primal = train_daelm_t(ht, tt, htu, pseudo, p, Branch::primal).beta;
  const Matrix dual = train_daelm_t(ht, tt, htu, pseudo, p, Branch::dual, &s).beta;
  EXPECT_LT(relative_difference(primal, dual), 1e-6);
  for (const Matrix* beta : {&primal, &dual})
    EXPECT_LT(oracle::ridge_gradient(*beta, {{&ht, &tt, 0.5}, {&htu, &pseudo, 100.0}}).norm(),
              stationarity_bound(*beta));
  EXPECT_LT((s.alpha_primary - 0.5 * s.residual_primary).norm(), 1e-6);
  EXPECT_LT((s.alpha_aux - 100.0 * s.residual_aux).norm(), 1e-6);
}

TEST(TrainDaelmT, BaseWeightsOverloadUsesSharedHiddenLayer) {
  Rng rng(14);
  const Matrix ht = hidden(6, 20, rng, 1), htu = hidden(30, 20, rng, 1);
  const Matrix tt = oracle::random_targets(6, 3, rng);
  const OutputWeights base{oracle::random_matrix(20, 3, rng)};
  const Penalties p{0.001, 0.001, 100.0};
  const Matrix pseudo = htu * base.beta;
  EXPECT_EQ(train_daelm_t(ht, tt, htu, base, p).beta, train_daelm_t(ht, tt, htu, pseudo, p).beta);
  EXPECT_THROW(train_daelm_t(ht, tt, htu, OutputWeights{Matrix::Zero(5, 3)}, p),
               std::invalid_argument);
}

TEST(Predict, ArgmaxWithLowestIndexTies) {
  EXPECT_EQ(argmax_labels(Matrix{{0.9, -0.2, -1, -1, -1, -1}}), std::vector<int>{1});
  EXPECT_EQ(argmax_labels(Matrix{{0.5, 0.5, -1, -1, -1, -1}}), std::vector<int>{1});
  EXPECT_EQ(argmax_labels(Matrix{{-1, -1, 0.3, 0.3, 0.3, -1}}), std::vector<int>{3});
}

TEST(Predict, ArgmaxInvariantUnderPositiveRescaling) {
  Rng rng(15);
  const Matrix scores = oracle::random_matrix(200, 6, rng);
  const auto labels = argmax_labels(scores);
  for (double s : {1e-6, 0.5, 3.0, 1e6}) EXPECT_EQ(argmax_labels(scores * s), labels);
}

TEST(Predict, SeparableTwoClassTrainingSetIsFit) {
  Rng rng(16);
  SampleSet s;
  s.classes = 2;
  s.features.resize(80, 3);
  for (Index i = 0; i < 80; ++i) {
    const int label = i < 40 ? 1 : 2;
    s.features.row(i) = oracle::random_matrix(1, 3, rng, -0.4, 0.4);
    s.features(i, 0) += label == 1 ? -0.5 : 0.5;
    s.labels.push_back(label);
  }
  const auto map = new_feature_map(200, 3, Activation::radbas, 3);
  const Classifier c{map, train_elm(hidden_output(map, s), encode_targets(s.labels, 2).targets, 1e4), 2};
  const auto p = predict(c, s);
  EXPECT_EQ(p.scores.rows(), 80);
  EXPECT_EQ(p.scores.cols(), 2);
  EXPECT_DOUBLE_EQ(accuracy(p.labels, s.labels), 1.0);
  EXPECT_THROW(predict(c, Matrix::Zero(2, 4)), std::invalid_argument);
}

TEST(Accuracy, Basics) {
  const std::vector<int> a{1, 2, 3, 4}, b{1, 2, 3, 1}, c{2, 3, 4, 5};
  EXPECT_EQ(accuracy(a, a), 1.0);
  EXPECT_EQ(accuracy(a, c), 0.0);
  EXPECT_EQ(accuracy(a, b), 0.75);
  EXPECT_THROW(accuracy(a, std::vector<int>{1}), std::invalid_argument);
  EXPECT_THROW(accuracy(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
}

TEST(Classifier, SerializationRoundTripsBitExactly) {
  Rng rng(17);
  const auto map = new_feature_map(25, 4, Activation::sigmoid, 99);
  Classifier c{map, OutputWeights{oracle::random_matrix(25, 6, rng, -1e3, 1e3)}, 6};
  c.weights.beta(0, 0) = -0.0;
  c.weights.beta(1, 1) = 5e-324;
  std::stringstream io;
  write_classifier(io, c);
  const auto text = io.str();
  const auto back = read_classifier(io);
  EXPECT_EQ(back.classes, 6);
  EXPECT_EQ(back.map.weights, map.weights);
  EXPECT_TRUE((back.weights.beta.array() == c.weights.beta.array()).all());
  EXPECT_TRUE(std::signbit(back.weights.beta(0, 0)));
  std::ostringstream again;
  write_classifier(again, back);
  EXPECT_EQ(again.str(), text);

  std::istringstream bad("classifier\nmap radbas 25 4 99\nclasses 6\nbeta 24 6\n");
  EXPECT_THROW(read_classifier(bad), DataError);
}

TEST(SpdSolve, JitterRescuesRoundOffIndefiniteSystem) {
  // Rank-deficient PSD matrix: plain Cholesky may fail, the shift fixes it.
  Matrix a = Matrix::Ones(4, 4);
  bool jittered = false;
  const Matrix x = detail::spd_solve(a, Matrix::Ones(4, 1), &jittered);
  EXPECT_TRUE(jittered);
  EXPECT_TRUE(x.allFinite());
  Matrix negative = -Matrix::Identity(3, 3);
  EXPECT_THROW(detail::spd_solve(negative, Matrix::Ones(3, 1)), NumericalError);
}

}  // namespace
}  // namespace daelm
