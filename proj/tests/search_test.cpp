// Copyright 2026 The hetcomplete Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "hetcomplete/search.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hetcomplete/errors.hpp"
#include "test_support.hpp"

namespace hetcomplete {
namespace {

using testing::random_matrix;

Dataset tiny_dataset() { return gen_synthetic(testing::tiny_planted_spec()).dataset; }

TEST(ProxC1, OneHotIdempotentAndLowestIndexOnTies) {
  const Matrix a = Matrix::from_rows({{0.2, 0.9, 0.9, 0.1}, {0.5, 0.5, 0.5, 0.5}, {-1.0, -3.0, -0.5, -2.0}});
  const Matrix p = prox_c1(a);
  EXPECT_EQ(p, Matrix::from_rows({{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 1, 0}}));
  EXPECT_EQ(prox_c1(p), p);
  EXPECT_EQ(prox_c1(a), p);
  EXPECT_EQ(row_argmax(a), (std::vector<int>{1, 0, 2}));
}

TEST(ProxC2, ClampsToUnitBox) {
  EXPECT_EQ(prox_c2(Matrix::from_rows({{-0.5, 0.3, 1.7, 1.0}})), Matrix::from_rows({{0.0, 0.3, 1.0, 1.0}}));
}

TEST(ProxComposition, EqualsNearestOneHotOnBoxRows) {
  std::mt19937_64 rng(1);
  const Matrix rows = random_matrix(1000, 4, rng, 0.0, 1.0);
  const Matrix composed = prox_c1(prox_c2(rows));
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto ref = testing::nearest_one_hot(rows.row(i));
    auto got = composed.row(i);
    EXPECT_TRUE(std::equal(got.begin(), got.end(), ref.begin())) << "row " << i;
  }
}

TEST(ProxComposition, OutsideTheBoxOnlyClampedTiesDisagree) {
  std::mt19937_64 rng(2);
  const Matrix rows = random_matrix(1000, 4, rng, -1.0, 2.0);
  const Matrix composed = prox_c1(prox_c2(rows));
  int disagreements = 0;
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto ref = testing::nearest_one_hot(rows.row(i));
    auto got = composed.row(i);
    if (std::equal(got.begin(), got.end(), ref.begin())) continue;
    ++disagreements;
    const Matrix box = prox_c2(gather_rows(rows, std::vector<int>{static_cast<int>(i)}));
    const auto clamped = box.row(0);
    const double top = *std::max_element(clamped.begin(), clamped.end());
    EXPECT_GE(std::count(clamped.begin(), clamped.end(), top), 2) << "row " << i;
  }
  EXPECT_GT(disagreements, 0);
}

TEST(AlphaGradient, MatchesFiniteDifferences) {
  SearchConfig cfg = testing::tiny_config();
  const Problem p = make_problem(tiny_dataset(), cfg);
  ParamStore store = init_params(p.graph, p.spec, p.ctx, 3);
  std::mt19937_64 rng(3);
  testing::randomize(store, rng);
  std::vector<int> cluster;
  for (std::size_t i = 0; i < p.num_missing(); ++i) cluster.push_back(static_cast<int>(i % 2));
  const auto candidates = all_candidates(p.ctx, completion_weights(store, p.graph));
  auto val_loss = [&](ad::Tape& tape, ad::Var w) {
    const BoundParams bound(store, store.bind(tape, false));
    const ad::Var hidden = forward(tape, p.backbone, bound, complete_mixture(tape, candidates, cluster, w), cfg.layers);
    return task_loss(p, bound, hidden, Part::kVal, 0);
  };
  const Matrix at = prox_c1(random_matrix(2, kNumOps, rng, 0.0, 1.0));
  const Matrix g = alpha_gradient(p, store, cluster, at, SearchMode::kDiscrete, 0);
  const double err = ad::finite_diff_check(val_loss, at);
  EXPECT_LT(err, 1e-4);
  ad::Tape tape;
  const ad::Var leaf = tape.leaf(at);
  tape.backward(val_loss(tape, leaf));
  EXPECT_LT(max_abs_diff(tape.grad(leaf), g), 1e-12);

  const Matrix alpha = random_matrix(2, kNumOps, rng);
  const double err_relaxed = ad::finite_diff_check(
      [&](ad::Tape& t, ad::Var a) { return val_loss(t, ad::row_softmax(a)); }, alpha);
  EXPECT_LT(err_relaxed, 1e-4);
}

TEST(AlphaStep, ZeroGradientLeavesOnlyDecay) {
  SearchConfig cfg = testing::tiny_config();
  const Problem p = make_problem(tiny_dataset(), cfg);
  const ParamStore store = init_params(p.graph, p.spec, p.ctx, 1);  // completion weights start at zero
  std::mt19937_64 rng(4);
  AlphaState st{random_matrix(2, kNumOps, rng, 0.0, 1.0), {}};
  const Matrix before = st.alpha;
  alpha_step(p, store, std::vector<int>(p.num_missing(), 0), st, 0);
  for (std::size_t i = 0; i < before.size(); ++i)
    EXPECT_NEAR(st.alpha.values()[i], before.values()[i] * (1.0 - cfg.alpha.lr * cfg.alpha.weight_decay), 1e-15);
}

TEST(AlphaStep, DiscreteStaysInTheBox) {
  SearchConfig cfg = testing::tiny_config();
  cfg.alpha.lr = 5.0;
  const Problem p = make_problem(tiny_dataset(), cfg);
  ParamStore store = init_params(p.graph, p.spec, p.ctx, 1);
  std::mt19937_64 rng(5);
  testing::randomize(store, rng);
  AlphaState st{Matrix(2, kNumOps, 0.5), {}};
  for (int e = 0; e < 3; ++e) alpha_step(p, store, std::vector<int>(p.num_missing(), 1), st, e);
  for (double v : st.alpha.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(OmegaStep, EvaluatesOneOperatorPerClusterInDiscreteMode) {
  for (SearchMode mode : {SearchMode::kDiscrete, SearchMode::kRelaxed}) {
    SearchConfig cfg = testing::tiny_config();
    cfg.num_clusters = 3;
    cfg.mode = mode;
    const Problem p = make_problem(tiny_dataset(), cfg);
    ParamStore store = init_params(p.graph, p.spec, p.ctx, 1);
    std::vector<int> cluster;
    for (std::size_t i = 0; i < p.num_missing(); ++i) cluster.push_back(static_cast<int>(i % 3));
    OpCounter counter;
    omega_step(p, store, AlphaState{Matrix(3, kNumOps, 0.5), {}}, cluster, 0, &counter);
    EXPECT_EQ(counter.total(), mode == SearchMode::kDiscrete ? 3u : 12u);
  }
}

TEST(OmegaStep, ZeroLambdaLeavesClusteringHeadUnchanged) {
  SearchConfig cfg = testing::tiny_config();
  cfg.lambda = 0.0;
  const Problem p = make_problem(tiny_dataset(), cfg);
  ParamStore store = init_params(p.graph, p.spec, p.ctx, 1);
  const Matrix theta = store.value("cluster.theta");
  const Matrix head = store.value("head.cls");
  omega_step(p, store, AlphaState{Matrix(2, kNumOps, 0.5), {}}, std::vector<int>(p.num_missing(), 0), 0, nullptr);
  EXPECT_EQ(store.value("cluster.theta"), theta);
  EXPECT_NE(store.value("head.cls"), head);
}

TEST(CompleteDiscrete, RowsComeFromTheirClusterOperator) {
  const Problem p = make_problem(tiny_dataset(), testing::tiny_config());
  ParamStore store = init_params(p.graph, p.spec, p.ctx, 1);
  std::mt19937_64 rng(6);
  testing::randomize(store, rng);
  const Assignment a = testing::alternating_assignment(p, {OpKind::kPpnp, OpKind::kOneHot});
  ad::Tape tape;
  const BoundParams bound(store, store.bind(tape, false));
  OpCounter counter;
  const Matrix x = complete_discrete(tape, p, completion_vars(bound, p.graph), a, &counter).value();
  const auto cand = all_candidates(p.ctx, completion_weights(store, p.graph));
  for (std::size_t i = 0; i < p.num_missing(); ++i) {
    const Matrix& ref = cand[static_cast<std::size_t>(a.ops[static_cast<std::size_t>(a.cluster[i])])];
    for (std::size_t j = 0; j < x.cols(); ++j) EXPECT_NEAR(x(i, j), ref(i, j), 1e-12);
  }
  EXPECT_EQ(counter.total(), 2u);
}

TEST(SearchLoop, SingleEpochRunsAndRetrains) {
  SearchConfig cfg = testing::tiny_config();
  cfg.epochs = 1;
  const Problem p = make_problem(tiny_dataset(), cfg);
  const SearchResult r = search_loop(p);
  EXPECT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.node_ops.size(), p.num_missing());
  EXPECT_GE(r.retrain.best_epoch, 0);
  EXPECT_EQ(r.history[0].omega_op_evaluations, 2u);
}

TEST(SearchLoop, FixedClustersAreKeptAndValidated) {
  SearchConfig cfg = testing::tiny_config();
  cfg.cluster_mode = ClusterMode::kFixed;
  const Problem p = make_problem(tiny_dataset(), cfg);
  EXPECT_THROW(search_loop(p), ValidationError);
  EXPECT_THROW(search_loop(p, std::vector<int>(p.num_missing(), 2)), ValidationError);
  std::vector<int> map(p.num_missing(), 0);
  map.back() = 1;
  EXPECT_EQ(search_loop(p, map).final.cluster, map);
}

TEST(SearchLoop, IdenticalSeedsGiveIdenticalDocuments) {
  SearchConfig cfg = testing::tiny_config();
  cfg.epochs = 4;
  const Problem p = make_problem(tiny_dataset(), cfg);
  EXPECT_EQ(search_result_to_json(p, search_loop(p)).dump(), search_result_to_json(p, search_loop(p)).dump());
}

TEST(MakeProblem, NothingToComplete) {
  GraphDescription d;
  d.node_types = {{"a", 4}};
  d.attributes.emplace("a", Matrix(4, 2, 1.0));
  d.edge_types = {{"aa", "a", "a", {{0, 1}, {2, 3}}}};
  Dataset ds{build_graph(d), Labels{"a", 2, {{0, 0}, {1, 1}, {2, 0}, {3, 1}}}, TargetSpec{TaskKind::kNodeClassification, "a", ""}};
  SearchConfig cfg = testing::tiny_config();
  cfg.split = {0.5, 0.25, 0.25};
  try {
    make_problem(ds, cfg);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("nothing to complete"), std::string::npos);
  }
}

TEST(TrainFixed, SnapshotReproducesBestValidationLoss) {
  const Problem p = make_problem(tiny_dataset(), testing::tiny_config());
  const std::vector<OpKind> ops(p.num_missing(), OpKind::kGcnAgg);
  const TrainResult r = train_fixed(p, ops, 6, 2);
  Assignment a;
  a.ops.assign(kAllOps.begin(), kAllOps.end());
  for (OpKind op : ops) a.cluster.push_back(static_cast<int>(op));
  EXPECT_DOUBLE_EQ(evaluate(p, r.params, a, Part::kVal).loss, r.best_val_loss);
  EXPECT_DOUBLE_EQ(r.val.loss, r.best_val_loss);
}

TEST(SearchConfig, JsonRoundTripAndRejections) {
  SearchConfig c;
  c.mode = SearchMode::kRelaxed;
  c.cluster_mode = ClusterMode::kFixed;
  c.shared_transform = true;
  c.lambda = 0.7;
  const nlohmann::json j = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(j)), j);
  EXPECT_THROW(config_from_json({{"lambada", 1.0}}), ValidationError);
  EXPECT_THROW(config_from_json({{"num_clusters", 1}}), ValidationError);
  EXPECT_THROW(config_from_json({{"mode", "mixed"}}), ValidationError);
}

}  // namespace
}  // namespace hetcomplete
