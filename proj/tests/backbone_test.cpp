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


#include "hetcomplete/backbone.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hetcomplete/errors.hpp"
#include "hetcomplete/search.hpp"
#include "test_support.hpp"

namespace hetcomplete {
namespace {

using testing::random_matrix;

Dataset tiny_dataset() { return gen_synthetic(testing::tiny_planted_spec()).dataset; }

TEST(BackboneGradient, ClassificationLossMatchesFiniteDifferences) {
  const Problem p = make_problem(tiny_dataset(), testing::tiny_config());
  ASSERT_LE(p.graph.num_nodes(), 30);
  ParamStore store = init_params(p.graph, p.spec, p.ctx, 1);
  std::mt19937_64 rng(1);
  testing::randomize(store, rng);
  const Assignment a = testing::alternating_assignment(p, {OpKind::kMean, OpKind::kPpnp, OpKind::kOneHot, OpKind::kGcnAgg});
  EXPECT_LT(testing::worst_param_fd(p, store, a, 0.0), 1e-4);
}

TEST(BackboneGradient, CombinedLossWithClusteringMatchesFiniteDifferences) {
  const Problem p = make_problem(tiny_dataset(), testing::tiny_config());
  ParamStore store = init_params(p.graph, p.spec, p.ctx, 2);
  std::mt19937_64 rng(2);
  testing::randomize(store, rng);
  const Assignment a = testing::alternating_assignment(p, {OpKind::kGcnAgg, OpKind::kOneHot});
  EXPECT_LT(testing::worst_param_fd(p, store, a, 0.4), 1e-4);
}

TEST(Losses, UniformLogitsGiveLogC) {
  ad::Tape tape;
  const ad::Var logits = tape.constant(Matrix(4, 3, 0.7));
  EXPECT_NEAR(loss_node_classification(logits, {0, 1, 2, 1}).scalar(), std::log(3.0), 1e-14);
}

TEST(Losses, ZeroScoresGiveLogTwo) {
  ad::Tape tape;
  const ad::Var zero = tape.constant(Matrix(5, 1));
  EXPECT_NEAR(loss_link_prediction(zero, zero).scalar(), std::log(2.0), 1e-14);
}

TEST(Losses, EmptySplitIsAContractViolation) {
  ad::Tape tape;
  EXPECT_THROW(loss_node_classification(tape.constant(Matrix(0, 2)), {}), ContractViolation);
}

TEST(Adam, ZeroLearningRateLeavesParametersUnchanged) {
  std::mt19937_64 rng(3);
  Matrix p = random_matrix(3, 2, rng);
  const Matrix before = p;
  AdamState st;
  adam_update(p, random_matrix(3, 2, rng), st, AdamConfig{0.0, 0.1});
  EXPECT_EQ(p, before);
}

TEST(Adam, ZeroGradientAndDecayLeaveParametersUnchanged) {
  std::mt19937_64 rng(4);
  Matrix p = random_matrix(2, 2, rng);
  const Matrix before = p;
  AdamState st;
  for (int i = 0; i < 3; ++i) adam_update(p, Matrix(2, 2), st, AdamConfig{0.01, 0.0});
  EXPECT_EQ(p, before);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Matrix p(1, 2, 1.0);
  AdamState st;
  adam_update(p, Matrix::from_rows({{0.3, -2.0}}), st, AdamConfig{0.01, 0.0});
  EXPECT_NEAR(p(0, 0), 0.99, 1e-9);
  EXPECT_NEAR(p(0, 1), 1.01, 1e-9);
}

TEST(Forward, SingleIsolatedNodeWithIdentityWeightsIsElu) {
  GraphDescription d;
  d.node_types = {{"a", 1}, {"m", 1}};
  d.attributes.emplace("a", Matrix::from_rows({{0.5, -1.0}}));
  const HeteroGraph g = build_graph(d);
  const BackboneGraph bg = make_backbone_graph(g);
  const CompletionContext ctx = make_context(g, build_adjacency(g, false), {});
  ParamStore store = init_params(g, BackboneSpec{2, 1, 0, 0}, ctx, 1);
  store.value("input.a") = Matrix::identity(2);
  store.value("layer0.self") = Matrix::identity(2);
  ad::Tape tape;
  const BoundParams bound(store, store.bind(tape, false));
  const Matrix h = forward(tape, bg, bound, tape.constant(Matrix(1, 2)), 1).value();
  EXPECT_DOUBLE_EQ(h(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(h(0, 1), std::expm1(-1.0));
  EXPECT_EQ(h(1, 0), 0.0);
  EXPECT_EQ(h(1, 1), 0.0);
}

TEST(ParamStore, CheckpointRoundTripIsLossless) {
  const Problem p = make_problem(tiny_dataset(), testing::tiny_config());
  ParamStore store = init_params(p.graph, p.spec, p.ctx, 9);
  std::mt19937_64 rng(9);
  testing::randomize(store, rng, 3.0);
  std::stringstream ss;
  store.save(ss);
  const ParamStore back = ParamStore::load(ss);
  EXPECT_TRUE(back == store);
  std::istringstream bad("hetcomplete-params 2 0");
  EXPECT_THROW(ParamStore::load(bad), ValidationError);
}

TEST(ParamStore, UntouchedParametersKeepValues) {
  const Problem p = make_problem(tiny_dataset(), testing::tiny_config());
  ParamStore store = init_params(p.graph, p.spec, p.ctx, 5);
  const Matrix gcn_before = store.value("completion.gcn");
  ad::Tape tape;
  const BoundParams bound(store, store.bind(tape, true));
  const Assignment a = testing::alternating_assignment(p, {OpKind::kMean});
  tape.backward(testing::problem_loss(tape, p, bound, a, 0.0));
  store.collect(bound.vars());
  store.adam_step(AdamConfig{0.1, 0.5});
  EXPECT_EQ(store.value("completion.gcn"), gcn_before);
}

TEST(InitParams, SharedTransformServesThreeOperators) {
  BackboneSpec spec{4, 1, 2, 0, true};
  const Dataset ds = tiny_dataset();
  const CompletionContext ctx = make_context(ds.graph, build_adjacency(ds.graph, false), {});
  const ParamStore store = init_params(ds.graph, spec, ctx, 1);
  EXPECT_TRUE(store.contains("completion.shared"));
  EXPECT_FALSE(store.contains("completion.mean"));
  ad::Tape tape;
  const BoundParams bound(store, store.bind(tape, true));
  const OpVars v = completion_vars(bound, ds.graph);
  EXPECT_EQ(v.mean.id(), v.gcn.id());
  EXPECT_EQ(v.gcn.id(), v.ppnp.id());
}

TEST(InitParams, SameSeedSameValues) {
  const Problem p = make_problem(tiny_dataset(), testing::tiny_config());
  EXPECT_TRUE(init_params(p.graph, p.spec, p.ctx, 4) == init_params(p.graph, p.spec, p.ctx, 4));
  EXPECT_FALSE(init_params(p.graph, p.spec, p.ctx, 4) == init_params(p.graph, p.spec, p.ctx, 5));
}

// Reverses the local order of the attributed "a" nodes.
GraphDescription reversed(const GraphDescription& d) {
  GraphDescription r = d;
  const Matrix& x = d.attributes.at("a");
  const int n = static_cast<int>(x.rows());
  Matrix y(x.rows(), x.cols());
  for (int i = 0; i < n; ++i)
    std::copy(x.row(static_cast<std::size_t>(i)).begin(), x.row(static_cast<std::size_t>(i)).end(),
              y.row(static_cast<std::size_t>(n - 1 - i)).begin());
  r.attributes["a"] = y;
  for (auto& e : r.edge_types)
    for (auto& [u, v] : e.pairs) {
      if (e.src_type == "a") u = n - 1 - u;
      if (e.dst_type == "a") v = n - 1 - v;
    }
  return r;
}

TEST(Forward, PermutationEquivariant) {
  std::mt19937_64 rng(6);
  GraphDescription d;
  d.node_types = {{"a", 5}, {"m", 3}};
  d.attributes.emplace("a", random_matrix(5, 3, rng));
  d.edge_types = {{"am", "a", "m", {{0, 0}, {1, 0}, {2, 1}, {3, 2}, {4, 2}, {4, 1}}}, {"aa", "a", "a", {{0, 4}, {1, 2}}}};
  const HeteroGraph g1 = build_graph(d);
  const HeteroGraph g2 = build_graph(reversed(d));
  auto hidden = [&](const HeteroGraph& g) {
    const CompletionContext ctx = make_context(g, build_adjacency(g, false), {});
    ParamStore store = init_params(g, BackboneSpec{4, 2, 0, 0}, ctx, 7);
    std::mt19937_64 wr(8);
    store.value("completion.gcn") = random_matrix(3, 4, wr);
    ad::Tape tape;
    const BoundParams bound(store, store.bind(tape, false));
    const OpVars vars = completion_vars(bound, g);
    std::vector<int> rows{0, 1, 2};
    const ad::Var x = evaluate_op(tape, ctx, OpKind::kGcnAgg, vars, rows, nullptr);
    return forward(tape, make_backbone_graph(g), bound, x, 2).value();
  };
  const Matrix h1 = hidden(g1);
  const Matrix h2 = hidden(g2);
  for (int i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(h1(static_cast<std::size_t>(i), j), h2(static_cast<std::size_t>(4 - i), j), 1e-12);
  for (std::size_t i = 5; i < 8; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(h1(i, j), h2(i, j), 1e-12);
}

}  // namespace
}  // namespace hetcomplete
