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


#include "hetcomplete/cluster.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hetcomplete/errors.hpp"
#include "test_support.hpp"

namespace hetcomplete {
namespace {

using testing::random_matrix;

using testing::one_hot_rows;

ModularityLoss loss_of(const Matrix& c, const ModularityGraph& mg, ad::Tape& tape) {
  return modularity_loss(tape.constant(c), mg);
}

TEST(Modularity, TraceFormMatchesPairwiseSumOnRandomGraphs) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + static_cast<int>(rng() % 46);
    const int m = 2 + static_cast<int>(rng() % 4);
    const auto edges = testing::random_graph(n, 0.15, rng);
    std::vector<int> label(static_cast<std::size_t>(n));
    for (int& l : label) l = static_cast<int>(rng() % static_cast<std::uint64_t>(m));
    const ModularityGraph mg = make_modularity_graph(adjacency_from_edges(n, edges, false));
    ad::Tape tape;
    const double relaxed = loss_of(one_hot_rows(label, m), mg, tape).modularity.scalar();
    EXPECT_NEAR(relaxed, -testing::modularity_pairwise(n, edges, label), 1e-9) << "trial " << trial;
  }
}

TEST(Modularity, TwoDisconnectedTriangles) {
  const testing::Edges e{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
  const ModularityGraph mg = make_modularity_graph(adjacency_from_edges(6, e, false));
  ad::Tape tape;
  EXPECT_NEAR(loss_of(one_hot_rows({0, 0, 0, 1, 1, 1}, 2), mg, tape).modularity.scalar(), -0.5, 1e-9);
}

TEST(Collapse, UniformIsOneAndCollapsedIsSqrtM) {
  std::mt19937_64 rng(2);
  const int n = 12;
  const ModularityGraph mg = make_modularity_graph(adjacency_from_edges(n, testing::random_graph(n, 0.3, rng), false));
  for (int m : {2, 3, 5}) {
    ad::Tape tape;
    EXPECT_DOUBLE_EQ(loss_of(Matrix(n, static_cast<std::size_t>(m), 1.0 / m), mg, tape).collapse.scalar(), 1.0);
    EXPECT_NEAR(loss_of(one_hot_rows(std::vector<int>(n, 0), m), mg, tape).collapse.scalar(), std::sqrt(m), 1e-12);
  }
}

TEST(Modularity, TotalIsModularityPlusCollapse) {
  std::mt19937_64 rng(3);
  const ModularityGraph mg = make_modularity_graph(adjacency_from_edges(8, testing::random_graph(8, 0.4, rng), false));
  ad::Tape tape;
  const ModularityLoss l = loss_of(random_matrix(8, 3, rng, 0.0, 1.0), mg, tape);
  EXPECT_NEAR(l.total.scalar(), l.modularity.scalar() + l.collapse.scalar(), 1e-15);
}

TEST(Modularity, GradientThroughSoftAssignment) {
  std::mt19937_64 rng(4);
  const int n = 15;
  const ModularityGraph mg = make_modularity_graph(adjacency_from_edges(n, testing::random_graph(n, 0.25, rng), false));
  const Matrix h = random_matrix(n, 4, rng);
  const double err = ad::finite_diff_check(
      [&](ad::Tape& tape, ad::Var theta) { return modularity_loss(assign_clusters(tape.constant(h), theta), mg).total; },
      random_matrix(4, 3, rng));
  EXPECT_LT(err, 1e-5);
  const Matrix theta = random_matrix(4, 3, rng);
  const double err_h = ad::finite_diff_check(
      [&](ad::Tape& tape, ad::Var hv) { return modularity_loss(assign_clusters(hv, tape.constant(theta)), mg).total; }, h);
  EXPECT_LT(err_h, 1e-5);
}

TEST(Modularity, SubgraphOnSelectedNodes) {
  // path 0-1-2-3; keep {1, 2, 3}
  const auto adj = adjacency_from_edges(4, {{0, 1}, {1, 2}, {2, 3}}, false);
  const ModularityGraph mg = make_modularity_graph(adj, {1, 2, 3});
  EXPECT_EQ(mg.num_nodes, 3u);
  EXPECT_DOUBLE_EQ(mg.two_m, 4.0);
  EXPECT_EQ(mg.degrees, (std::vector<double>{1.0, 2.0, 1.0}));
}

TEST(Modularity, EdgelessGraphIsRejected) {
  EXPECT_THROW(make_modularity_graph(adjacency_from_edges(3, {}, false)), ValidationError);
}

TEST(HardAssignment, ArgmaxWithLowestIndexTies) {
  const Matrix c = Matrix::from_rows({{0.2, 0.8}, {0.5, 0.5}, {0.9, 0.1}, {0.3, 0.7}});
  const ClusterMap map = hard_assignment(c, {1, 3});
  EXPECT_EQ(map.cluster, (std::vector<int>{0, 1}));
  EXPECT_EQ(map.histogram, (std::vector<int>{1, 1}));
  EXPECT_FALSE(map.collapsed);
  const ClusterMap all = hard_assignment(c, {0, 3});
  EXPECT_TRUE(all.collapsed);
}

TEST(HardAssignment, RowMapSelectsRows) {
  const Matrix c = Matrix::from_rows({{0.2, 0.8}, {0.9, 0.1}});
  std::vector<int> row_of{-1, -1, 1, 0};
  EXPECT_EQ(hard_assignment(c, {2, 3}, row_of).cluster, (std::vector<int>{0, 1}));
}

}  // namespace
}  // namespace hetcomplete
