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


#include "hetcomplete/hetgraph.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "hetcomplete/errors.hpp"

namespace hetcomplete {
namespace {

GraphDescription schema_psa() {
  GraphDescription d;
  d.node_types = {{"P", 3}, {"A", 2}, {"S", 1}};
  d.attributes.emplace("P", Matrix(3, 2, 1.0));
  d.edge_types = {{"pa", "P", "A", {{0, 0}, {1, 0}, {2, 1}, {2, 1}}}, {"ps", "P", "S", {{0, 0}}}};
  d.target_type = "P";
  return d;
}

TEST(BuildGraph, GlobalIdsAndRelations) {
  const HeteroGraph g = build_graph(schema_psa());
  EXPECT_EQ(g.num_nodes(), 6);
  EXPECT_EQ(g.global_id(1, 1), 4);
  EXPECT_EQ(g.type_of(5), 2);
  EXPECT_EQ(g.type_of(2), 0);
  // duplicate (2,1) collapses; both directions stored
  EXPECT_EQ(g.relation(0).size(), 6u);
}

TEST(BuildGraph, ImdbLikeSchemaHasActorsAndDirectorsMissing) {
  GraphDescription d;
  d.node_types = {{"movie", 4}, {"actor", 3}, {"director", 2}};
  d.attributes.emplace("movie", Matrix(4, 5, 0.1));
  d.edge_types = {{"ma", "movie", "actor", {{0, 0}, {1, 2}}}, {"md", "movie", "director", {{3, 1}}}};
  const NodePartition p = partition_nodes(build_graph(d));
  EXPECT_EQ(p.attributed.size(), 4u);
  EXPECT_EQ(p.missing, (std::vector<int>{4, 5, 6, 7, 8}));
}

TEST(BuildGraph, SingleAttributedNodeIsValidWithEmptyMissingSet) {
  GraphDescription d;
  d.node_types = {{"only", 1}};
  d.attributes.emplace("only", Matrix(1, 1, 1.0));
  EXPECT_TRUE(partition_nodes(build_graph(d)).missing.empty());
}

TEST(BuildGraph, RejectsBadRecords) {
  GraphDescription d = schema_psa();
  d.edge_types[0].pairs.push_back({0, 2});
  try {
    build_graph(d);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'pa'"), std::string::npos);
  }
  d = schema_psa();
  d.node_types.push_back({"A", 1});
  EXPECT_THROW(build_graph(d), ValidationError);
  d = schema_psa();
  d.attributes["P"] = Matrix(2, 2);
  EXPECT_THROW(build_graph(d), ValidationError);
}

TEST(Partition, CountsAndOrder) {
  const NodePartition p = partition_nodes(build_graph(schema_psa()));
  EXPECT_EQ(p.attributed.size(), 3u);
  EXPECT_EQ(p.missing, (std::vector<int>{3, 4, 5}));
  EXPECT_EQ(p.missing_index[4], 1);
  EXPECT_EQ(p.missing_index[0], -1);
  EXPECT_EQ(p.local_of[4], 1);
}

TEST(Adjacency, TrianglePathStar) {
  const AdjacencyView tri = adjacency_from_edges(3, {{0, 1}, {1, 2}, {2, 0}}, false);
  EXPECT_EQ(tri.degree, (std::vector<double>{2, 2, 2}));
  EXPECT_EQ(tri.num_edges, 3u);
  const AdjacencyView path = adjacency_from_edges(3, {{0, 1}, {1, 2}}, true);
  EXPECT_EQ(path.degree, (std::vector<double>{1, 2, 1}));
  EXPECT_EQ(path.degree_with_self_loop, (std::vector<double>{2, 3, 2}));
  const AdjacencyView star = adjacency_from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}, false);
  EXPECT_EQ(star.degree[0], 4.0);
}

TEST(Adjacency, DegreeSumAndSymmetry) {
  const AdjacencyView a = build_adjacency(build_graph(schema_psa()), false);
  double total = 0;
  for (double d : a.degree) total += d;
  EXPECT_EQ(total, 2.0 * static_cast<double>(a.num_edges));
  for (int v = 0; v < a.num_nodes; ++v)
    for (int u : a.neighbors_of(v)) {
      const auto nb = a.neighbors_of(u);
      EXPECT_TRUE(std::find(nb.begin(), nb.end(), v) != nb.end());
    }
}

TEST(SymNorm, CoefficientsMatchHandValues) {
  const auto pair = sym_norm_coefficients(adjacency_from_edges(2, {{0, 1}}, false), false);
  EXPECT_DOUBLE_EQ(pair.coefficients.to_dense()(0, 1), 1.0);
  const auto star = sym_norm_coefficients(adjacency_from_edges(3, {{0, 1}, {0, 2}}, false), false);
  const Matrix s = star.coefficients.to_dense();
  EXPECT_NEAR(s(0, 1), 0.70710678118654752, 1e-15);
  EXPECT_EQ(s(0, 1), s(1, 0));
  const auto iso = sym_norm_coefficients(adjacency_from_edges(1, {}, true), true);
  EXPECT_DOUBLE_EQ(iso.coefficients.to_dense()(0, 0), 1.0);
  const auto iso_off = sym_norm_coefficients(adjacency_from_edges(2, {}, false), false);
  EXPECT_EQ(iso_off.isolated, (std::vector<int>{0, 1}));
  EXPECT_EQ(iso_off.coefficients.nnz(), 0u);
}

TEST(Dataset, JsonRoundTrip) {
  Dataset ds{build_graph(schema_psa()), Labels{"P", 2, {{0, 1}, {2, 0}}}, TargetSpec{}};
  ds.target.type = "P";
  const nlohmann::json j = dataset_to_json(ds);
  const Dataset back = parse_dataset(j);
  EXPECT_EQ(back.graph.fingerprint(), ds.graph.fingerprint());
  EXPECT_EQ(back.labels->entries, ds.labels->entries);
  EXPECT_EQ(dataset_to_json(back).dump(), j.dump());
}

TEST(Dataset, MalformedDocumentIsValidationError) {
  EXPECT_THROW(parse_dataset(nlohmann::json::parse(R"({"node_types": 3})")), ValidationError);
}

}  // namespace
}  // namespace hetcomplete
