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

#include <cmath>

#include "hetcomplete/errors.hpp"

namespace hetcomplete {

ad::Var assign_clusters(ad::Var hidden, ad::Var theta) { return ad::row_softmax(ad::matmul(hidden, theta)); }

ModularityGraph make_modularity_graph(const AdjacencyView& adj) {
  if (adj.num_edges == 0) throw ValidationError("modularity is undefined on a graph without edges");
  ModularityGraph mg;
  mg.adjacency = adj.binary_matrix();
  mg.degrees = adj.degree;
  for (double d : mg.degrees) mg.two_m += d;
  mg.num_nodes = static_cast<std::size_t>(adj.num_nodes);
  return mg;
}

ModularityGraph make_modularity_graph(const AdjacencyView& adj, const std::vector<int>& nodes) {
  std::vector<int> pos(static_cast<std::size_t>(adj.num_nodes), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) pos[static_cast<std::size_t>(nodes[i])] = static_cast<int>(i);
  std::vector<std::pair<int, int>> edges;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (int u : adj.neighbors_of(nodes[i])) {
      const int j = pos[static_cast<std::size_t>(u)];
      if (j > static_cast<int>(i)) edges.emplace_back(static_cast<int>(i), j);
    }
  return make_modularity_graph(adjacency_from_edges(static_cast<int>(nodes.size()), edges, false));
}

ModularityLoss modularity_loss(ad::Var c, const ModularityGraph& mg) {
  HC_REQUIRE(mg.two_m > 0.0, "modularity_loss: graph has no edges");
  HC_REQUIRE(c.rows() == mg.num_nodes, "modularity_loss: C has " + std::to_string(c.rows()) + " rows, graph has " +
                                           std::to_string(mg.num_nodes) + " nodes");
  const double m_clusters = static_cast<double>(c.cols());
  ModularityLoss out;
  out.modularity = ad::scale(ad::trace_quadratic_form(c, mg.adjacency, mg.degrees, mg.two_m), -1.0 / mg.two_m);
  out.collapse =
      ad::scale(ad::frobenius_norm(ad::column_sums(c)), std::sqrt(m_clusters) / static_cast<double>(mg.num_nodes));
  out.total = ad::add(out.modularity, out.collapse);
  return out;
}

ClusterMap hard_assignment(const Matrix& c, const std::vector<int>& missing, const std::vector<int>& row_of) {
  ClusterMap map;
  map.histogram.assign(c.cols(), 0);
  map.cluster.reserve(missing.size());
  for (int v : missing) {
    const int r = row_of.empty() ? v : row_of[static_cast<std::size_t>(v)];
    HC_REQUIRE(r >= 0 && static_cast<std::size_t>(r) < c.rows(), "hard_assignment: node has no row in C");
    auto row = c.row(static_cast<std::size_t>(r));
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
      if (row[j] > row[best]) best = j;
    map.cluster.push_back(static_cast<int>(best));
    ++map.histogram[best];
  }
  int nonempty = 0;
  for (int h : map.histogram) nonempty += h > 0 ? 1 : 0;
  map.collapsed = !missing.empty() && nonempty <= 1 && c.cols() > 1;
  return map;
}

}  // namespace hetcomplete
