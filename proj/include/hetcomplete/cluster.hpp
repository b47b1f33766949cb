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


// Soft modularity clustering.
//
//   C      = row_softmax(H theta)                      (|V| x M)
//   L_GmoC = -Tr(C^T B C) / 2|E| + sqrt(M)/|V| * || sum_i C_i ||_F
//   B      = A - d d^T / 2|E|
//
// B is never formed: Tr(C^T B C) = sum_i <C_i, (A C)_i> - ||d^T C||^2 / 2|E|.

#ifndef HETCOMPLETE_CLUSTER_HPP_
#define HETCOMPLETE_CLUSTER_HPP_

#include <memory>
#include <vector>

#include "hetcomplete/autodiff.hpp"
#include "hetcomplete/hetgraph.hpp"

namespace hetcomplete {

ad::Var assign_clusters(ad::Var hidden, ad::Var theta);

// Structural constants of the graph the loss is evaluated on.
struct ModularityGraph {
  std::shared_ptr<const CsrMatrix> adjacency;  // symmetric 0/1
  std::vector<double> degrees;
  double two_m = 0.0;
  std::size_t num_nodes = 0;
};

// Throws ValidationError when the graph has no edges.
ModularityGraph make_modularity_graph(const AdjacencyView& adj);
// Induced subgraph on `nodes` (rows of C follow the order of `nodes`).
ModularityGraph make_modularity_graph(const AdjacencyView& adj, const std::vector<int>& nodes);

struct ModularityLoss {
  ad::Var total;
  ad::Var modularity;  // -Tr(C^T B C) / 2|E|
  ad::Var collapse;    // sqrt(M)/|V| * ||sum_i C_i||_F
};

ModularityLoss modularity_loss(ad::Var c, const ModularityGraph& mg);

struct ClusterMap {
  std::vector<int> cluster;    // per missing node
  std::vector<int> histogram;  // size M
  bool collapsed = false;      // every missing node in one cluster
};

// Argmax of the rows of C belonging to `missing` (global ids), lowest index on
// ties. row_of maps a global id to its row in C (identity when C spans V).
ClusterMap hard_assignment(const Matrix& c, const std::vector<int>& missing, const std::vector<int>& row_of = {});

}  // namespace hetcomplete

#endif  // HETCOMPLETE_CLUSTER_HPP_
