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

// Heterogeneous graph model.
//
// Global node ids concatenate node types in declaration order: type 0 owns
// ids [0, count_0), type 1 owns [count_0, count_0 + count_1), and so on.
// Every per-node matrix in the library is indexed by these ids, and every
// per-missing-node matrix by the position in NodePartition::missing.
//
// Edges are stored directed as given, but all aggregation treats them as
// undirected: build_graph materializes each relation as a deduplicated list
// of global-id pairs containing both directions.

#ifndef HETCOMPLETE_HETGRAPH_HPP_
#define HETCOMPLETE_HETGRAPH_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hetcomplete/matrix.hpp"
#include "json.hpp"

namespace hetcomplete {

struct NodeType {
  std::string name;
  int count = 0;
};

struct EdgeType {
  std::string name;
  std::string src_type;
  std::string dst_type;
  std::vector<std::pair<int, int>> pairs;  // local ids (src, dst)
};

struct GraphDescription {
  std::vector<NodeType> node_types;
  std::vector<EdgeType> edge_types;
  std::map<std::string, Matrix> attributes;  // node type -> count x dim
  std::string target_type;
};

class HeteroGraph {
 public:
  const std::vector<NodeType>& node_types() const { return node_types_; }
  const std::vector<EdgeType>& edge_types() const { return edge_types_; }
  const std::map<std::string, Matrix>& attributes() const { return attributes_; }
  const std::string& target_type() const { return target_type_; }

  int num_nodes() const { return num_nodes_; }
  int num_types() const { return static_cast<int>(node_types_.size()); }
  // -1 when absent.
  int type_index(const std::string& name) const;
  int edge_type_index(const std::string& name) const;
  int type_offset(int type) const { return offsets_[static_cast<std::size_t>(type)]; }
  int global_id(int type, int local) const { return offsets_[static_cast<std::size_t>(type)] + local; }
  int type_of(int global) const;
  bool has_attributes(int type) const;
  const Matrix* attributes_of(int type) const;

  // Undirected, deduplicated, self-pairs dropped; both (u, v) and (v, u)
  // present. Global ids. One list per edge type, sorted.
  const std::vector<std::pair<int, int>>& relation(int edge_type) const {
    return relations_[static_cast<std::size_t>(edge_type)];
  }

  // Stable content hash used to detect mismatched result files.
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  friend HeteroGraph build_graph(GraphDescription raw);

  std::vector<NodeType> node_types_;
  std::vector<EdgeType> edge_types_;
  std::map<std::string, Matrix> attributes_;
  std::string target_type_;
  std::vector<int> offsets_;
  int num_nodes_ = 0;
  std::vector<std::vector<std::pair<int, int>>> relations_;
  std::uint64_t fingerprint_ = 0;
};

// Validates and freezes a description. Throws ValidationError naming the
// offending record.
HeteroGraph build_graph(GraphDescription raw);
// Inverse of build_graph, for deriving modified graphs.
GraphDescription describe(const HeteroGraph& g);

struct NodePartition {
  std::vector<int> attributed;     // V+, ascending
  std::vector<int> missing;        // V-, canonical row order
  std::vector<int> missing_index;  // global id -> position in missing, or -1
  std::vector<int> type_of;        // global id -> type index
  std::vector<int> local_of;       // global id -> local id
};

NodePartition partition_nodes(const HeteroGraph& g);

// Homogenized undirected view over global ids.
struct AdjacencyView {
  int num_nodes = 0;
  std::vector<std::size_t> offsets;  // CSR row pointers
  std::vector<int> neighbors;        // sorted ascending per node
  std::vector<double> degree;        // self-loops excluded
  std::vector<double> degree_with_self_loop;  // degree + 1, empty unless requested
  std::size_t num_edges = 0;
  bool self_loops = false;

  std::span<const int> neighbors_of(int v) const {
    const auto b = offsets[static_cast<std::size_t>(v)];
    const auto e = offsets[static_cast<std::size_t>(v) + 1];
    return {neighbors.data() + b, e - b};
  }
  // 0/1 symmetric adjacency matrix without self-loops.
  std::shared_ptr<const CsrMatrix> binary_matrix() const;
};

AdjacencyView build_adjacency(const HeteroGraph& g, bool self_loops);
// Same construction from an explicit undirected edge list.
AdjacencyView adjacency_from_edges(int num_nodes, const std::vector<std::pair<int, int>>& edges, bool self_loops);

struct NormalizedAdjacency {
  // coefficients(v, u) = (deg(v) deg(u))^(-1/2); with self-loops the degrees
  // are d + 1 and the diagonal is populated.
  CsrMatrix coefficients;
  std::vector<int> isolated;  // nodes left with an empty row (warning, not fatal)
};

NormalizedAdjacency sym_norm_coefficients(const AdjacencyView& adj, bool self_loops);

// ---- dataset documents -----------------------------------------------------

enum class TaskKind { kNodeClassification, kLinkPrediction };

struct Labels {
  std::string type;
  int num_classes = 0;
  std::vector<std::pair<int, int>> entries;  // (local id, class)
};

struct TargetSpec {
  TaskKind task = TaskKind::kNodeClassification;
  std::string type;       // node classification
  std::string edge_type;  // link prediction
};

struct Dataset {
  HeteroGraph graph;
  std::optional<Labels> labels;
  TargetSpec target;
};

Dataset parse_dataset(const nlohmann::json& doc);
nlohmann::json dataset_to_json(const Dataset& ds);

}  // namespace hetcomplete

#endif  // HETCOMPLETE_HETGRAPH_HPP_
