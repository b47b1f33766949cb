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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <sstream>

#include "hetcomplete/errors.hpp"

namespace hetcomplete {

namespace {

class Fnv1a {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= c[i];
      h_ *= 1099511628211ULL;
    }
  }
  void str(const std::string& s) {
    const std::uint64_t n = s.size();
    bytes(&n, sizeof n);
    bytes(s.data(), s.size());
  }
  template <typename T>
  void pod(T v) {
    bytes(&v, sizeof v);
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 14695981039346656037ULL;
};

[[noreturn]] void invalid(const std::string& msg) { throw ValidationError(msg); }

}  // namespace

int HeteroGraph::type_index(const std::string& name) const {
  for (std::size_t i = 0; i < node_types_.size(); ++i)
    if (node_types_[i].name == name) return static_cast<int>(i);
  return -1;
}

int HeteroGraph::edge_type_index(const std::string& name) const {
  for (std::size_t i = 0; i < edge_types_.size(); ++i)
    if (edge_types_[i].name == name) return static_cast<int>(i);
  return -1;
}

int HeteroGraph::type_of(int global) const {
  HC_REQUIRE(global >= 0 && global < num_nodes_, "type_of: node id out of range");
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end() - 1, global);
  return static_cast<int>(it - offsets_.begin()) - 1;
}

bool HeteroGraph::has_attributes(int type) const {
  return attributes_.count(node_types_[static_cast<std::size_t>(type)].name) != 0;
}

const Matrix* HeteroGraph::attributes_of(int type) const {
  const auto it = attributes_.find(node_types_[static_cast<std::size_t>(type)].name);
  return it == attributes_.end() ? nullptr : &it->second;
}

HeteroGraph build_graph(GraphDescription raw) {
  HeteroGraph g;
  std::set<std::string> names;
  g.offsets_.push_back(0);
  for (std::size_t i = 0; i < raw.node_types.size(); ++i) {
    const NodeType& t = raw.node_types[i];
    if (t.name.empty()) invalid("node_types[" + std::to_string(i) + "]: empty type name");
    if (!names.insert(t.name).second) invalid("node_types[" + std::to_string(i) + "]: duplicate type name '" + t.name + "'");
    if (t.count < 0) invalid("node_types[" + std::to_string(i) + "] ('" + t.name + "'): negative count");
    g.offsets_.push_back(g.offsets_.back() + t.count);
  }
  if (raw.node_types.empty()) invalid("node_types: at least one node type is required");
  g.node_types_ = std::move(raw.node_types);
  g.num_nodes_ = g.offsets_.back();

  for (const auto& [name, m] : raw.attributes) {
    const int t = g.type_index(name);
    if (t < 0) invalid("attributes['" + name + "']: unknown node type");
    const int count = g.node_types_[static_cast<std::size_t>(t)].count;
    if (static_cast<int>(m.rows()) != count)
      invalid("attributes['" + name + "']: " + std::to_string(m.rows()) + " rows but type has " +
              std::to_string(count) + " nodes");
    if (m.cols() == 0) invalid("attributes['" + name + "']: zero attribute dimension");
    if (!all_finite(m)) invalid("attributes['" + name + "']: non-finite value");
  }
  if (raw.attributes.empty()) invalid("attributes: at least one node type must carry attributes");
  g.attributes_ = std::move(raw.attributes);

  std::set<std::string> enames;
  for (std::size_t e = 0; e < raw.edge_types.size(); ++e) {
    const EdgeType& et = raw.edge_types[e];
    const std::string where = "edges[" + std::to_string(e) + "] ('" + et.name + "')";
    if (et.name.empty()) invalid("edges[" + std::to_string(e) + "]: empty edge type name");
    if (!enames.insert(et.name).second) invalid(where + ": duplicate edge type name");
    const int st = g.type_index(et.src_type);
    const int dt = g.type_index(et.dst_type);
    if (st < 0) invalid(where + ": unknown src_type '" + et.src_type + "'");
    if (dt < 0) invalid(where + ": unknown dst_type '" + et.dst_type + "'");
    const int sc = g.node_types_[static_cast<std::size_t>(st)].count;
    const int dc = g.node_types_[static_cast<std::size_t>(dt)].count;
    for (std::size_t k = 0; k < et.pairs.size(); ++k) {
      const auto [s, d] = et.pairs[k];
      if (s < 0 || s >= sc)
        invalid(where + ": pair " + std::to_string(k) + " src index " + std::to_string(s) + " out of range for type '" +
                et.src_type + "' (count " + std::to_string(sc) + ")");
      if (d < 0 || d >= dc)
        invalid(where + ": pair " + std::to_string(k) + " dst index " + std::to_string(d) + " out of range for type '" +
                et.dst_type + "' (count " + std::to_string(dc) + ")");
    }
  }
  g.edge_types_ = std::move(raw.edge_types);

  g.relations_.resize(g.edge_types_.size());
  for (std::size_t e = 0; e < g.edge_types_.size(); ++e) {
    const EdgeType& et = g.edge_types_[e];
    const int st = g.type_index(et.src_type);
    const int dt = g.type_index(et.dst_type);
    auto& rel = g.relations_[e];
    rel.reserve(et.pairs.size() * 2);
    for (const auto& [s, d] : et.pairs) {
      const int u = g.global_id(st, s);
      const int v = g.global_id(dt, d);
      if (u == v) continue;
      rel.emplace_back(u, v);
      rel.emplace_back(v, u);
    }
    std::sort(rel.begin(), rel.end());
    rel.erase(std::unique(rel.begin(), rel.end()), rel.end());
  }

  if (!raw.target_type.empty() && g.type_index(raw.target_type) < 0)
    invalid("target: unknown node type '" + raw.target_type + "'");
  g.target_type_ = std::move(raw.target_type);

  Fnv1a h;
  for (const auto& t : g.node_types_) {
    h.str(t.name);
    h.pod(t.count);
  }
  for (std::size_t e = 0; e < g.edge_types_.size(); ++e) {
    h.str(g.edge_types_[e].name);
    for (const auto& [u, v] : g.relations_[e]) {
      h.pod(u);
      h.pod(v);
    }
  }
  for (const auto& [name, m] : g.attributes_) {
    h.str(name);
    h.pod(m.rows());
    h.pod(m.cols());
    h.bytes(m.values().data(), m.values().size() * sizeof(double));
  }
  h.str(g.target_type_);
  g.fingerprint_ = h.value();
  return g;
}

GraphDescription describe(const HeteroGraph& g) {
  GraphDescription d;
  d.node_types = g.node_types();
  d.edge_types = g.edge_types();
  d.attributes = g.attributes();
  d.target_type = g.target_type();
  return d;
}

NodePartition partition_nodes(const HeteroGraph& g) {
  NodePartition p;
  const int n = g.num_nodes();
  p.missing_index.assign(static_cast<std::size_t>(n), -1);
  p.type_of.resize(static_cast<std::size_t>(n));
  p.local_of.resize(static_cast<std::size_t>(n));
  for (int t = 0; t < g.num_types(); ++t) {
    const bool attributed = g.has_attributes(t);
    for (int l = 0; l < g.node_types()[static_cast<std::size_t>(t)].count; ++l) {
      const int v = g.global_id(t, l);
      p.type_of[static_cast<std::size_t>(v)] = t;
      p.local_of[static_cast<std::size_t>(v)] = l;
      if (attributed) {
        p.attributed.push_back(v);
      } else {
        p.missing_index[static_cast<std::size_t>(v)] = static_cast<int>(p.missing.size());
        p.missing.push_back(v);
      }
    }
  }
  return p;
}

AdjacencyView adjacency_from_edges(int num_nodes, const std::vector<std::pair<int, int>>& edges, bool self_loops) {
  std::vector<std::vector<int>> lists(static_cast<std::size_t>(num_nodes));
  for (const auto& [u, v] : edges) {
    HC_REQUIRE(u >= 0 && u < num_nodes && v >= 0 && v < num_nodes, "adjacency_from_edges: node id out of range");
    if (u == v) continue;
    lists[static_cast<std::size_t>(u)].push_back(v);
    lists[static_cast<std::size_t>(v)].push_back(u);
  }
  AdjacencyView a;
  a.num_nodes = num_nodes;
  a.self_loops = self_loops;
  a.offsets.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  a.degree.assign(static_cast<std::size_t>(num_nodes), 0.0);
  std::size_t twice_edges = 0;
  for (int v = 0; v < num_nodes; ++v) {
    auto& l = lists[static_cast<std::size_t>(v)];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    a.neighbors.insert(a.neighbors.end(), l.begin(), l.end());
    a.offsets[static_cast<std::size_t>(v) + 1] = a.neighbors.size();
    a.degree[static_cast<std::size_t>(v)] = static_cast<double>(l.size());
    twice_edges += l.size();
  }
  a.num_edges = twice_edges / 2;
  if (self_loops) {
    a.degree_with_self_loop = a.degree;
    for (double& d : a.degree_with_self_loop) d += 1.0;
  }
  return a;
}

AdjacencyView build_adjacency(const HeteroGraph& g, bool self_loops) {
  std::vector<std::pair<int, int>> all;
  for (int e = 0; e < static_cast<int>(g.edge_types().size()); ++e)
    for (const auto& [u, v] : g.relation(e))
      if (u < v) all.emplace_back(u, v);
  return adjacency_from_edges(g.num_nodes(), all, self_loops);
}

std::shared_ptr<const CsrMatrix> AdjacencyView::binary_matrix() const {
  auto m = std::make_shared<CsrMatrix>();
  m->rows = m->cols = static_cast<std::size_t>(num_nodes);
  m->row_ptr = offsets;
  m->col = neighbors;
  m->val.assign(neighbors.size(), 1.0);
  return m;
}

NormalizedAdjacency sym_norm_coefficients(const AdjacencyView& adj, bool self_loops) {
  NormalizedAdjacency out;
  const std::size_t n = static_cast<std::size_t>(adj.num_nodes);
  std::vector<double> deg = adj.degree;
  if (self_loops)
    for (double& d : deg) d += 1.0;
  CsrMatrix& c = out.coefficients;
  c.rows = c.cols = n;
  c.row_ptr.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    const auto nb = adj.neighbors_of(static_cast<int>(v));
    bool placed_self = !self_loops;
    for (int u : nb) {
      if (!placed_self && static_cast<std::size_t>(u) > v) {
        c.col.push_back(static_cast<int>(v));
        c.val.push_back(1.0 / deg[v]);
        placed_self = true;
      }
      c.col.push_back(u);
      c.val.push_back(1.0 / std::sqrt(deg[v] * deg[static_cast<std::size_t>(u)]));
    }
    if (!placed_self) {
      c.col.push_back(static_cast<int>(v));
      c.val.push_back(1.0 / deg[v]);
    }
    if (nb.empty() && !self_loops) out.isolated.push_back(static_cast<int>(v));
    c.row_ptr[v + 1] = c.col.size();
  }
  return out;
}

// ---- dataset documents -----------------------------------------------------

namespace {

Matrix parse_attribute_matrix(const std::string& name, const nlohmann::json& j) {
  if (!j.is_object()) invalid("attributes['" + name + "']: expected an object with dim and data");
  if (!j.contains("dim")) invalid("attributes['" + name + "']: missing 'dim'");
  const long dim = j.at("dim").get<long>();
  if (dim <= 0) invalid("attributes['" + name + "']: dim must be positive");
  std::vector<double> values;
  if (j.contains("data")) {
    values = j.at("data").get<std::vector<double>>();
  } else if (j.contains("rows")) {
    for (const auto& r : j.at("rows")) {
      if (static_cast<long>(r.size()) != dim) invalid("attributes['" + name + "']: row length differs from dim");
      for (const auto& v : r) values.push_back(v.get<double>());
    }
  } else {
    invalid("attributes['" + name + "']: missing 'data'");
  }
  if (values.size() % static_cast<std::size_t>(dim) != 0)
    invalid("attributes['" + name + "']: " + std::to_string(values.size()) + " values not divisible by dim " +
            std::to_string(dim));
  const std::size_t rows = values.size() / static_cast<std::size_t>(dim);
  return Matrix(rows, static_cast<std::size_t>(dim), std::move(values));
}

}  // namespace

Dataset parse_dataset(const nlohmann::json& doc) {
  try {
    GraphDescription raw;
    for (const auto& t : doc.at("node_types")) raw.node_types.push_back({t.at("name").get<std::string>(), t.at("count").get<int>()});
    if (doc.contains("attributes"))
      for (const auto& [name, j] : doc.at("attributes").items()) raw.attributes.emplace(name, parse_attribute_matrix(name, j));
    if (doc.contains("edges")) {
      for (const auto& e : doc.at("edges")) {
        EdgeType et;
        et.name = e.at("etype").get<std::string>();
        et.src_type = e.at("src_type").get<std::string>();
        et.dst_type = e.at("dst_type").get<std::string>();
        for (const auto& p : e.at("pairs")) {
          if (!p.is_array() || p.size() != 2) invalid("edges ('" + et.name + "'): each pair must be [src, dst]");
          et.pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
        }
        raw.edge_types.push_back(std::move(et));
      }
    }
    TargetSpec target;
    if (doc.contains("target")) {
      const auto& tj = doc.at("target");
      const std::string task = tj.at("task").get<std::string>();
      if (task == "node_classification") {
        target.task = TaskKind::kNodeClassification;
        target.type = tj.at("type").get<std::string>();
      } else if (task == "link_prediction") {
        target.task = TaskKind::kLinkPrediction;
        target.edge_type = tj.at("edge_type").get<std::string>();
      } else {
        invalid("target.task: unknown task '" + task + "'");
      }
    }
    if (target.task == TaskKind::kNodeClassification) {
      raw.target_type = target.type;
    } else {
      for (const auto& et : raw.edge_types)
        if (et.name == target.edge_type) raw.target_type = et.src_type;
      if (raw.target_type.empty()) invalid("target.edge_type: unknown edge type '" + target.edge_type + "'");
    }
    Dataset ds{build_graph(std::move(raw)), std::nullopt, target};

    if (doc.contains("labels")) {
      const auto& lj = doc.at("labels");
      Labels labels;
      labels.type = lj.at("type").get<std::string>();
      labels.num_classes = lj.at("num_classes").get<int>();
      const int t = ds.graph.type_index(labels.type);
      if (t < 0) invalid("labels.type: unknown node type '" + labels.type + "'");
      if (labels.num_classes < 2) invalid("labels.num_classes: need at least 2 classes");
      const int count = ds.graph.node_types()[static_cast<std::size_t>(t)].count;
      std::set<int> seen;
      for (std::size_t i = 0; i < lj.at("entries").size(); ++i) {
        const auto& e = lj.at("entries")[i];
        const int local = e.at(0).get<int>();
        const int cls = e.at(1).get<int>();
        if (local < 0 || local >= count) invalid("labels.entries[" + std::to_string(i) + "]: node index out of range");
        if (cls < 0 || cls >= labels.num_classes) invalid("labels.entries[" + std::to_string(i) + "]: class out of range");
        if (!seen.insert(local).second) invalid("labels.entries[" + std::to_string(i) + "]: duplicate node");
        labels.entries.emplace_back(local, cls);
      }
      ds.labels = std::move(labels);
    }
    if (target.task == TaskKind::kNodeClassification && !target.type.empty()) {
      if (!ds.labels) invalid("labels: node classification target requires labels");
      if (ds.labels->type != target.type) invalid("labels.type: differs from target.type");
    }
    return ds;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("graph document: ") + e.what());
  }
}

nlohmann::json dataset_to_json(const Dataset& ds) {
  nlohmann::json doc;
  const HeteroGraph& g = ds.graph;
  doc["node_types"] = nlohmann::json::array();
  for (const auto& t : g.node_types()) doc["node_types"].push_back({{"name", t.name}, {"count", t.count}});
  doc["attributes"] = nlohmann::json::object();
  for (const auto& [name, m] : g.attributes()) doc["attributes"][name] = {{"dim", m.cols()}, {"data", m.values()}};
  doc["edges"] = nlohmann::json::array();
  for (const auto& e : g.edge_types()) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [s, d] : e.pairs) pairs.push_back({s, d});
    doc["edges"].push_back({{"etype", e.name}, {"src_type", e.src_type}, {"dst_type", e.dst_type}, {"pairs", pairs}});
  }
  if (ds.labels) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [l, c] : ds.labels->entries) entries.push_back({l, c});
    doc["labels"] = {{"type", ds.labels->type}, {"num_classes", ds.labels->num_classes}, {"entries", entries}};
  }
  if (ds.target.task == TaskKind::kNodeClassification)
    doc["target"] = {{"task", "node_classification"}, {"type", ds.target.type}};
  else
    doc["target"] = {{"task", "link_prediction"}, {"edge_type", ds.target.edge_type}};
  return doc;
}

}  // namespace hetcomplete
