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


#include "hetcomplete/planted.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include "hetcomplete/errors.hpp"
#include "hetcomplete/evaluation.hpp"

namespace hetcomplete {

void validate(const PlantedSpec& s) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError("planted spec: " + what);
  };
  need(s.num_classes >= 2, "num_classes must be >= 2");
  need(!s.groups.empty(), "at least one group is required");
  int total = 0;
  for (std::size_t g = 0; g < s.groups.size(); ++g) {
    const auto& gr = s.groups[g];
    const std::string where = "groups[" + std::to_string(g) + "]: ";
    need(gr.entities >= s.num_classes, where + "needs at least one entity per class");
    need(gr.items_per_entity >= 1, where + "items_per_entity must be >= 1");
    need(gr.op != OpKind::kOneHot || gr.items_per_entity >= 2, where + "onehot groups need >= 2 items per entity");
    total += gr.entities;
  }
  need(total <= 500, "more than 500 entities");
  need(s.sinks >= 1, "sinks must be >= 1");
  need(s.relays_per_entity >= 1 && s.anchors_per_class >= 1, "bad relay wiring counts");
  need(s.leaf_amplitude > 0.0, "leaf_amplitude must be positive");
  need(s.leaf_noise >= 0 && s.relay_noise >= 0 && s.item_noise >= 0, "noise levels must be >= 0");
}

PlantedSpec planted_spec_from_json(const nlohmann::json& j) {
  PlantedSpec s;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "seed") s.seed = v.get<std::uint64_t>();
      else if (key == "num_classes") s.num_classes = v.get<int>();
      else if (key == "sinks") s.sinks = v.get<int>();
      else if (key == "leaf_amplitude") s.leaf_amplitude = v.get<double>();
      else if (key == "leaf_noise") s.leaf_noise = v.get<double>();
      else if (key == "relays_per_entity") s.relays_per_entity = v.get<int>();
      else if (key == "anchors_per_class") s.anchors_per_class = v.get<int>();
      else if (key == "anchor_amplitude") s.anchor_amplitude = v.get<double>();
      else if (key == "relay_noise") s.relay_noise = v.get<double>();
      else if (key == "item_noise") s.item_noise = v.get<double>();
      else if (key == "groups") {
        for (const auto& g : v) {
          PlantedGroup pg;
          const auto op = parse_op(g.at("op").get<std::string>());
          if (!op) throw ValidationError("planted spec: unknown operator '" + g.at("op").get<std::string>() + "'");
          pg.op = *op;
          if (g.contains("entities")) pg.entities = g.at("entities").get<int>();
          if (g.contains("items_per_entity")) pg.items_per_entity = g.at("items_per_entity").get<int>();
          s.groups.push_back(pg);
        }
      } else {
        throw ValidationError("planted spec: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("planted spec: ") + e.what());
  }
  validate(s);
  return s;
}

nlohmann::json planted_spec_to_json(const PlantedSpec& s) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : s.groups)
    groups.push_back({{"op", op_name(g.op)}, {"entities", g.entities}, {"items_per_entity", g.items_per_entity}});
  return {{"seed", s.seed},
          {"num_classes", s.num_classes},
          {"groups", groups},
          {"sinks", s.sinks},
          {"leaf_amplitude", s.leaf_amplitude},
          {"leaf_noise", s.leaf_noise},
          {"relays_per_entity", s.relays_per_entity},
          {"anchors_per_class", s.anchors_per_class},
          {"anchor_amplitude", s.anchor_amplitude},
          {"relay_noise", s.relay_noise},
          {"item_noise", s.item_noise}};
}

namespace {

class Builder {
 public:
  Builder(const PlantedSpec& s) : spec_(s), rng_(s.seed), dim_(static_cast<std::size_t>(s.num_classes)) {}

  int add_item(int cls) {
    std::vector<double> x(dim_, 0.0);
    for (double& v : x) v = spec_.item_noise * rng_.normal();
    items_.push_back(std::move(x));
    item_class_.push_back(cls);
    return static_cast<int>(items_.size()) - 1;
  }
  int add_feature() {
    std::vector<double> x(dim_, 0.0);
    features_.push_back(std::move(x));
    return static_cast<int>(features_.size()) - 1;
  }
  void noise_feature(int f, double sigma) {
    for (double& v : features_[static_cast<std::size_t>(f)]) v = sigma * rng_.normal();
  }
  void link_item_entity(int i, int e) { item_entity_.emplace_back(i, e); }
  void link_entity_feature(int e, int f) { entity_feature_.emplace_back(e, f); }
  void link_feature_feature(int a, int b) { feature_feature_.emplace_back(a, b); }
  void link_items(int a, int b) { item_item_.emplace_back(a, b); }

  const PlantedSpec& spec_;
  SplitMix rng_;
  std::size_t dim_;
  std::vector<std::vector<double>> items_, features_;
  std::vector<int> item_class_;
  std::vector<std::pair<int, int>> item_entity_, entity_feature_, feature_feature_, item_item_;
};

Matrix to_matrix(const std::vector<std::vector<double>>& rows, std::size_t dim) {
  Matrix m(rows.size(), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  return m;
}

}  // namespace

PlantedData gen_synthetic(const PlantedSpec& spec) {
  validate(spec);
  Builder b(spec);
  const int C = spec.num_classes;
  std::vector<int> group_of_entity;
  int entity_count = 0;

  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    const PlantedGroup& gr = spec.groups[g];
    const int first = entity_count;
    std::vector<int> cls(static_cast<std::size_t>(gr.entities));
    for (int i = 0; i < gr.entities; ++i) cls[static_cast<std::size_t>(i)] = i % C;
    entity_count += gr.entities;
    group_of_entity.insert(group_of_entity.end(), static_cast<std::size_t>(gr.entities), static_cast<int>(g));

    std::vector<std::pair<int, int>> region_items;  // (class, item)
    for (int i = 0; i < gr.entities; ++i)
      for (int k = 0; k < gr.items_per_entity; ++k) {
        const int item = b.add_item(cls[static_cast<std::size_t>(i)]);
        b.link_item_entity(item, first + i);
        region_items.emplace_back(cls[static_cast<std::size_t>(i)], item);
      }

    if (gr.op == OpKind::kMean || gr.op == OpKind::kGcnAgg) {
      std::vector<int> sinks;
      for (int k = 0; k < spec.sinks; ++k) sinks.push_back(b.add_feature());
      const double weak = spec.leaf_amplitude;
      const double strong = gr.op == OpKind::kMean ? weak * std::sqrt(1.0 + spec.sinks) : weak;
      for (int i = 0; i < gr.entities; ++i) {
        const int c = cls[static_cast<std::size_t>(i)];
        const int signal = b.add_feature();
        const int distractor = b.add_feature();
        b.noise_feature(signal, spec.leaf_noise);
        b.noise_feature(distractor, spec.leaf_noise);
        b.features_[static_cast<std::size_t>(signal)][static_cast<std::size_t>(c)] += strong;
        b.features_[static_cast<std::size_t>(distractor)][static_cast<std::size_t>((c + 1) % C)] += weak;
        b.link_entity_feature(first + i, signal);
        b.link_entity_feature(first + i, distractor);
        const int heavy = gr.op == OpKind::kMean ? signal : distractor;
        for (int sink : sinks) b.link_feature_feature(heavy, sink);
      }
    } else if (gr.op == OpKind::kPpnp) {
      std::vector<std::vector<int>> anchors(static_cast<std::size_t>(C));
      for (int c = 0; c < C; ++c)
        for (int a = 0; a < spec.anchors_per_class; ++a) {
          const int f = b.add_feature();
          b.noise_feature(f, spec.relay_noise);
          b.features_[static_cast<std::size_t>(f)][static_cast<std::size_t>(c)] = spec.anchor_amplitude;
          anchors[static_cast<std::size_t>(c)].push_back(f);
        }
      for (int i = 0; i < gr.entities; ++i) {
        const int c = cls[static_cast<std::size_t>(i)];
        for (int r = 0; r < spec.relays_per_entity; ++r) {
          const int relay = b.add_feature();
          b.noise_feature(relay, spec.relay_noise);
          b.link_entity_feature(first + i, relay);
          const auto& pool = anchors[static_cast<std::size_t>(c)];
          b.link_feature_feature(relay, pool[b.rng_.below(pool.size())]);
        }
      }
    }

    for (std::size_t k = region_items.size(); k > 1; --k) std::swap(region_items[k - 1], region_items[b.rng_.below(k)]);
    const std::size_t n = region_items.size();
    if (n == 2) b.link_items(region_items[0].second, region_items[1].second);
    if (n >= 3)
      for (std::size_t k = 0; k < n; ++k) b.link_items(region_items[k].second, region_items[(k + 1) % n].second);
  }

  GraphDescription d;
  d.node_types = {{"item", static_cast<int>(b.items_.size())},
                  {"entity", entity_count},
                  {"feature", static_cast<int>(b.features_.size())}};
  d.attributes.emplace("item", to_matrix(b.items_, b.dim_));
  d.attributes.emplace("feature", to_matrix(b.features_, b.dim_));
  d.edge_types = {{"item_entity", "item", "entity", b.item_entity_},
                  {"entity_feature", "entity", "feature", b.entity_feature_},
                  {"feature_feature", "feature", "feature", b.feature_feature_},
                  {"item_item", "item", "item", b.item_item_}};
  d.target_type = "item";

  Labels labels{"item", C, {}};
  for (std::size_t i = 0; i < b.item_class_.size(); ++i) labels.entries.emplace_back(static_cast<int>(i), b.item_class_[i]);
  PlantedData out{Dataset{build_graph(std::move(d)), std::move(labels), TargetSpec{TaskKind::kNodeClassification, "item", ""}},
                  {}};
  out.truth.fingerprint = out.dataset.graph.fingerprint();
  for (const auto& g : spec.groups) out.truth.group_ops.push_back(g.op);
  out.truth.group_of_missing = group_of_entity;
  return out;
}

namespace {

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << v;
  return os.str();
}

std::uint64_t unhex(const std::string& s) {
  std::size_t pos = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &pos, 16);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) throw ValidationError("bad graph fingerprint '" + s + "'");
  return v;
}

OpKind op_from_json(const nlohmann::json& j) {
  const auto op = parse_op(j.get<std::string>());
  if (!op) throw ValidationError("unknown operator '" + j.get<std::string>() + "'");
  return *op;
}

}  // namespace

nlohmann::json truth_to_json(const PlantedTruth& t) {
  nlohmann::json ops = nlohmann::json::array();
  for (OpKind op : t.group_ops) ops.push_back(op_name(op));
  return {{"format", "hetcomplete-planted-truth"},
          {"version", 1},
          {"graph_fingerprint", hex(t.fingerprint)},
          {"group_ops", ops},
          {"group_of_missing", t.group_of_missing}};
}

PlantedTruth truth_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "hetcomplete-planted-truth") throw ValidationError("not a planted-truth document");
    PlantedTruth t;
    t.fingerprint = unhex(j.at("graph_fingerprint").get<std::string>());
    for (const auto& o : j.at("group_ops")) t.group_ops.push_back(op_from_json(o));
    t.group_of_missing = j.at("group_of_missing").get<std::vector<int>>();
    for (int g : t.group_of_missing)
      if (g < 0 || g >= static_cast<int>(t.group_ops.size())) throw ValidationError("truth: group id out of range");
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("truth: ") + e.what());
  }
}

// ---- oracle ----------------------------------------------------------------------------------

std::string assignment_string(const std::vector<OpKind>& ops) {
  std::string s;
  for (std::size_t i = 0; i < ops.size(); ++i) s += (i ? "," : "") + std::string(op_name(ops[i]));
  return s;
}

OracleResult brute_force_search(const Problem& p, const std::vector<int>& cluster, int num_clusters, int workers,
                                double time_budget_s) {
  if (num_clusters < 1 || num_clusters > 6) throw ValidationError("oracle: cluster count must lie in [1, 6]");
  if (cluster.size() != p.num_missing()) throw ValidationError("oracle: cluster map does not cover the missing nodes");
  for (int c : cluster)
    if (c < 0 || c >= num_clusters) throw ValidationError("oracle: cluster id out of range");
  std::size_t total = 1;
  for (int m = 0; m < num_clusters; ++m) total *= kNumOps;

  OracleResult r;
  r.fingerprint = p.source_fingerprint;
  r.num_clusters = num_clusters;
  r.cluster = cluster;
  r.rows.resize(total);
  std::vector<char> done(total, 0);

  auto decode = [&](std::size_t idx) {
    std::vector<OpKind> ops(static_cast<std::size_t>(num_clusters));
    for (int m = num_clusters - 1; m >= 0; --m) {
      ops[static_cast<std::size_t>(m)] = static_cast<OpKind>(idx % kNumOps);
      idx /= kNumOps;
    }
    return ops;
  };

  const auto start = std::chrono::steady_clock::now();
  std::atomic<std::size_t> next{0};
  std::atomic<bool> out_of_time{false};
  auto work = [&] {
    for (;;) {
      if (time_budget_s > 0) {
        const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (el > time_budget_s) {
          out_of_time = true;
          return;
        }
      }
      const std::size_t idx = next.fetch_add(1);
      if (idx >= total) return;
      OracleRow row;
      row.ops = decode(idx);
      std::vector<OpKind> node_ops;
      node_ops.reserve(cluster.size());
      for (int c : cluster) node_ops.push_back(row.ops[static_cast<std::size_t>(c)]);
      const TrainResult t = train_fixed(p, node_ops, p.config.retrain_epochs, p.config.seed);
      row.val_loss = t.best_val_loss;
      row.best_epoch = t.best_epoch;
      row.val = t.val;
      row.test = t.test;
      r.rows[idx] = std::move(row);
      done[idx] = 1;
    }
  };
  int n_workers = workers > 0 ? workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  n_workers = std::min<int>(n_workers, static_cast<int>(total));
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  if (out_of_time) {
    r.complete = false;
    std::vector<OracleRow> kept;
    for (std::size_t i = 0; i < total; ++i)
      if (done[i]) kept.push_back(std::move(r.rows[i]));
    r.rows = std::move(kept);
  }
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    if (r.rows[i].val_loss < r.rows[r.argmin].val_loss) r.argmin = i;
  return r;
}

nlohmann::json oracle_to_json(const OracleResult& r, TaskKind task) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"assignment", assignment_string(row.ops)},
                    {"val_loss", row.val_loss},
                    {"best_epoch", row.best_epoch},
                    {"val", metrics_to_json(row.val, task)},
                    {"test", metrics_to_json(row.test, task)}});
  return {{"format", "hetcomplete-oracle-result"},
          {"version", 1},
          {"graph_fingerprint", hex(r.fingerprint)},
          {"task", task == TaskKind::kNodeClassification ? "node_classification" : "link_prediction"},
          {"num_clusters", r.num_clusters},
          {"cluster", r.cluster},
          {"complete", r.complete},
          {"argmin", r.rows.empty() ? nlohmann::json() : nlohmann::json(assignment_string(r.rows[r.argmin].ops))},
          {"rows", rows}};
}

OracleResult oracle_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "hetcomplete-oracle-result") throw ValidationError("not an oracle-result document");
    OracleResult r;
    r.fingerprint = unhex(j.at("graph_fingerprint").get<std::string>());
    r.num_clusters = j.at("num_clusters").get<int>();
    r.cluster = j.at("cluster").get<std::vector<int>>();
    r.complete = j.at("complete").get<bool>();
    const bool link = j.at("task").get<std::string>() == "link_prediction";
    auto metrics = [&](const nlohmann::json& m) {
      Metrics out;
      out.loss = m.at("loss").get<double>();
      if (link) {
        out.roc_auc = m.at("roc_auc").get<double>();
        out.mrr = m.at("mrr").get<double>();
      } else {
        out.macro_f1 = m.at("macro_f1").get<double>();
        out.micro_f1 = m.at("micro_f1").get<double>();
      }
      return out;
    };
    for (const auto& row : j.at("rows")) {
      OracleRow o;
      std::stringstream ss(row.at("assignment").get<std::string>());
      std::string tok;
      while (std::getline(ss, tok, ',')) o.ops.push_back(op_from_json(tok));
      o.val_loss = row.at("val_loss").get<double>();
      o.best_epoch = row.at("best_epoch").get<int>();
      o.val = metrics(row.at("val"));
      o.test = metrics(row.at("test"));
      r.rows.push_back(std::move(o));
    }
    for (std::size_t i = 1; i < r.rows.size(); ++i)
      if (r.rows[i].val_loss < r.rows[r.argmin].val_loss) r.argmin = i;
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("oracle result: ") + e.what());
  }
}

CompareReport compare(const nlohmann::json& search_doc, const nlohmann::json& oracle_doc) {
  const nlohmann::json& search = search_doc.contains("runs") ? search_doc.at("runs").at(0) : search_doc;
  if (search.value("format", "") != "hetcomplete-search-result") throw ValidationError("not a search-result document");
  const OracleResult oracle = oracle_from_json(oracle_doc);
  try {
    if (unhex(search.at("graph_fingerprint").get<std::string>()) != oracle.fingerprint)
      throw ValidationError("search and oracle results describe different graphs");
    if (oracle.rows.empty()) throw ValidationError("oracle result has no rows");
    const auto& nodes = search.at("node_ops");
    if (nodes.size() != oracle.cluster.size())
      throw ValidationError("search and oracle results cover different missing-node sets");

    CompareReport rep;
    const OracleRow& best = oracle.rows[oracle.argmin];
    rep.oracle_ops = best.ops;
    std::vector<std::array<int, kNumOps>> votes(static_cast<std::size_t>(oracle.num_clusters), std::array<int, kNumOps>{});
    int node_hits = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const OpKind op = op_from_json(nodes[i].at("op"));
      const auto c = static_cast<std::size_t>(oracle.cluster[i]);
      ++votes[c][static_cast<std::size_t>(op)];
      node_hits += op == best.ops[c] ? 1 : 0;
    }
    int cluster_hits = 0;
    for (std::size_t c = 0; c < votes.size(); ++c) {
      const auto it = std::max_element(votes[c].begin(), votes[c].end());
      rep.search_ops.push_back(static_cast<OpKind>(it - votes[c].begin()));
      cluster_hits += rep.search_ops.back() == best.ops[c] ? 1 : 0;
    }
    rep.match_rate = static_cast<double>(cluster_hits) / static_cast<double>(votes.size());
    rep.node_match_rate = nodes.empty() ? 1.0 : static_cast<double>(node_hits) / static_cast<double>(nodes.size());
    rep.search_val_loss = search.at("retrain").at("val").at("loss").get<double>();
    rep.oracle_val_loss = best.val_loss;
    rep.loss_gap = rep.search_val_loss - rep.oracle_val_loss;
    rep.relative_loss_gap = rep.oracle_val_loss != 0 ? rep.loss_gap / rep.oracle_val_loss : rep.loss_gap;
    const bool link = search.at("task").get<std::string>() == "link_prediction";
    const auto& st = search.at("retrain").at("test");
    rep.metric_gap = link ? st.at("roc_auc").get<double>() - best.test.roc_auc
                          : st.at("macro_f1").get<double>() - best.test.macro_f1;
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("compare: ") + e.what());
  }
}

nlohmann::json compare_to_json(const CompareReport& r) {
  nlohmann::json s = nlohmann::json::array();
  nlohmann::json o = nlohmann::json::array();
  for (OpKind op : r.search_ops) s.push_back(op_name(op));
  for (OpKind op : r.oracle_ops) o.push_back(op_name(op));
  return {{"search_ops", s},
          {"oracle_ops", o},
          {"match_rate", r.match_rate},
          {"node_match_rate", r.node_match_rate},
          {"search_val_loss", r.search_val_loss},
          {"oracle_val_loss", r.oracle_val_loss},
          {"loss_gap", r.loss_gap},
          {"relative_loss_gap", r.relative_loss_gap},
          {"metric_gap", r.metric_gap}};
}

}  // namespace hetcomplete
