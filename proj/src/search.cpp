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

#include <algorithm>
#include <atomic>
#include <exception>
#include <iomanip>
#include <thread>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "hetcomplete/errors.hpp"

namespace hetcomplete {

// ---- configuration -------------------------------------------------------------------

void validate(const SearchConfig& c) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError("config: " + what);
  };
  need(c.num_clusters >= 2, "num_clusters must be >= 2");
  need(c.lambda >= 0.0, "lambda must be >= 0");
  need(c.omega.lr > 0 && c.alpha.lr > 0, "learning rates must be > 0");
  need(c.omega.weight_decay >= 0 && c.alpha.weight_decay >= 0, "weight decays must be >= 0");
  need(c.epochs >= 1, "epochs must be >= 1");
  need(c.alpha_update_period >= 1, "alpha_update_period must be >= 1");
  need(c.hidden_dim >= 1, "hidden_dim must be >= 1");
  need(c.layers >= 1, "layers must be >= 1");
  need(c.patience >= 1, "patience must be >= 1");
  need(c.min_delta >= 0, "min_delta must be >= 0");
  need(c.retrain_epochs >= 1, "retrain_epochs must be >= 1");
  need(c.alpha_init >= 0 && c.alpha_init <= 1, "alpha_init must lie in [0, 1]");
  need(c.repeats >= 1, "repeats must be >= 1");
  need(c.workers >= 0, "workers must be >= 0");
  validate(c.completion);
}

namespace {

template <typename E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<SearchMode> kModes[] = {{SearchMode::kDiscrete, "discrete"}, {SearchMode::kRelaxed, "relaxed"}};
constexpr EnumName<ClusterMode> kClusterModes[] = {{ClusterMode::kLearned, "learned"}, {ClusterMode::kFixed, "fixed"}};
constexpr EnumName<ClusterDomain> kDomains[] = {{ClusterDomain::kAll, "all"}, {ClusterDomain::kMissing, "missing"}};

template <typename E, std::size_t N>
E parse_enum(const EnumName<E> (&table)[N], const std::string& key, const std::string& s) {
  for (const auto& e : table)
    if (s == e.name) return e.value;
  throw ValidationError("config: unknown value '" + s + "' for " + key);
}

template <typename E, std::size_t N>
const char* enum_name(const EnumName<E> (&table)[N], E v) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "?";
}

}  // namespace

SearchConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config: expected an object of key/value pairs");
  SearchConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "num_clusters") c.num_clusters = v.get<int>();
      else if (key == "lambda") c.lambda = v.get<double>();
      else if (key == "omega_lr") c.omega.lr = v.get<double>();
      else if (key == "omega_weight_decay") c.omega.weight_decay = v.get<double>();
      else if (key == "alpha_lr") c.alpha.lr = v.get<double>();
      else if (key == "alpha_weight_decay") c.alpha.weight_decay = v.get<double>();
      else if (key == "epochs") c.epochs = v.get<int>();
      else if (key == "alpha_update_period") c.alpha_update_period = v.get<int>();
      else if (key == "ppnp_restart") c.completion.restart = v.get<double>();
      else if (key == "ppnp_iterations") c.completion.ppnp_iterations = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "hidden_dim") c.hidden_dim = v.get<int>();
      else if (key == "layers") c.layers = v.get<int>();
      else if (key == "patience") c.patience = v.get<int>();
      else if (key == "min_delta") c.min_delta = v.get<double>();
      else if (key == "mode") c.mode = parse_enum(kModes, key, v.get<std::string>());
      else if (key == "cluster_mode") c.cluster_mode = parse_enum(kClusterModes, key, v.get<std::string>());
      else if (key == "cluster_domain") c.cluster_domain = parse_enum(kDomains, key, v.get<std::string>());
      else if (key == "retrain_epochs") c.retrain_epochs = v.get<int>();
      else if (key == "warm_start") c.warm_start = v.get<bool>();
      else if (key == "shared_transform") c.shared_transform = v.get<bool>();
      else if (key == "train_ratio") c.split.train = v.get<double>();
      else if (key == "val_ratio") c.split.val = v.get<double>();
      else if (key == "test_ratio") c.split.test = v.get<double>();
      else if (key == "alpha_init") c.alpha_init = v.get<double>();
      else if (key == "repeats") c.repeats = v.get<int>();
      else if (key == "workers") c.workers = v.get<int>();
      else throw ValidationError("config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

nlohmann::json config_to_json(const SearchConfig& c) {
  return {{"num_clusters", c.num_clusters},
          {"lambda", c.lambda},
          {"omega_lr", c.omega.lr},
          {"omega_weight_decay", c.omega.weight_decay},
          {"alpha_lr", c.alpha.lr},
          {"alpha_weight_decay", c.alpha.weight_decay},
          {"epochs", c.epochs},
          {"alpha_update_period", c.alpha_update_period},
          {"ppnp_restart", c.completion.restart},
          {"ppnp_iterations", c.completion.ppnp_iterations},
          {"seed", c.seed},
          {"hidden_dim", c.hidden_dim},
          {"layers", c.layers},
          {"patience", c.patience},
          {"min_delta", c.min_delta},
          {"mode", enum_name(kModes, c.mode)},
          {"cluster_mode", enum_name(kClusterModes, c.cluster_mode)},
          {"cluster_domain", enum_name(kDomains, c.cluster_domain)},
          {"retrain_epochs", c.retrain_epochs},
          {"warm_start", c.warm_start},
          {"shared_transform", c.shared_transform},
          {"train_ratio", c.split.train},
          {"val_ratio", c.split.val},
          {"test_ratio", c.split.test},
          {"alpha_init", c.alpha_init},
          {"repeats", c.repeats}};
}

// ---- proximal operators -------------------------------------------------------------------

std::vector<int> row_argmax(const Matrix& m) {
  std::vector<int> out(m.rows(), 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < r.size(); ++j)
      if (r[j] > r[best]) best = j;
    out[i] = static_cast<int>(best);
  }
  return out;
}

Matrix prox_c1(const Matrix& alpha) {
  Matrix out(alpha.rows(), alpha.cols());
  if (alpha.cols() == 0) return out;
  const std::vector<int> am = row_argmax(alpha);
  for (std::size_t i = 0; i < alpha.rows(); ++i) out(i, static_cast<std::size_t>(am[i])) = 1.0;
  return out;
}

Matrix prox_c2(const Matrix& alpha) {
  Matrix out = alpha;
  for (double& v : out.values()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

// ---- problem setup -------------------------------------------------------------------------

namespace {

std::vector<OpKind> ops_from_argmax(const Matrix& alpha) {
  std::vector<OpKind> ops;
  for (int a : row_argmax(alpha)) ops.push_back(static_cast<OpKind>(a));
  return ops;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  SplitMix m(seed ^ (salt * 0x9E3779B97F4A7C15ULL));
  return m.next();
}

}  // namespace

std::vector<std::pair<int, int>> sample_negatives(const Problem& p, const std::vector<std::pair<int, int>>& pos,
                                                  std::uint64_t seed) {
  SplitMix rng(seed);
  const int count = p.graph.node_types()[static_cast<std::size_t>(p.dst_type)].count;
  std::vector<std::pair<int, int>> out;
  out.reserve(pos.size());
  for (const auto& [u, v] : pos) {
    int w = -1;
    for (int attempt = 0; attempt < 64; ++attempt) {
      const int cand = p.graph.global_id(p.dst_type, static_cast<int>(rng.below(static_cast<std::uint64_t>(count))));
      const auto& nb = p.target_neighbors[static_cast<std::size_t>(u)];
      w = cand;
      if (cand != u && !std::binary_search(nb.begin(), nb.end(), cand)) break;
    }
    out.emplace_back(u, w);
  }
  return out;
}

Problem make_problem(const Dataset& ds, const SearchConfig& config) {
  validate(config);
  Problem p;
  p.config = config;
  p.task = ds.target.task;
  p.source_fingerprint = ds.graph.fingerprint();
  const HeteroGraph& g = ds.graph;

  if (p.task == TaskKind::kNodeClassification) {
    if (!ds.labels) throw ValidationError("node classification needs labels");
    const Labels& labels = *ds.labels;
    const int t = g.type_index(labels.type);
    p.num_classes = labels.num_classes;
    const Split s = make_splits(static_cast<int>(labels.entries.size()), config.split, config.seed);
    auto fill = [&](const std::vector<int>& idx, std::vector<int>& nodes, std::vector<int>& cls) {
      for (int i : idx) {
        nodes.push_back(g.global_id(t, labels.entries[static_cast<std::size_t>(i)].first));
        cls.push_back(labels.entries[static_cast<std::size_t>(i)].second);
      }
    };
    fill(s.train, p.train_nodes, p.train_labels);
    fill(s.val, p.val_nodes, p.val_labels);
    fill(s.test, p.test_nodes, p.test_labels);
    p.graph = g;
  } else {
    const int e = g.edge_type_index(ds.target.edge_type);
    if (e < 0) throw ValidationError("target.edge_type: unknown edge type '" + ds.target.edge_type + "'");
    p.target_edge_type = e;
    const EdgeType& et = g.edge_types()[static_cast<std::size_t>(e)];
    const int st = g.type_index(et.src_type);
    p.dst_type = g.type_index(et.dst_type);
    std::vector<std::pair<int, int>> pairs;
    {
      std::set<std::pair<int, int>> seen;
      for (const auto& pr : et.pairs)
        if (seen.insert(pr).second) pairs.push_back(pr);
    }
    const Split s = make_splits(static_cast<int>(pairs.size()), config.split, config.seed);
    auto global = [&](int i) {
      const auto& [a, b] = pairs[static_cast<std::size_t>(i)];
      return std::make_pair(g.global_id(st, a), g.global_id(p.dst_type, b));
    };
    for (int i : s.train) p.train_pos.push_back(global(i));
    for (int i : s.val) p.val_pos.push_back(global(i));
    for (int i : s.test) p.test_pos.push_back(global(i));

    std::set<std::pair<int, int>> held;
    for (int i : s.val) held.insert(pairs[static_cast<std::size_t>(i)]);
    for (int i : s.test) held.insert(pairs[static_cast<std::size_t>(i)]);
    GraphDescription d = describe(g);
    auto& kept = d.edge_types[static_cast<std::size_t>(e)].pairs;
    kept.erase(std::remove_if(kept.begin(), kept.end(), [&](const auto& pr) { return held.count(pr) != 0; }),
               kept.end());
    p.graph = build_graph(std::move(d));

    p.target_neighbors.assign(static_cast<std::size_t>(g.num_nodes()), {});
    for (const auto& [u, v] : g.relation(e)) p.target_neighbors[static_cast<std::size_t>(u)].push_back(v);
    p.val_neg = sample_negatives(p, p.val_pos, mix(config.seed, 0x7661));
    p.test_neg = sample_negatives(p, p.test_pos, mix(config.seed, 0x7465));
  }

  p.adjacency = build_adjacency(p.graph, false);
  p.ctx = make_context(p.graph, p.adjacency, config.completion);
  if (p.ctx.num_missing() == 0)
    throw ValidationError("nothing to complete: every node type carries attributes");
  p.backbone = make_backbone_graph(p.graph);
  p.spec = BackboneSpec{config.hidden_dim, config.layers, p.num_classes, config.num_clusters, config.shared_transform};

  if (config.cluster_domain == ClusterDomain::kAll) {
    p.cluster_rows.resize(static_cast<std::size_t>(p.graph.num_nodes()));
    for (int v = 0; v < p.graph.num_nodes(); ++v) p.cluster_rows[static_cast<std::size_t>(v)] = v;
    p.cluster_row_of = p.cluster_rows;
    p.modularity = make_modularity_graph(p.adjacency);
  } else {
    p.cluster_rows = p.ctx.partition.missing;
    p.cluster_row_of = p.ctx.partition.missing_index;
    p.modularity = make_modularity_graph(p.adjacency, p.cluster_rows);
  }
  return p;
}

ad::Var task_loss(const Problem& p, const BoundParams& params, ad::Var hidden, Part part, int epoch) {
  if (p.task == TaskKind::kNodeClassification) {
    const auto& nodes = part == Part::kTrain ? p.train_nodes : part == Part::kVal ? p.val_nodes : p.test_nodes;
    const auto& labels = part == Part::kTrain ? p.train_labels : part == Part::kVal ? p.val_labels : p.test_labels;
    return loss_node_classification(class_logits(params, hidden, nodes), labels);
  }
  const auto& pos = part == Part::kTrain ? p.train_pos : part == Part::kVal ? p.val_pos : p.test_pos;
  const auto neg = part == Part::kTrain ? sample_negatives(p, pos, mix(p.config.seed, 0x10000 + static_cast<std::uint64_t>(epoch)))
                   : part == Part::kVal ? p.val_neg
                                        : p.test_neg;
  auto split = [](const std::vector<std::pair<int, int>>& e, std::vector<int>& a, std::vector<int>& b) {
    for (const auto& [u, v] : e) {
      a.push_back(u);
      b.push_back(v);
    }
  };
  std::vector<int> ps, pd, ns, nd;
  split(pos, ps, pd);
  split(neg, ns, nd);
  return loss_link_prediction(edge_logits(hidden, ps, pd), edge_logits(hidden, ns, nd));
}

nlohmann::json metrics_to_json(const Metrics& m, TaskKind task) {
  if (task == TaskKind::kNodeClassification)
    return {{"loss", m.loss}, {"macro_f1", m.macro_f1}, {"micro_f1", m.micro_f1}};
  return {{"loss", m.loss}, {"roc_auc", m.roc_auc}, {"mrr", m.mrr}};
}

// ---- completion assembly ---------------------------------------------------------------------

namespace {

std::vector<std::vector<int>> rows_by_cluster(const std::vector<int>& cluster, std::size_t m) {
  std::vector<std::vector<int>> rows(m);
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    const int c = cluster[i];
    if (c < 0 || static_cast<std::size_t>(c) >= m)
      throw ContractViolation("cluster id " + std::to_string(c) + " out of range [0, " + std::to_string(m) + ")");
    rows[static_cast<std::size_t>(c)].push_back(static_cast<int>(i));
  }
  return rows;
}

}  // namespace

ad::Var complete_discrete(ad::Tape& tape, const Problem& p, const OpVars& vars, const Assignment& a,
                          OpCounter* counter) {
  const std::size_t n = p.num_missing();
  HC_REQUIRE(a.cluster.size() == n, "complete_discrete: cluster map does not cover the missing nodes");
  const auto rows = rows_by_cluster(a.cluster, a.ops.size());
  ad::Var x = tape.constant(Matrix(n, vars.mean.cols()));
  for (std::size_t m = 0; m < a.ops.size(); ++m) {
    const ad::Var out = evaluate_op(tape, p.ctx, a.ops[m], vars, rows[m], counter);
    x = ad::add(x, ad::scatter_add_rows(out, rows[m], n));
  }
  return x;
}

ad::Var complete_relaxed(ad::Tape& tape, const Problem& p, const OpVars& vars, const std::vector<int>& cluster,
                         ad::Var weights, OpCounter* counter) {
  const std::size_t n = p.num_missing();
  HC_REQUIRE(cluster.size() == n, "complete_relaxed: cluster map does not cover the missing nodes");
  const auto rows = rows_by_cluster(cluster, weights.rows());
  ad::Var x = tape.constant(Matrix(n, vars.mean.cols()));
  for (std::size_t m = 0; m < rows.size(); ++m) {
    for (OpKind op : kAllOps) {
      const ad::Var out = evaluate_op(tape, p.ctx, op, vars, rows[m], counter);
      const ad::Var w = ad::gather_rows(ad::select_column(weights, static_cast<std::size_t>(op)),
                                        std::vector<int>(rows[m].size(), static_cast<int>(m)));
      x = ad::add(x, ad::scatter_add_rows(ad::row_scale(out, w), rows[m], n));
    }
  }
  return x;
}

ad::Var complete_mixture(ad::Tape& tape, const std::array<Matrix, kNumOps>& candidates,
                         const std::vector<int>& cluster, ad::Var weights) {
  (void)rows_by_cluster(cluster, weights.rows());
  ad::Var x = tape.constant(Matrix(candidates[0].rows(), candidates[0].cols()));
  for (OpKind op : kAllOps) {
    const auto o = static_cast<std::size_t>(op);
    const ad::Var w = ad::gather_rows(ad::select_column(weights, o), cluster);
    x = ad::add(x, ad::row_scale(tape.constant(candidates[o]), w));
  }
  return x;
}

Metrics evaluate(const Problem& p, const ParamStore& params, const Assignment& a, Part part) {
  ad::Tape tape;
  const BoundParams bound(params, params.bind(tape, false));
  const ad::Var x = complete_discrete(tape, p, completion_vars(bound, p.graph), a, nullptr);
  const ad::Var hidden = forward(tape, p.backbone, bound, x, p.config.layers);
  Metrics m;
  m.loss = task_loss(p, bound, hidden, part, 0).scalar();
  if (p.task == TaskKind::kNodeClassification) {
    const auto& nodes = part == Part::kTrain ? p.train_nodes : part == Part::kVal ? p.val_nodes : p.test_nodes;
    const auto& labels = part == Part::kTrain ? p.train_labels : part == Part::kVal ? p.val_labels : p.test_labels;
    const std::vector<int> pred = row_argmax(class_logits(bound, hidden, nodes).value());
    m.macro_f1 = macro_f1(pred, labels, p.num_classes);
    m.micro_f1 = micro_f1(pred, labels, p.num_classes);
  } else if (part != Part::kTrain) {
    const auto& pos = part == Part::kVal ? p.val_pos : p.test_pos;
    const auto& neg = part == Part::kVal ? p.val_neg : p.test_neg;
    const Matrix& h = hidden.value();
    auto dot = [&](int u, int v) {
      double s = 0;
      for (std::size_t j = 0; j < h.cols(); ++j) s += h(static_cast<std::size_t>(u), j) * h(static_cast<std::size_t>(v), j);
      return s;
    };
    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<int> ranks;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      const double sp = dot(pos[i].first, pos[i].second);
      const double sn = dot(neg[i].first, neg[i].second);
      scores.push_back(sp);
      labels.push_back(1);
      scores.push_back(sn);
      labels.push_back(0);
      ranks.push_back(candidate_rank(sp, std::span<const double>(&sn, 1)));
    }
    m.roc_auc = roc_auc(scores, labels);
    m.mrr = mrr(ranks);
  }
  return m;
}

// ---- single steps ------------------------------------------------------------------------------

Matrix alpha_gradient(const Problem& p, const ParamStore& params, const std::vector<int>& cluster,
                      const Matrix& weights, SearchMode mode, int epoch) {
  const auto candidates = all_candidates(p.ctx, completion_weights(params, p.graph));
  ad::Tape tape;
  const BoundParams bound(params, params.bind(tape, false));
  const ad::Var leaf = tape.leaf(weights);
  const ad::Var w = mode == SearchMode::kRelaxed ? ad::row_softmax(leaf) : leaf;
  const ad::Var x = complete_mixture(tape, candidates, cluster, w);
  const ad::Var hidden = forward(tape, p.backbone, bound, x, p.config.layers);
  const ad::Var loss = task_loss(p, bound, hidden, Part::kVal, epoch);
  tape.backward(loss);
  return tape.has_grad(leaf) ? tape.grad(leaf) : Matrix(weights.rows(), weights.cols());
}

void alpha_step(const Problem& p, const ParamStore& params, const std::vector<int>& cluster, AlphaState& state,
                int epoch) {
  const bool discrete = p.config.mode == SearchMode::kDiscrete;
  const Matrix at = discrete ? prox_c1(state.alpha) : state.alpha;
  const Matrix g = alpha_gradient(p, params, cluster, at, p.config.mode, epoch);
  adam_update(state.alpha, g, state.adam, p.config.alpha);
  if (discrete) state.alpha = prox_c2(state.alpha);
}

OmegaStepResult omega_step(const Problem& p, ParamStore& params, const AlphaState& state,
                           const std::vector<int>& cluster, int epoch, OpCounter* counter) {
  ad::Tape tape;
  const BoundParams bound(params, params.bind(tape, true));
  const OpVars vars = completion_vars(bound, p.graph);
  ad::Var x;
  if (p.config.mode == SearchMode::kDiscrete) {
    x = complete_discrete(tape, p, vars, Assignment{cluster, ops_from_argmax(state.alpha)}, counter);
  } else {
    x = complete_relaxed(tape, p, vars, cluster, ad::row_softmax(tape.constant(state.alpha)), counter);
  }
  const ad::Var hidden = forward(tape, p.backbone, bound, x, p.config.layers);
  const ad::Var train = task_loss(p, bound, hidden, Part::kTrain, epoch);
  const ad::Var rows = p.config.cluster_domain == ClusterDomain::kAll ? hidden : ad::gather_rows(hidden, p.cluster_rows);
  const ad::Var c = assign_clusters(rows, bound["cluster.theta"]);
  const ModularityLoss ml = modularity_loss(c, *p.modularity);
  const ad::Var total = p.config.lambda > 0 ? ad::add(train, ad::scale(ml.total, p.config.lambda)) : train;
  tape.backward(total);
  params.collect(bound.vars());
  params.adam_step(p.config.omega);
  return {train.scalar(), ml.total.scalar(), ml.modularity.scalar(), ml.collapse.scalar(), c.value()};
}

// ---- trainer ------------------------------------------------------------------------------------

TrainResult train_fixed(const Problem& p, const std::vector<OpKind>& node_ops, int epochs, std::uint64_t seed,
                        const ParamStore* start) {
  HC_REQUIRE(node_ops.size() == p.num_missing(), "train_fixed: one operator per missing node required");
  HC_REQUIRE(epochs >= 1, "train_fixed: epochs must be >= 1");
  Assignment a;
  a.ops.assign(kAllOps.begin(), kAllOps.end());
  for (OpKind op : node_ops) a.cluster.push_back(static_cast<int>(op));
  ParamStore params = start != nullptr ? *start : init_params(p.graph, p.spec, p.ctx, seed);
  TrainResult best;
  best.best_val_loss = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < epochs; ++epoch) {
    {
      ad::Tape tape;
      const BoundParams bound(params, params.bind(tape, true));
      const ad::Var x = complete_discrete(tape, p, completion_vars(bound, p.graph), a, nullptr);
      const ad::Var hidden = forward(tape, p.backbone, bound, x, p.config.layers);
      tape.backward(task_loss(p, bound, hidden, Part::kTrain, epoch));
      params.collect(bound.vars());
      params.adam_step(p.config.omega);
    }
    const Metrics val = evaluate(p, params, a, Part::kVal);
    if (val.loss < best.best_val_loss) {
      best.best_val_loss = val.loss;
      best.best_epoch = epoch;
      best.val = val;
      best.params = params;
    }
  }
  best.test = evaluate(p, best.params, a, Part::kTest);
  return best;
}

// ---- loop ------------------------------------------------------------------------------------------

namespace {

double relaxed_val_loss(const Problem& p, const ParamStore& params, const std::vector<int>& cluster,
                        const Matrix& alpha) {
  ad::Tape tape;
  const BoundParams bound(params, params.bind(tape, false));
  const ad::Var x = complete_relaxed(tape, p, completion_vars(bound, p.graph), cluster,
                                     ad::row_softmax(tape.constant(alpha)), nullptr);
  const ad::Var hidden = forward(tape, p.backbone, bound, x, p.config.layers);
  return task_loss(p, bound, hidden, Part::kVal, 0).scalar();
}

}  // namespace

SearchResult search_loop(const Problem& p, const std::optional<std::vector<int>>& fixed_clusters) {
  const SearchConfig& cfg = p.config;
  const std::size_t n = p.num_missing();
  if (n == 0) throw ValidationError("nothing to complete: every node type carries attributes");
  SearchResult r;
  r.config = cfg;
  r.fingerprint = p.source_fingerprint;

  std::vector<int> cluster(n, 0);
  const bool fixed = cfg.cluster_mode == ClusterMode::kFixed;
  if (fixed) {
    if (!fixed_clusters) throw ValidationError("cluster_mode fixed needs a cluster map");
    if (fixed_clusters->size() != n) throw ValidationError("fixed cluster map does not cover the missing nodes");
    for (int c : *fixed_clusters)
      if (c < 0 || c >= cfg.num_clusters) throw ValidationError("fixed cluster map id out of range");
    cluster = *fixed_clusters;
  }

  ParamStore params = init_params(p.graph, p.spec, p.ctx, cfg.seed);
  AlphaState state{Matrix(static_cast<std::size_t>(cfg.num_clusters), kNumOps, cfg.alpha_init), {}};
  std::optional<Matrix> last_c;
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  OpCounter counter;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch % cfg.alpha_update_period == 0) {
      if (!fixed && last_c) cluster = hard_assignment(*last_c, p.ctx.partition.missing, p.cluster_row_of).cluster;
      alpha_step(p, params, cluster, state, epoch);
    }
    counter.reset();
    const OmegaStepResult om = omega_step(p, params, state, cluster, epoch, &counter);
    last_c = om.assignment;

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = om.train_loss;
    rec.gmoc = om.gmoc;
    rec.modularity = om.modularity;
    rec.collapse = om.collapse;
    rec.ops = ops_from_argmax(state.alpha);
    rec.omega_op_evaluations = counter.total();
    rec.histogram.assign(static_cast<std::size_t>(cfg.num_clusters), 0);
    for (int c : cluster) ++rec.histogram[static_cast<std::size_t>(c)];
    rec.val_loss = cfg.mode == SearchMode::kDiscrete ? evaluate(p, params, Assignment{cluster, rec.ops}, Part::kVal).loss
                                                     : relaxed_val_loss(p, params, cluster, state.alpha);
    r.history.push_back(rec);

    if (rec.val_loss < best - cfg.min_delta) {
      best = rec.val_loss;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      r.converged = true;
      break;
    }
  }

  r.alpha = state.alpha;
  r.final = Assignment{cluster, ops_from_argmax(state.alpha)};
  for (int c : cluster) r.node_ops.push_back(r.final.ops[static_cast<std::size_t>(c)]);
  r.search_params = params;
  r.retrain = train_fixed(p, r.node_ops, cfg.retrain_epochs, cfg.seed, cfg.warm_start ? &params : nullptr);
  return r;
}

nlohmann::json search_result_to_json(const Problem& p, const SearchResult& r) {
  using nlohmann::json;
  std::ostringstream fp;
  fp << std::hex << r.fingerprint;
  json doc;
  doc["format"] = "hetcomplete-search-result";
  doc["version"] = 1;
  doc["graph_fingerprint"] = fp.str();
  doc["config"] = config_to_json(r.config);
  doc["task"] = p.task == TaskKind::kNodeClassification ? "node_classification" : "link_prediction";

  json history = json::array();
  for (const auto& e : r.history) {
    json ops = json::array();
    for (OpKind op : e.ops) ops.push_back(op_name(op));
    history.push_back({{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"val_loss", e.val_loss},
                       {"gmoc", e.gmoc},
                       {"modularity", e.modularity},
                       {"collapse", e.collapse},
                       {"cluster_histogram", e.histogram},
                       {"cluster_ops", ops},
                       {"omega_op_evaluations", e.omega_op_evaluations}});
  }
  doc["history"] = history;
  doc["epochs_run"] = r.history.size();
  doc["converged"] = r.converged;

  json alpha = json::array();
  for (std::size_t i = 0; i < r.alpha.rows(); ++i) {
    auto row = r.alpha.row(i);
    alpha.push_back(std::vector<double>(row.begin(), row.end()));
  }
  doc["alpha"] = alpha;

  std::vector<int> sizes(r.final.ops.size(), 0);
  for (int c : r.final.cluster) ++sizes[static_cast<std::size_t>(c)];
  json clusters = json::array();
  for (std::size_t m = 0; m < r.final.ops.size(); ++m)
    clusters.push_back({{"id", m}, {"size", sizes[m]}, {"op", op_name(r.final.ops[m])}});
  doc["clusters"] = clusters;

  json nodes = json::array();
  const auto& part = p.ctx.partition;
  for (std::size_t i = 0; i < part.missing.size(); ++i) {
    const int v = part.missing[i];
    nodes.push_back({{"node", v},
                     {"type", p.graph.node_types()[static_cast<std::size_t>(part.type_of[static_cast<std::size_t>(v)])].name},
                     {"local", part.local_of[static_cast<std::size_t>(v)]},
                     {"cluster", r.final.cluster[i]},
                     {"op", op_name(r.node_ops[i])}});
  }
  doc["node_ops"] = nodes;

  std::ostringstream ck;
  r.retrain.params.save(ck);
  doc["retrain"] = {{"best_epoch", r.retrain.best_epoch},
                    {"val", metrics_to_json(r.retrain.val, p.task)},
                    {"test", metrics_to_json(r.retrain.test, p.task)}};
  doc["checkpoint"] = ck.str();
  return doc;
}

nlohmann::json search_repeats(const Dataset& ds, const SearchConfig& config,
                              const std::optional<std::vector<int>>& fixed_clusters) {
  validate(config);
  const int n = config.repeats;
  std::vector<nlohmann::json> runs(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        SearchConfig c = config;
        c.seed = config.seed + static_cast<std::uint64_t>(i);
        const Problem p = make_problem(ds, c);
        runs[static_cast<std::size_t>(i)] = search_result_to_json(p, search_loop(p, fixed_clusters));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  int workers = config.workers > 0 ? config.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, n);
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  const bool link = ds.target.task == TaskKind::kLinkPrediction;
  std::vector<std::string> keys = {"loss"};
  if (link) {
    keys.push_back("roc_auc");
    keys.push_back("mrr");
  } else {
    keys.push_back("macro_f1");
    keys.push_back("micro_f1");
  }
  nlohmann::json summary;
  summary["seeds"] = nlohmann::json::array();
  for (int i = 0; i < n; ++i) summary["seeds"].push_back(config.seed + static_cast<std::uint64_t>(i));
  for (const char* part : {"val", "test"}) {
    for (const auto& k : keys) {
      std::vector<double> v;
      for (const auto& r : runs) v.push_back(r.at("retrain").at(part).at(k).get<double>());
      const MeanStd ms = mean_std(v);
      nlohmann::json entry = {{"mean", ms.mean}};
      if (v.size() >= 2) entry["std"] = ms.std;
      summary[part][k] = entry;
    }
  }
  return {{"format", "hetcomplete-search-runs"}, {"version", 1}, {"runs", runs}, {"summary", summary}};
}

OperatorDistribution operator_distribution(const nlohmann::json& doc) {
  const nlohmann::json& r = doc.contains("runs") ? doc.at("runs").at(0) : doc;
  if (r.value("format", "") != "hetcomplete-search-result") throw ValidationError("not a search-result document");
  OperatorDistribution d;
  try {
    for (const auto& node : r.at("node_ops")) {
      const std::string type = node.at("type").get<std::string>();
      const auto op = parse_op(node.at("op").get<std::string>());
      if (!op) throw ValidationError("unknown operator in result");
      auto it = std::find(d.types.begin(), d.types.end(), type);
      if (it == d.types.end()) {
        d.types.push_back(type);
        d.counts.push_back({});
        it = d.types.end() - 1;
      }
      ++d.counts[static_cast<std::size_t>(it - d.types.begin())][static_cast<std::size_t>(*op)];
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("result: ") + e.what());
  }
  return d;
}

std::string format_distribution(const OperatorDistribution& d) {
  std::ostringstream os;
  os << std::left;
  os << "type            nodes";
  for (OpKind op : kAllOps) os << "  " << std::setw(8) << op_name(op);
  os << "\n";
  std::array<int, kNumOps> all{};
  auto line = [&](const std::string& name, const std::array<int, kNumOps>& c) {
    int total = 0;
    for (int v : c) total += v;
    os << std::setw(16) << name << std::right << std::setw(5) << total << std::left;
    for (int v : c) {
      std::ostringstream pct;
      pct << std::fixed << std::setprecision(1) << (total ? 100.0 * v / total : 0.0) << "%";
      os << "  " << std::setw(8) << pct.str();
    }
    os << "\n";
  };
  for (std::size_t i = 0; i < d.types.size(); ++i) {
    line(d.types[i], d.counts[i]);
    for (std::size_t o = 0; o < kNumOps; ++o) all[o] += d.counts[i][o];
  }
  if (d.types.size() > 1) line("(all)", all);
  return os.str();
}

}  // namespace hetcomplete
