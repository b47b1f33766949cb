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


// Discrete-constrained bi-level search over per-cluster completion operators.
//
// One epoch of the loop:
//   1. abar = prox_c1(alpha)                      one-hot per cluster
//   2. alpha <- prox_c2(adam(alpha, dL_val/dabar)) first-order, no unrolling
//   3. abar = prox_c1(alpha)                      refined choice
//   4. omega <- adam(omega, d[L_train + lambda L_GmoC]/domega), evaluating
//      only the active operator of each cluster
//
// The gradient in step 2 needs every candidate, so it is taken through the
// mixture sum_o abar[c(v), o] o(v) with all four candidates held constant.
// The one-step unrolled second-order correction is deliberately absent.
//
// Relaxed mode replaces abar by softmax(alpha) in both steps and evaluates all
// four operators per cluster; it exists for comparison only.

#ifndef HETCOMPLETE_SEARCH_HPP_
#define HETCOMPLETE_SEARCH_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hetcomplete/backbone.hpp"
#include "hetcomplete/cluster.hpp"
#include "hetcomplete/completion.hpp"
#include "hetcomplete/evaluation.hpp"
#include "hetcomplete/hetgraph.hpp"
#include "json.hpp"

namespace hetcomplete {

enum class SearchMode { kDiscrete, kRelaxed };
enum class ClusterMode { kLearned, kFixed };
enum class ClusterDomain { kAll, kMissing };

struct SearchConfig {
  int num_clusters = 4;
  double lambda = 0.4;
  AdamConfig omega{5e-4, 1e-4};
  AdamConfig alpha{5e-3, 1e-5};
  int epochs = 200;
  int alpha_update_period = 1;
  CompletionSettings completion;
  std::uint64_t seed = 1;
  int hidden_dim = 16;
  int layers = 2;
  int patience = 10;
  double min_delta = 1e-4;
  SearchMode mode = SearchMode::kDiscrete;
  ClusterMode cluster_mode = ClusterMode::kLearned;
  ClusterDomain cluster_domain = ClusterDomain::kAll;
  int retrain_epochs = 100;
  bool warm_start = false;
  bool shared_transform = false;
  SplitRatios split;
  double alpha_init = 0.5;
  int repeats = 5;
  int workers = 0;  // 0 = hardware concurrency; never affects results
};

// Throws ValidationError on out-of-range values.
void validate(const SearchConfig& c);
// Flat key/value document. Unknown keys are rejected; absent keys keep defaults.
SearchConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SearchConfig& c);

// ---- proximal operators ---------------------------------------------------------

// Row-wise one-hot at the argmax, lowest index on ties.
Matrix prox_c1(const Matrix& alpha);
// Entrywise clamp to [0, 1].
Matrix prox_c2(const Matrix& alpha);
// Row-wise argmax, lowest index on ties.
std::vector<int> row_argmax(const Matrix& m);

// ---- problem setup -------------------------------------------------------------------

// Everything derived once from (dataset, config): training graph, splits,
// completion context and structural constants.
struct Problem {
  SearchConfig config;
  TaskKind task = TaskKind::kNodeClassification;
  HeteroGraph graph;  // link prediction: held-out target edges removed
  std::uint64_t source_fingerprint = 0;
  AdjacencyView adjacency;
  CompletionContext ctx;
  BackboneGraph backbone;
  BackboneSpec spec;
  std::vector<int> cluster_rows;  // global ids whose rows form C
  std::vector<int> cluster_row_of;
  std::optional<ModularityGraph> modularity;

  // node classification (global ids and classes)
  int num_classes = 0;
  std::vector<int> train_nodes, val_nodes, test_nodes;
  std::vector<int> train_labels, val_labels, test_labels;

  // link prediction (global ids); one negative per positive, same source
  int target_edge_type = -1;
  int dst_type = -1;
  std::vector<std::pair<int, int>> train_pos, val_pos, val_neg, test_pos, test_neg;
  std::vector<std::vector<int>> target_neighbors;  // full-graph target relation, per source

  std::size_t num_missing() const { return ctx.num_missing(); }
};

// Throws ValidationError("nothing to complete") when no node lacks attributes.
Problem make_problem(const Dataset& ds, const SearchConfig& config);

// Negatives for the training positives, resampled from (seed, epoch).
std::vector<std::pair<int, int>> sample_negatives(const Problem& p, const std::vector<std::pair<int, int>>& pos,
                                                  std::uint64_t seed);

enum class Part { kTrain, kVal, kTest };

// Task loss for one part from hidden representations.
ad::Var task_loss(const Problem& p, const BoundParams& params, ad::Var hidden, Part part, int epoch);

struct Metrics {
  double loss = 0.0;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double roc_auc = 0.0;
  double mrr = 0.0;
};
nlohmann::json metrics_to_json(const Metrics& m, TaskKind task);

// ---- completion assembly ------------------------------------------------------------

// Per missing node cluster ids plus the operator chosen for each cluster.
struct Assignment {
  std::vector<int> cluster;
  std::vector<OpKind> ops;
};

// Evaluates each cluster's operator on that cluster's rows: exactly
// ops.size() operator evaluations.
ad::Var complete_discrete(ad::Tape& tape, const Problem& p, const OpVars& vars, const Assignment& a,
                          OpCounter* counter);
// Softmax(alpha)-weighted mixture with every operator evaluated on every
// cluster: 4 * M evaluations.
ad::Var complete_relaxed(ad::Tape& tape, const Problem& p, const OpVars& vars, const std::vector<int>& cluster,
                         ad::Var weights, OpCounter* counter);
// sum_o weights[cluster(v), o] * candidates[o](v) with constant candidates.
ad::Var complete_mixture(ad::Tape& tape, const std::array<Matrix, kNumOps>& candidates,
                         const std::vector<int>& cluster, ad::Var weights);

// Evaluates the task loss (and metrics) for one part under a fixed per-node
// assignment without recording gradients.
Metrics evaluate(const Problem& p, const ParamStore& params, const Assignment& a, Part part);

// ---- single steps -----------------------------------------------------------------------

// Gradient of the validation loss with respect to the (relaxed or one-hot)
// operator weights of each cluster, all candidates held fixed.
Matrix alpha_gradient(const Problem& p, const ParamStore& params, const std::vector<int>& cluster,
                      const Matrix& weights, SearchMode mode, int epoch);

struct AlphaState {
  Matrix alpha;
  AdamState adam;
};

// Discrete: alpha <- prox_c2(adam(alpha, grad at prox_c1(alpha))).
// Relaxed: alpha <- adam(alpha, grad at alpha).
void alpha_step(const Problem& p, const ParamStore& params, const std::vector<int>& cluster, AlphaState& state,
                int epoch);

struct OmegaStepResult {
  double train_loss = 0.0;
  double gmoc = 0.0;
  double modularity = 0.0;
  double collapse = 0.0;
  Matrix assignment;  // C
};

// One Adam step on L_train + lambda * L_GmoC.
OmegaStepResult omega_step(const Problem& p, ParamStore& params, const AlphaState& state,
                           const std::vector<int>& cluster, int epoch, OpCounter* counter);

// ---- loop, trainer, result -------------------------------------------------------------------

struct TrainResult {
  double best_val_loss = 0.0;
  int best_epoch = -1;
  Metrics val;
  Metrics test;
  ParamStore params;  // snapshot at best_epoch
};

// Trains the backbone under a fixed per-node operator assignment on the
// training loss alone, keeping the epoch with the lowest validation loss.
// Starts from init_params(seed) unless `start` is given.
TrainResult train_fixed(const Problem& p, const std::vector<OpKind>& node_ops, int epochs, std::uint64_t seed,
                        const ParamStore* start = nullptr);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double gmoc = 0.0;
  double modularity = 0.0;
  double collapse = 0.0;
  std::vector<int> histogram;
  std::vector<OpKind> ops;
  std::uint64_t omega_op_evaluations = 0;
};

struct SearchResult {
  SearchConfig config;
  std::uint64_t fingerprint = 0;
  std::vector<EpochRecord> history;
  bool converged = false;
  Matrix alpha;
  Assignment final;  // cluster per missing node, operator per cluster
  std::vector<OpKind> node_ops;
  ParamStore search_params;
  TrainResult retrain;
};

// Runs the loop, freezes the final choice, retrains and evaluates.
// `fixed_clusters` supplies the map when cluster_mode is fixed.
SearchResult search_loop(const Problem& p, const std::optional<std::vector<int>>& fixed_clusters = std::nullopt);

nlohmann::json search_result_to_json(const Problem& p, const SearchResult& r);

// Runs config.repeats searches with seeds seed, seed + 1, ... on a worker
// pool and returns {"format", "runs": [...], "summary": {...}}; runs are
// ordered by seed regardless of scheduling.
nlohmann::json search_repeats(const Dataset& ds, const SearchConfig& config,
                              const std::optional<std::vector<int>>& fixed_clusters = std::nullopt);

// Operator counts per node type from a search result (or the first run of a
// repeats document). Rows are node types, columns follow OpKind order.
struct OperatorDistribution {
  std::vector<std::string> types;
  std::vector<std::array<int, kNumOps>> counts;
};
OperatorDistribution operator_distribution(const nlohmann::json& result);
// Human-readable table: one row per node type with percentages per operator.
std::string format_distribution(const OperatorDistribution& d);

}  // namespace hetcomplete

#endif  // HETCOMPLETE_SEARCH_HPP_
