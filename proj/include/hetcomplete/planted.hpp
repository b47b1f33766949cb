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


// Planted-signal synthetic graphs and the exhaustive assignment oracle.
//
// Schema: `item` nodes (attributed, labeled), `entity` nodes (no attributes;
// the nodes to complete) and `feature` nodes (attributed). Every item hangs off
// exactly one entity and carries that entity's class. Entities are split into
// groups, each living in its own region of the graph, and each group's class
// signal is wired so that only one completion operator can read it:
//
//   mean    a strong class leaf tied to every shared sink and a weak leaf
//           pointing at another class; degree weighting cancels the two
//   gcn     two equal leaves with the sinks on the off-class one, so only
//           degree weighting breaks the tie
//   ppnp    private noise relays, each tied to a class anchor two hops away
//   onehot  several items per entity and no feature neighbors
//
// Feature and item attributes are C-dimensional, one direction per class.

#ifndef HETCOMPLETE_PLANTED_HPP_
#define HETCOMPLETE_PLANTED_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hetcomplete/completion.hpp"
#include "hetcomplete/hetgraph.hpp"
#include "hetcomplete/search.hpp"
#include "json.hpp"

namespace hetcomplete {

struct PlantedGroup {
  OpKind op = OpKind::kMean;
  int entities = 12;
  int items_per_entity = 1;
};

struct PlantedSpec {
  std::uint64_t seed = 1;
  int num_classes = 2;
  std::vector<PlantedGroup> groups;
  int sinks = 8;                 // mean / gcn groups: attribute-free sinks per region
  double leaf_amplitude = 1.0;   // the strong mean-group leaf gets leaf_amplitude * sqrt(1 + sinks)
  double leaf_noise = 0.1;
  int relays_per_entity = 2;     // ppnp group
  int anchors_per_class = 2;     // ppnp group
  double anchor_amplitude = 4.0;
  double relay_noise = 0.3;
  double item_noise = 0.5;
};

// Throws ValidationError on an inconsistent spec.
void validate(const PlantedSpec& s);
PlantedSpec planted_spec_from_json(const nlohmann::json& j);
nlohmann::json planted_spec_to_json(const PlantedSpec& s);

struct PlantedTruth {
  std::uint64_t fingerprint = 0;
  std::vector<OpKind> group_ops;
  std::vector<int> group_of_missing;  // per missing node, canonical order
};

struct PlantedData {
  Dataset dataset;
  PlantedTruth truth;
};

PlantedData gen_synthetic(const PlantedSpec& spec);

nlohmann::json truth_to_json(const PlantedTruth& t);
PlantedTruth truth_from_json(const nlohmann::json& j);

// ---- oracle ----------------------------------------------------------------------------

struct OracleRow {
  std::vector<OpKind> ops;  // one per cluster
  double val_loss = 0.0;
  int best_epoch = -1;
  Metrics val;
  Metrics test;
};

struct OracleResult {
  std::uint64_t fingerprint = 0;
  int num_clusters = 0;
  std::vector<int> cluster;  // per missing node
  std::vector<OracleRow> rows;  // enumeration order, first cluster varying slowest
  std::size_t argmin = 0;
  bool complete = true;  // false if the time budget cut enumeration short
};

// Trains every one of |O|^M assignments with train_fixed under the fixed
// cluster map. Requires |O|^M <= 4096. Work is spread over `workers` threads
// (0 = hardware concurrency); results do not depend on the thread count.
// time_budget_s > 0 stops scheduling new assignments once exceeded.
OracleResult brute_force_search(const Problem& p, const std::vector<int>& cluster, int num_clusters,
                                int workers = 0, double time_budget_s = 0.0);

nlohmann::json oracle_to_json(const OracleResult& r, TaskKind task);
OracleResult oracle_from_json(const nlohmann::json& j);

std::string assignment_string(const std::vector<OpKind>& ops);

struct CompareReport {
  std::vector<OpKind> search_ops;  // majority searched operator per oracle cluster
  std::vector<OpKind> oracle_ops;  // oracle argmin
  double match_rate = 0.0;
  double node_match_rate = 0.0;
  double search_val_loss = 0.0;
  double oracle_val_loss = 0.0;
  double loss_gap = 0.0;           // search - oracle min
  double relative_loss_gap = 0.0;  // gap / oracle min
  double metric_gap = 0.0;         // primary test metric, search - oracle argmin
};

// Inputs are the documents written by search_result_to_json and
// oracle_to_json. Throws ValidationError when they describe different graphs.
CompareReport compare(const nlohmann::json& search, const nlohmann::json& oracle);
nlohmann::json compare_to_json(const CompareReport& r);

}  // namespace hetcomplete

#endif  // HETCOMPLETE_PLANTED_HPP_
