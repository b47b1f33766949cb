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


// Trainable parameters, Adam, and a small relational GNN.
//
// Layer update, per node v and edge type t:
//
//   h'_v = ELU( h_v U + b + sum_t mean_{u in N_t(v)} h_u V_t )
//
// Layer 0 input is a per-type linear projection of raw attributes for
// attributed nodes and the completed attributes for missing nodes.

#ifndef HETCOMPLETE_BACKBONE_HPP_
#define HETCOMPLETE_BACKBONE_HPP_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "hetcomplete/autodiff.hpp"
#include "hetcomplete/completion.hpp"
#include "hetcomplete/hetgraph.hpp"

namespace hetcomplete {

struct AdamConfig {
  double lr = 5e-4;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Matrix m;
  Matrix v;
  std::int64_t step = 0;
};

// Decoupled decay: param *= 1 - lr * wd, then the bias-corrected Adam move.
void adam_update(Matrix& param, const Matrix& grad, AdamState& state, const AdamConfig& cfg);

class ParamStore {
 public:
  struct Param {
    std::string name;
    Matrix value;
    Matrix grad;
    bool has_grad = false;
    AdamState adam;
  };

  int add(const std::string& name, Matrix init);
  // -1 when absent.
  int index(const std::string& name) const;
  bool contains(const std::string& name) const { return index(name) >= 0; }
  Param& at(int i) { return params_[static_cast<std::size_t>(i)]; }
  const Param& at(int i) const { return params_[static_cast<std::size_t>(i)]; }
  Matrix& value(const std::string& name);
  const Matrix& value(const std::string& name) const;
  int size() const { return static_cast<int>(params_.size()); }
  std::size_t parameter_count() const;

  // Registers every parameter on the tape, in store order.
  std::vector<ad::Var> bind(ad::Tape& tape, bool requires_grad) const;
  // Copies gradients back after Tape::backward. Parameters the loss never
  // reached are marked gradient-free.
  void collect(const std::vector<ad::Var>& bound);
  void zero_grad();
  // Updates parameters that received a gradient; untouched ones keep their
  // value and moments.
  void adam_step(const AdamConfig& cfg);

  // Text checkpoint with shape headers and hexfloat values; lossless.
  void save(std::ostream& os) const;
  static ParamStore load(std::istream& is);

  bool operator==(const ParamStore& other) const;

 private:
  std::vector<Param> params_;
  std::unordered_map<std::string, int> by_name_;
};

// Parameters bound to a tape, looked up by name.
class BoundParams {
 public:
  BoundParams(const ParamStore& store, std::vector<ad::Var> vars) : store_(&store), vars_(std::move(vars)) {}
  ad::Var operator[](const std::string& name) const;
  bool contains(const std::string& name) const { return store_->contains(name); }
  const std::vector<ad::Var>& vars() const { return vars_; }

 private:
  const ParamStore* store_;
  std::vector<ad::Var> vars_;
};

struct BackboneSpec {
  int hidden = 16;
  int layers = 2;
  int num_classes = 0;   // 0 for link prediction
  int num_clusters = 0;  // 0 disables the clustering head
  bool shared_transform = false;  // one completion transform for mean, gcn and ppnp
};

// Graph-derived constants for the forward pass.
struct BackboneGraph {
  int num_nodes = 0;
  std::vector<std::string> edge_types;
  std::vector<std::shared_ptr<const CsrMatrix>> relation_mean;  // per edge type, |V| x |V|
  struct InputBlock {
    std::string type;
    std::vector<int> nodes;  // global ids
    Matrix raw;
  };
  std::vector<InputBlock> inputs;  // attributed types
  std::vector<int> missing;        // global ids of missing nodes, canonical order
};

BackboneGraph make_backbone_graph(const HeteroGraph& g);

// Glorot-uniform weights, zero biases, zero completion weights and tables.
// With shared_transform the three topology operators read "completion.shared".
ParamStore init_params(const HeteroGraph& g, const BackboneSpec& spec, const CompletionContext& ctx,
                       std::uint64_t seed);

OpVars completion_vars(const BoundParams& p, const HeteroGraph& g);
OpWeights completion_weights(const ParamStore& store, const HeteroGraph& g);

// Hidden representations |V| x k. x_completed holds the |V-| completed rows.
ad::Var forward(ad::Tape& tape, const BackboneGraph& bg, const BoundParams& p, ad::Var x_completed, int layers);

ad::Var class_logits(const BoundParams& p, ad::Var hidden, std::vector<int> rows);
// Raw dot-product scores h_src . h_dst; probabilities are their sigmoid.
ad::Var edge_logits(ad::Var hidden, std::vector<int> src, std::vector<int> dst);

// Mean cross-entropy of logits against class labels.
ad::Var loss_node_classification(ad::Var logits, std::vector<int> labels);
// Mean binary cross-entropy with positives labeled 1 and negatives 0, from
// raw scores.
ad::Var loss_link_prediction(ad::Var logit_pos, ad::Var logit_neg);

}  // namespace hetcomplete

#endif  // HETCOMPLETE_BACKBONE_HPP_
