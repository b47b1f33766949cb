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


// The completion search space: four ways to synthesize attributes for nodes
// whose type carries none.
//
//   Mean    row(v) = mean{x_u : u in N+(v)} W
//   GcnAgg  row(v) = sum_{u in N+(v)} (deg v deg u)^(-1/2) x_u W
//   Ppnp    rows of restart (I - (1 - restart) A_hat)^(-1) X W, A_hat with self-loops
//   OneHot  row(v) = E_type[local(v)], a trainable per-type table
//
// N+(v) is the attributed part of v's neighborhood; degrees count all
// neighbors. X is the |V| x D input matrix with every attributed type placed in
// its own column block and zero rows for missing nodes.
//
// All three propagation operators are linear in W, so each is stored as a
// constant |V-| x D basis B_o and evaluated as B_o W. ppnp_completion() keeps
// the literal propagate-after-projection form for checking.

#ifndef HETCOMPLETE_COMPLETION_HPP_
#define HETCOMPLETE_COMPLETION_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetcomplete/autodiff.hpp"
#include "hetcomplete/hetgraph.hpp"
#include "hetcomplete/matrix.hpp"

namespace hetcomplete {

enum class OpKind : int { kMean = 0, kGcnAgg = 1, kPpnp = 2, kOneHot = 3 };
inline constexpr int kNumOps = 4;
inline constexpr std::array<OpKind, kNumOps> kAllOps{OpKind::kMean, OpKind::kGcnAgg, OpKind::kPpnp, OpKind::kOneHot};

const char* op_name(OpKind op);
// Accepts the names produced by op_name(); nullopt otherwise.
std::optional<OpKind> parse_op(const std::string& name);

struct CompletionSettings {
  double restart = 0.1;
  int ppnp_iterations = 50;
};

// Throws ValidationError unless restart is in (0, 1] and iterations >= 1.
void validate(const CompletionSettings& s);

struct CompletionContext {
  NodePartition partition;
  CompletionSettings settings;
  int num_nodes = 0;
  std::size_t input_dim = 0;               // D
  std::vector<std::size_t> column_offset;  // per type; meaningful for attributed types
  Matrix features;                         // |V| x D
  NormalizedAdjacency ppnp_adjacency;      // with self-loops
  CsrMatrix mean_table;                    // |V-| x |V|
  CsrMatrix gcn_table;                     // |V-| x |V|
  std::array<Matrix, 3> basis;             // Mean, GcnAgg, Ppnp; each |V-| x D
  std::vector<int> missing_types;          // type indices lacking attributes

  std::size_t num_missing() const { return partition.missing.size(); }
  const Matrix& basis_of(OpKind op) const { return basis[static_cast<std::size_t>(op)]; }
};

// adjacency must be built without self-loops.
CompletionContext make_context(const HeteroGraph& g, const AdjacencyView& adjacency, const CompletionSettings& s);

// Z <- (1 - restart) A_hat Z + restart X', Z0 = X', iterated k times.
Matrix ppnp_propagate(const CsrMatrix& a_hat, const Matrix& x, double restart, int k);

// ---- value-level operators --------------------------------------------------

struct OpWeights {
  Matrix mean;  // D x k
  Matrix gcn;
  Matrix ppnp;
  std::vector<Matrix> onehot;  // per type index; n_type x k for missing types, empty otherwise
};

Matrix mean_completion(const CompletionContext& ctx, const Matrix& w);
Matrix gcn_completion(const CompletionContext& ctx, const Matrix& w);
Matrix ppnp_completion(const CompletionContext& ctx, const Matrix& w);
Matrix onehot_completion(const CompletionContext& ctx, const std::vector<Matrix>& tables);
// One |V-| x k matrix per operator, in OpKind order.
std::array<Matrix, kNumOps> all_candidates(const CompletionContext& ctx, const OpWeights& w);

// ---- tape-level operators ---------------------------------------------------

struct OpVars {
  ad::Var mean;
  ad::Var gcn;
  ad::Var ppnp;
  std::vector<ad::Var> onehot;  // per type index
};

// Counts operator evaluations; one evaluation is one operator applied to one
// block of missing nodes.
class OpCounter {
 public:
  void add(OpKind op) { ++counts_[static_cast<std::size_t>(op)]; }
  std::uint64_t total() const { return counts_[0] + counts_[1] + counts_[2] + counts_[3]; }
  std::uint64_t of(OpKind op) const { return counts_[static_cast<std::size_t>(op)]; }
  void reset() { counts_ = {}; }

 private:
  std::array<std::uint64_t, kNumOps> counts_{};
};

// Evaluates `op` for the missing nodes at positions `rows` (indices into
// partition.missing). Output is rows.size() x k.
ad::Var evaluate_op(ad::Tape& tape, const CompletionContext& ctx, OpKind op, const OpVars& vars,
                    std::span<const int> rows, OpCounter* counter);

}  // namespace hetcomplete

#endif  // HETCOMPLETE_COMPLETION_HPP_
