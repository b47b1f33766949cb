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


#include "hetcomplete/completion.hpp"

#include <cmath>

#include "hetcomplete/errors.hpp"

namespace hetcomplete {

const char* op_name(OpKind op) {
  switch (op) {
    case OpKind::kMean: return "mean";
    case OpKind::kGcnAgg: return "gcn";
    case OpKind::kPpnp: return "ppnp";
    case OpKind::kOneHot: return "onehot";
  }
  return "?";
}

std::optional<OpKind> parse_op(const std::string& name) {
  for (OpKind op : kAllOps)
    if (name == op_name(op)) return op;
  return std::nullopt;
}

void validate(const CompletionSettings& s) {
  if (!(s.restart > 0.0 && s.restart <= 1.0)) throw ValidationError("ppnp_restart must lie in (0, 1]");
  if (s.ppnp_iterations < 1) throw ValidationError("ppnp_iterations must be >= 1");
}

Matrix ppnp_propagate(const CsrMatrix& a_hat, const Matrix& x, double restart, int k) {
  HC_REQUIRE(k >= 1, "ppnp_propagate: k must be >= 1");
  Matrix z = x;
  for (int it = 0; it < k; ++it) {
    Matrix next = a_hat.multiply(z);
    auto& nv = next.values();
    const auto& xv = x.values();
    for (std::size_t i = 0; i < nv.size(); ++i) nv[i] = (1.0 - restart) * nv[i] + restart * xv[i];
    z = std::move(next);
  }
  return z;
}

CompletionContext make_context(const HeteroGraph& g, const AdjacencyView& adjacency, const CompletionSettings& s) {
  validate(s);
  HC_REQUIRE(!adjacency.self_loops, "make_context: adjacency must not carry self-loops");
  HC_REQUIRE(adjacency.num_nodes == g.num_nodes(), "make_context: adjacency does not match graph");
  CompletionContext ctx;
  ctx.partition = partition_nodes(g);
  ctx.settings = s;
  ctx.num_nodes = g.num_nodes();

  ctx.column_offset.assign(static_cast<std::size_t>(g.num_types()), 0);
  for (int t = 0; t < g.num_types(); ++t) {
    if (const Matrix* m = g.attributes_of(t)) {
      ctx.column_offset[static_cast<std::size_t>(t)] = ctx.input_dim;
      ctx.input_dim += m->cols();
    } else {
      ctx.missing_types.push_back(t);
    }
  }
  ctx.features = Matrix(static_cast<std::size_t>(g.num_nodes()), ctx.input_dim);
  for (int t = 0; t < g.num_types(); ++t) {
    const Matrix* m = g.attributes_of(t);
    if (m == nullptr) continue;
    const std::size_t off = ctx.column_offset[static_cast<std::size_t>(t)];
    for (std::size_t l = 0; l < m->rows(); ++l) {
      auto dst = ctx.features.row(static_cast<std::size_t>(g.global_id(t, static_cast<int>(l))));
      auto src = m->row(l);
      std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(off));
    }
  }

  const auto& missing = ctx.partition.missing;
  const auto& is_missing = ctx.partition.missing_index;
  std::vector<CsrMatrix::Triplet> mean_t;
  std::vector<CsrMatrix::Triplet> gcn_t;
  for (std::size_t i = 0; i < missing.size(); ++i) {
    const int v = missing[i];
    std::vector<int> attributed;
    for (int u : adjacency.neighbors_of(v))
      if (is_missing[static_cast<std::size_t>(u)] < 0) attributed.push_back(u);
    const double dv = adjacency.degree[static_cast<std::size_t>(v)];
    for (int u : attributed) {
      const double du = adjacency.degree[static_cast<std::size_t>(u)];
      mean_t.push_back({static_cast<int>(i), u, 1.0 / static_cast<double>(attributed.size())});
      gcn_t.push_back({static_cast<int>(i), u, 1.0 / std::sqrt(dv * du)});
    }
  }
  const std::size_t n = static_cast<std::size_t>(g.num_nodes());
  ctx.mean_table = CsrMatrix::from_triplets(missing.size(), n, std::move(mean_t));
  ctx.gcn_table = CsrMatrix::from_triplets(missing.size(), n, std::move(gcn_t));

  AdjacencyView with_loops = adjacency;
  with_loops.self_loops = true;
  with_loops.degree_with_self_loop = adjacency.degree;
  for (double& d : with_loops.degree_with_self_loop) d += 1.0;
  ctx.ppnp_adjacency = sym_norm_coefficients(with_loops, true);

  ctx.basis[0] = ctx.mean_table.multiply(ctx.features);
  ctx.basis[1] = ctx.gcn_table.multiply(ctx.features);
  const Matrix propagated = ppnp_propagate(ctx.ppnp_adjacency.coefficients, ctx.features, s.restart, s.ppnp_iterations);
  ctx.basis[2] = gather_rows(propagated, missing);
  return ctx;
}

Matrix mean_completion(const CompletionContext& ctx, const Matrix& w) { return matmul(ctx.basis[0], w); }

Matrix gcn_completion(const CompletionContext& ctx, const Matrix& w) { return matmul(ctx.basis[1], w); }

Matrix ppnp_completion(const CompletionContext& ctx, const Matrix& w) {
  const Matrix projected = matmul(ctx.features, w);
  const Matrix z = ppnp_propagate(ctx.ppnp_adjacency.coefficients, projected, ctx.settings.restart,
                                  ctx.settings.ppnp_iterations);
  return gather_rows(z, ctx.partition.missing);
}

Matrix onehot_completion(const CompletionContext& ctx, const std::vector<Matrix>& tables) {
  const auto& p = ctx.partition;
  std::size_t k = 0;
  for (int t : ctx.missing_types) k = tables.at(static_cast<std::size_t>(t)).cols();
  Matrix out(p.missing.size(), k);
  for (std::size_t i = 0; i < p.missing.size(); ++i) {
    const int v = p.missing[i];
    const Matrix& table = tables.at(static_cast<std::size_t>(p.type_of[static_cast<std::size_t>(v)]));
    HC_REQUIRE(table.cols() == k, "onehot_completion: tables disagree on width");
    auto src = table.row(static_cast<std::size_t>(p.local_of[static_cast<std::size_t>(v)]));
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

std::array<Matrix, kNumOps> all_candidates(const CompletionContext& ctx, const OpWeights& w) {
  return {mean_completion(ctx, w.mean), gcn_completion(ctx, w.gcn), matmul(ctx.basis[2], w.ppnp),
          onehot_completion(ctx, w.onehot)};
}

ad::Var evaluate_op(ad::Tape& tape, const CompletionContext& ctx, OpKind op, const OpVars& vars,
                    std::span<const int> rows, OpCounter* counter) {
  if (counter != nullptr) counter->add(op);
  const std::size_t k = vars.mean.cols();
  if (op != OpKind::kOneHot) {
    const ad::Var& w = op == OpKind::kMean ? vars.mean : op == OpKind::kGcnAgg ? vars.gcn : vars.ppnp;
    return ad::matmul(tape.constant(gather_rows(ctx.basis_of(op), rows)), w);
  }
  const auto& p = ctx.partition;
  ad::Var out = tape.constant(Matrix(rows.size(), k));
  for (int t : ctx.missing_types) {
    std::vector<int> locals;
    std::vector<int> slots;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const int v = p.missing[static_cast<std::size_t>(rows[j])];
      if (p.type_of[static_cast<std::size_t>(v)] != t) continue;
      locals.push_back(p.local_of[static_cast<std::size_t>(v)]);
      slots.push_back(static_cast<int>(j));
    }
    if (locals.empty()) continue;
    const ad::Var picked = ad::gather_rows(vars.onehot.at(static_cast<std::size_t>(t)), std::move(locals));
    out = ad::add(out, ad::scatter_add_rows(picked, std::move(slots), rows.size()));
  }
  return out;
}

}  // namespace hetcomplete
