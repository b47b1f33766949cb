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


// Fixtures and brute-force reference computations shared by the unit tests
// and the acceptance binary. Nothing here calls into the library's numerics.

#ifndef HETCOMPLETE_TESTS_TEST_SUPPORT_HPP_
#define HETCOMPLETE_TESTS_TEST_SUPPORT_HPP_

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "hetcomplete/matrix.hpp"
#include "hetcomplete/autodiff.hpp"
#include "hetcomplete/backbone.hpp"
#include "hetcomplete/cluster.hpp"
#include "hetcomplete/planted.hpp"
#include "hetcomplete/search.hpp"

namespace hetcomplete::testing {

inline Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (double& v : m.values()) v = u(rng);
  return m;
}

using Edges = std::vector<std::pair<int, int>>;

// Erdos-Renyi graph plus a spanning path, so it is connected.
inline Edges random_graph(int n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  Edges e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j)
      if (coin(rng)) e.emplace_back(i, j);
  return e;
}

inline std::vector<std::vector<double>> dense_adjacency(int n, const Edges& edges) {
  std::vector<std::vector<double>> a(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (auto [u, v] : edges) {
    if (u == v) continue;
    a[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = 1.0;
    a[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = 1.0;
  }
  return a;
}

// Gauss-Jordan elimination with partial pivoting; b is overwritten by the solution.
inline void gauss_jordan(std::vector<std::vector<double>> a, std::vector<std::vector<double>>& b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    const double d = a[col][col];
    for (double& v : a[col]) v /= d;
    for (double& v : b[col]) v /= d;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0.0) continue;
      const double f = a[r][col];
      for (std::size_t c = 0; c < n; ++c) a[r][c] -= f * a[col][c];
      for (std::size_t c = 0; c < b[r].size(); ++c) b[r][c] -= f * b[col][c];
    }
  }
}

// restart * (I - (1 - restart) A_hat)^(-1) X with A_hat the self-looped
// symmetric normalization, solved densely.
inline Matrix ppnp_reference(int n, const Edges& edges, const Matrix& x, double restart) {
  auto a = dense_adjacency(n, edges);
  std::vector<double> deg(static_cast<std::size_t>(n), 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) deg[static_cast<std::size_t>(i)] += a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  std::vector<std::vector<double>> m(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) {
      const double ahat = (a[i][j] + (i == j ? 1.0 : 0.0)) / std::sqrt(deg[i] * deg[j]);
      m[i][j] = (i == j ? 1.0 : 0.0) - (1.0 - restart) * ahat;
    }
  std::vector<std::vector<double>> b(static_cast<std::size_t>(n), std::vector<double>(x.cols()));
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) b[i][j] = restart * x(i, j);
  gauss_jordan(m, b);
  Matrix z(static_cast<std::size_t>(n), x.cols());
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) z(i, j) = b[i][j];
  return z;
}

inline Matrix one_hot_rows(const std::vector<int>& label, int m) {
  Matrix c(label.size(), static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < label.size(); ++i) c(i, static_cast<std::size_t>(label[i])) = 1.0;
  return c;
}

// Newman modularity of a hard partition as the literal double sum
// (1/2m) sum_ij [A_ij - d_i d_j / 2m] delta(c_i, c_j).
inline double modularity_pairwise(int n, const Edges& edges, const std::vector<int>& label) {
  const auto a = dense_adjacency(n, edges);
  std::vector<double> d(static_cast<std::size_t>(n), 0.0);
  double two_m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (double v : a[i]) {
      d[i] += v;
      two_m += v;
    }
  double q = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (label[i] == label[j]) q += a[i][j] - d[i] * d[j] / two_m;
  return q / two_m;
}

// Nearest one-hot vector in Euclidean distance by enumeration, lowest index on ties.
inline std::vector<double> nearest_one_hot(std::span<const double> row) {
  std::size_t best = 0;
  double best_d = INFINITY;
  for (std::size_t k = 0; k < row.size(); ++k) {
    double d = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double t = row[j] - (j == k ? 1.0 : 0.0);
      d += t * t;
    }
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  std::vector<double> out(row.size(), 0.0);
  out[best] = 1.0;
  return out;
}

// A planted graph small enough for finite differences: 23 nodes, three
// groups, two classes.
inline PlantedSpec tiny_planted_spec(std::uint64_t seed = 3) {
  PlantedSpec s;
  s.seed = seed;
  s.groups = {{OpKind::kMean, 2, 1}, {OpKind::kPpnp, 2, 1}, {OpKind::kOneHot, 2, 2}};
  s.sinks = 1;
  s.anchors_per_class = 1;
  s.relays_per_entity = 1;
  s.item_noise = 0.2;
  return s;
}

inline SearchConfig tiny_config() {
  SearchConfig c;
  c.num_clusters = 2;
  c.hidden_dim = 4;
  c.layers = 2;
  c.split = {0.5, 0.25, 0.25};
  c.repeats = 1;
  c.epochs = 5;
  c.retrain_epochs = 5;
  return c;
}

inline void randomize(ParamStore& store, std::mt19937_64& rng, double scale = 0.5) {
  for (int i = 0; i < store.size(); ++i) {
    Matrix& v = store.at(i).value;
    v = random_matrix(v.rows(), v.cols(), rng, -scale, scale);
  }
}

// Binds `store` on `tape` as constants except parameter `which`, which is
// replaced by `leaf`.
inline BoundParams bind_with(ad::Tape& tape, const ParamStore& store, int which, ad::Var leaf) {
  std::vector<ad::Var> vars;
  for (int i = 0; i < store.size(); ++i) vars.push_back(i == which ? leaf : tape.constant(store.at(i).value));
  return BoundParams(store, std::move(vars));
}

// Training loss plus lambda times the clustering loss under a discrete assignment.
inline ad::Var problem_loss(ad::Tape& tape, const Problem& p, const BoundParams& bound, const Assignment& a,
                            double lambda) {
  const ad::Var x = complete_discrete(tape, p, completion_vars(bound, p.graph), a, nullptr);
  const ad::Var hidden = forward(tape, p.backbone, bound, x, p.config.layers);
  ad::Var loss = task_loss(p, bound, hidden, Part::kTrain, 0);
  if (lambda > 0.0) {
    const ModularityLoss ml = modularity_loss(assign_clusters(hidden, bound["cluster.theta"]), *p.modularity);
    loss = ad::add(loss, ad::scale(ml.total, lambda));
  }
  return loss;
}

// Worst finite-difference error over every parameter of `store`.
inline double worst_param_fd(const Problem& p, const ParamStore& store, const Assignment& a, double lambda) {
  double worst = 0.0;
  for (int i = 0; i < store.size(); ++i) {
    const double err = ad::finite_diff_check(
        [&](ad::Tape& tape, ad::Var leaf) { return problem_loss(tape, p, bind_with(tape, store, i, leaf), a, lambda); },
        store.at(i).value);
    worst = std::max(worst, err);
  }
  return worst;
}

// Missing nodes dealt round-robin to one cluster per operator in `ops`.
inline Assignment alternating_assignment(const Problem& p, std::vector<OpKind> ops) {
  Assignment a;
  a.ops = std::move(ops);
  for (std::size_t i = 0; i < p.num_missing(); ++i) a.cluster.push_back(static_cast<int>(i % a.ops.size()));
  return a;
}

}  // namespace hetcomplete::testing

#endif  // HETCOMPLETE_TESTS_TEST_SUPPORT_HPP_
