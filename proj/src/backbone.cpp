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


#include "hetcomplete/backbone.hpp"

#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "hetcomplete/errors.hpp"

namespace hetcomplete {

void adam_update(Matrix& param, const Matrix& grad, AdamState& state, const AdamConfig& cfg) {
  HC_REQUIRE(param.same_shape(grad), "adam_update shape mismatch " + param.shape_string() + " vs " + grad.shape_string());
  if (state.m.size() != param.size()) {
    state.m = Matrix(param.rows(), param.cols());
    state.v = Matrix(param.rows(), param.cols());
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const double decay = 1.0 - cfg.lr * cfg.weight_decay;
  auto& p = param.values();
  auto& m = state.m.values();
  auto& v = state.v.values();
  const auto& g = grad.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    p[i] *= decay;
    p[i] -= cfg.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.eps);
  }
}

// ---- ParamStore ---------------------------------------------------------------

int ParamStore::add(const std::string& name, Matrix init) {
  HC_REQUIRE(by_name_.count(name) == 0, "ParamStore: duplicate parameter '" + name + "'");
  Param p;
  p.name = name;
  p.grad = Matrix(init.rows(), init.cols());
  p.value = std::move(init);
  params_.push_back(std::move(p));
  const int id = static_cast<int>(params_.size()) - 1;
  by_name_.emplace(name, id);
  return id;
}

int ParamStore::index(const std::string& name) const {
  const auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : it->second;
}

Matrix& ParamStore::value(const std::string& name) {
  const int i = index(name);
  HC_REQUIRE(i >= 0, "ParamStore: unknown parameter '" + name + "'");
  return params_[static_cast<std::size_t>(i)].value;
}

const Matrix& ParamStore::value(const std::string& name) const {
  const int i = index(name);
  HC_REQUIRE(i >= 0, "ParamStore: unknown parameter '" + name + "'");
  return params_[static_cast<std::size_t>(i)].value;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::vector<ad::Var> ParamStore::bind(ad::Tape& tape, bool requires_grad) const {
  std::vector<ad::Var> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(tape.leaf(p.value, requires_grad));
  return out;
}

void ParamStore::collect(const std::vector<ad::Var>& bound) {
  HC_REQUIRE(bound.size() == params_.size(), "ParamStore::collect: binding does not match store");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    ad::Tape& t = *bound[i].tape();
    Param& p = params_[i];
    p.has_grad = t.has_grad(bound[i]);
    if (p.has_grad)
      p.grad = t.grad(bound[i]);
    else
      p.grad.fill(0.0);
  }
}

void ParamStore::zero_grad() {
  for (auto& p : params_) {
    p.grad.fill(0.0);
    p.has_grad = false;
  }
}

void ParamStore::adam_step(const AdamConfig& cfg) {
  for (auto& p : params_)
    if (p.has_grad) adam_update(p.value, p.grad, p.adam, cfg);
}

void ParamStore::save(std::ostream& os) const {
  os << "hetcomplete-params 1\n" << params_.size() << "\n";
  std::ostringstream buf;
  buf << std::hexfloat;
  for (const auto& p : params_) {
    buf << p.name << " " << p.value.rows() << " " << p.value.cols() << "\n";
    for (std::size_t r = 0; r < p.value.rows(); ++r) {
      for (std::size_t c = 0; c < p.value.cols(); ++c) buf << (c ? " " : "") << p.value(r, c);
      buf << "\n";
    }
  }
  os << buf.str();
}

ParamStore ParamStore::load(std::istream& is) {
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  if (!(is >> magic >> version >> count) || magic != "hetcomplete-params" || version != 1)
    throw ValidationError("checkpoint: bad header");
  ParamStore store;
  for (std::size_t i = 0; i < count; ++i) {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    if (!(is >> name >> rows >> cols)) throw ValidationError("checkpoint: truncated parameter header");
    Matrix m(rows, cols);
    for (double& v : m.values()) {
      std::string tok;
      if (!(is >> tok)) throw ValidationError("checkpoint: truncated values for '" + name + "'");
      char* end = nullptr;
      v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') throw ValidationError("checkpoint: bad number '" + tok + "'");
    }
    store.add(name, std::move(m));
  }
  return store;
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name != other.params_[i].name || !(params_[i].value == other.params_[i].value)) return false;
  return true;
}

ad::Var BoundParams::operator[](const std::string& name) const {
  const int i = store_->index(name);
  HC_REQUIRE(i >= 0, "unknown parameter '" + name + "'");
  return vars_[static_cast<std::size_t>(i)];
}

// ---- graph constants --------------------------------------------------------------

BackboneGraph make_backbone_graph(const HeteroGraph& g) {
  BackboneGraph bg;
  bg.num_nodes = g.num_nodes();
  const std::size_t n = static_cast<std::size_t>(g.num_nodes());
  for (int e = 0; e < static_cast<int>(g.edge_types().size()); ++e) {
    bg.edge_types.push_back(g.edge_types()[static_cast<std::size_t>(e)].name);
    const auto& rel = g.relation(e);
    std::vector<int> count(n, 0);
    for (const auto& [u, v] : rel) ++count[static_cast<std::size_t>(u)];
    std::vector<CsrMatrix::Triplet> t;
    t.reserve(rel.size());
    for (const auto& [u, v] : rel) t.push_back({u, v, 1.0 / count[static_cast<std::size_t>(u)]});
    bg.relation_mean.push_back(std::make_shared<CsrMatrix>(CsrMatrix::from_triplets(n, n, std::move(t))));
  }
  for (int t = 0; t < g.num_types(); ++t) {
    const Matrix* m = g.attributes_of(t);
    if (m == nullptr) {
      for (int l = 0; l < g.node_types()[static_cast<std::size_t>(t)].count; ++l) bg.missing.push_back(g.global_id(t, l));
      continue;
    }
    BackboneGraph::InputBlock block;
    block.type = g.node_types()[static_cast<std::size_t>(t)].name;
    for (int l = 0; l < g.node_types()[static_cast<std::size_t>(t)].count; ++l) block.nodes.push_back(g.global_id(t, l));
    block.raw = *m;
    bg.inputs.push_back(std::move(block));
  }
  return bg;
}

namespace {

Matrix glorot(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(fan_in, fan_out);
  for (double& v : m.values()) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = (2.0 * u - 1.0) * limit;
  }
  return m;
}

}  // namespace

ParamStore init_params(const HeteroGraph& g, const BackboneSpec& spec, const CompletionContext& ctx,
                       std::uint64_t seed) {
  HC_REQUIRE(spec.hidden >= 1 && spec.layers >= 1, "init_params: hidden and layers must be positive");
  std::mt19937_64 rng(seed);
  const std::size_t k = static_cast<std::size_t>(spec.hidden);
  ParamStore s;
  for (int t = 0; t < g.num_types(); ++t) {
    const Matrix* m = g.attributes_of(t);
    if (m == nullptr) continue;
    const std::string& name = g.node_types()[static_cast<std::size_t>(t)].name;
    s.add("input." + name, glorot(m->cols(), k, rng));
    s.add("input_bias." + name, Matrix(1, k));
  }
  for (int l = 0; l < spec.layers; ++l) {
    const std::string pre = "layer" + std::to_string(l) + ".";
    s.add(pre + "self", glorot(k, k, rng));
    s.add(pre + "bias", Matrix(1, k));
    for (const auto& e : g.edge_types()) s.add(pre + "rel." + e.name, glorot(k, k, rng));
  }
  if (spec.num_classes > 0) {
    s.add("head.cls", glorot(k, static_cast<std::size_t>(spec.num_classes), rng));
    s.add("head.cls_bias", Matrix(1, static_cast<std::size_t>(spec.num_classes)));
  }
  if (spec.num_clusters > 0) s.add("cluster.theta", glorot(k, static_cast<std::size_t>(spec.num_clusters), rng));
  if (spec.shared_transform) {
    s.add("completion.shared", Matrix(ctx.input_dim, k));
  } else {
    s.add("completion.mean", Matrix(ctx.input_dim, k));
    s.add("completion.gcn", Matrix(ctx.input_dim, k));
    s.add("completion.ppnp", Matrix(ctx.input_dim, k));
  }
  for (int t : ctx.missing_types) {
    const auto& nt = g.node_types()[static_cast<std::size_t>(t)];
    s.add("completion.onehot." + nt.name, Matrix(static_cast<std::size_t>(nt.count), k));
  }
  return s;
}

OpVars completion_vars(const BoundParams& p, const HeteroGraph& g) {
  OpVars v;
  if (p.contains("completion.shared")) {
    v.mean = v.gcn = v.ppnp = p["completion.shared"];
  } else {
    v.mean = p["completion.mean"];
    v.gcn = p["completion.gcn"];
    v.ppnp = p["completion.ppnp"];
  }
  v.onehot.resize(static_cast<std::size_t>(g.num_types()));
  for (int t = 0; t < g.num_types(); ++t)
    if (!g.has_attributes(t)) v.onehot[static_cast<std::size_t>(t)] = p["completion.onehot." + g.node_types()[static_cast<std::size_t>(t)].name];
  return v;
}

OpWeights completion_weights(const ParamStore& store, const HeteroGraph& g) {
  OpWeights w;
  if (store.contains("completion.shared")) {
    w.mean = w.gcn = w.ppnp = store.value("completion.shared");
  } else {
    w.mean = store.value("completion.mean");
    w.gcn = store.value("completion.gcn");
    w.ppnp = store.value("completion.ppnp");
  }
  w.onehot.resize(static_cast<std::size_t>(g.num_types()));
  for (int t = 0; t < g.num_types(); ++t)
    if (!g.has_attributes(t))
      w.onehot[static_cast<std::size_t>(t)] = store.value("completion.onehot." + g.node_types()[static_cast<std::size_t>(t)].name);
  return w;
}

// ---- forward and heads ---------------------------------------------------------------

ad::Var forward(ad::Tape& tape, const BackboneGraph& bg, const BoundParams& p, ad::Var x_completed, int layers) {
  const std::size_t n = static_cast<std::size_t>(bg.num_nodes);
  HC_REQUIRE(x_completed.rows() == bg.missing.size(),
             "forward: completed attributes have " + std::to_string(x_completed.rows()) + " rows, expected " +
                 std::to_string(bg.missing.size()));
  ad::Var h = ad::scatter_add_rows(x_completed, bg.missing, n);
  for (const auto& block : bg.inputs) {
    ad::Var proj = ad::add_bias(ad::matmul(tape.constant(block.raw), p["input." + block.type]),
                                p["input_bias." + block.type]);
    h = ad::add(h, ad::scatter_add_rows(proj, block.nodes, n));
  }
  for (int l = 0; l < layers; ++l) {
    const std::string pre = "layer" + std::to_string(l) + ".";
    ad::Var z = ad::add_bias(ad::matmul(h, p[pre + "self"]), p[pre + "bias"]);
    for (std::size_t e = 0; e < bg.edge_types.size(); ++e) {
      if (bg.relation_mean[e]->nnz() == 0) continue;
      z = ad::add(z, ad::sparse_matmul(bg.relation_mean[e], ad::matmul(h, p[pre + "rel." + bg.edge_types[e]])));
    }
    h = ad::elu(z);
  }
  return h;
}

ad::Var class_logits(const BoundParams& p, ad::Var hidden, std::vector<int> rows) {
  return ad::add_bias(ad::matmul(ad::gather_rows(hidden, std::move(rows)), p["head.cls"]), p["head.cls_bias"]);
}

ad::Var edge_logits(ad::Var hidden, std::vector<int> src, std::vector<int> dst) {
  HC_REQUIRE(src.size() == dst.size(), "edge_logits: endpoint lists differ in length");
  ad::Tape& t = *hidden.tape();
  const ad::Var prod = ad::hadamard(ad::gather_rows(hidden, std::move(src)), ad::gather_rows(hidden, std::move(dst)));
  return ad::matmul(prod, t.constant(Matrix(hidden.cols(), 1, 1.0)));
}

ad::Var loss_node_classification(ad::Var logits, std::vector<int> labels) {
  HC_REQUIRE(!labels.empty(), "loss_node_classification: empty split");
  HC_REQUIRE(labels.size() == logits.rows(), "loss_node_classification: label count differs from logit rows");
  std::vector<int> rows(labels.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  return ad::scale(ad::mean(ad::gather_entries(ad::log_row_softmax(logits), std::move(rows), std::move(labels))), -1.0);
}

ad::Var loss_link_prediction(ad::Var logit_pos, ad::Var logit_neg) {
  HC_REQUIRE(logit_pos.rows() > 0 && logit_neg.rows() > 0, "loss_link_prediction: empty positive or negative set");
  const double n = static_cast<double>(logit_pos.rows() + logit_neg.rows());
  const ad::Var pos = ad::sum(ad::log_sigmoid(logit_pos));
  const ad::Var neg = ad::sum(ad::log_sigmoid(ad::scale(logit_neg, -1.0)));
  return ad::scale(ad::add(pos, neg), -1.0 / n);
}

}  // namespace hetcomplete
