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

#include "hetcomplete/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hetcomplete/errors.hpp"

namespace hetcomplete::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const Matrix& a, const Matrix& b) {
  throw ContractViolation(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
}

Tape& tape_of(Var a) {
  HC_REQUIRE(a.valid(), "primitive applied to an unbound Var");
  return *a.tape();
}

Tape& tape_of(Var a, Var b) {
  HC_REQUIRE(a.valid() && b.valid(), "primitive applied to an unbound Var");
  HC_REQUIRE(a.tape() == b.tape(), "primitive inputs live on different tapes");
  return *a.tape();
}

}  // namespace

const Matrix& Var::value() const {
  HC_REQUIRE(valid(), "Var::value on an unbound Var");
  return tape_->value(*this);
}

const Matrix& Var::grad() const {
  HC_REQUIRE(valid(), "Var::grad on an unbound Var");
  return tape_->grad(*this);
}

double Var::scalar() const {
  const Matrix& v = value();
  HC_REQUIRE(v.rows() == 1 && v.cols() == 1, "Var::scalar on non-scalar " + v.shape_string());
  return v(0, 0);
}

void Tape::check_owned(Var v) const {
  HC_REQUIRE(v.tape() == this && v.id() >= 0 && static_cast<std::size_t>(v.id()) < nodes_.size(),
             "Var does not belong to this tape");
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::leaf(Matrix value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Matrix& Tape::value(Var v) const {
  check_owned(v);
  return nodes_[static_cast<std::size_t>(v.id())].value;
}

const Matrix& Tape::grad(Var v) const {
  check_owned(v);
  const Node& n = nodes_[static_cast<std::size_t>(v.id())];
  HC_REQUIRE(n.has_grad, "Tape::grad: no gradient recorded for this node");
  return n.grad;
}

bool Tape::has_grad(Var v) const {
  check_owned(v);
  return nodes_[static_cast<std::size_t>(v.id())].has_grad;
}

bool Tape::requires_grad(Var v) const {
  check_owned(v);
  return nodes_[static_cast<std::size_t>(v.id())].requires_grad;
}

Var Tape::record(Matrix value, std::vector<int> inputs, BackwardFn fn) {
#ifndef NDEBUG
  if (!all_finite(value)) throw ContractViolation("non-finite value produced on tape");
#endif
  Node n;
  n.value = std::move(value);
  for (int i : inputs) n.requires_grad = n.requires_grad || nodes_[static_cast<std::size_t>(i)].requires_grad;
  n.inputs = std::move(inputs);
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::backward(Var loss) {
  check_owned(loss);
  HC_REQUIRE(!consumed_, "Tape::backward called twice on the same tape");
  Node& root = nodes_[static_cast<std::size_t>(loss.id())];
  HC_REQUIRE(root.value.rows() == 1 && root.value.cols() == 1,
             "Tape::backward: loss must be scalar, got " + root.value.shape_string());
  consumed_ = true;
  if (!root.requires_grad) return;
  root.grad = Matrix(1, 1, 1.0);
  root.has_grad = true;

  std::vector<Matrix*> slots;
  for (std::size_t idx = static_cast<std::size_t>(loss.id()) + 1; idx-- > 0;) {
    Node& n = nodes_[idx];
    if (!n.has_grad || !n.backward) continue;
    slots.assign(n.inputs.size(), nullptr);
    for (std::size_t k = 0; k < n.inputs.size(); ++k) {
      Node& in = nodes_[static_cast<std::size_t>(n.inputs[k])];
      if (!in.requires_grad) continue;
      if (!in.has_grad) {
        in.grad = Matrix(in.value.rows(), in.value.cols());
        in.has_grad = true;
      }
      slots[k] = &in.grad;
    }
    n.backward(*this, n.grad, slots);
#ifndef NDEBUG
    for (Matrix* s : slots)
      if (s != nullptr && !all_finite(*s)) throw ContractViolation("non-finite gradient on tape");
#endif
  }
  // Release closures; values and gradients stay readable.
  for (Node& n : nodes_) n.backward = nullptr;
}

// ---- primitives ----------------------------------------------------------

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) shape_error("matmul", av, bv);
  const int ia = a.id(), ib = b.id();
  return t.record(hetcomplete::matmul(av, bv), {ia, ib},
                  [ia, ib](const Tape& tp, const Matrix& g, std::span<Matrix*> in) {
                    const Matrix& A = tp.value_at(ia);
                    const Matrix& B = tp.value_at(ib);
                    if (in[0]) in[0]->axpy(1.0, matmul_nt(g, B));
                    if (in[1]) in[1]->axpy(1.0, matmul_tn(A, g));
                  });
}

Var sparse_matmul(std::shared_ptr<const CsrMatrix> coefficients, Var x) {
  Tape& t = tape_of(x);
  HC_REQUIRE(coefficients != nullptr, "sparse_matmul: null coefficient table");
  const Matrix& xv = x.value();
  if (coefficients->cols != xv.rows())
    throw ContractViolation("sparse_matmul: shape mismatch (" + std::to_string(coefficients->rows) + "x" +
                            std::to_string(coefficients->cols) + ") vs " + xv.shape_string());
  Matrix out = coefficients->multiply(xv);
  return t.record(std::move(out), {x.id()},
                  [coefficients](const Tape&, const Matrix& g, std::span<Matrix*> in) {
                    if (in[0]) in[0]->axpy(1.0, coefficients->multiply_transposed(g));
                  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  if (!a.value().same_shape(b.value())) shape_error("add", a.value(), b.value());
  Matrix out = a.value();
  out.axpy(1.0, b.value());
  return t.record(std::move(out), {a.id(), b.id()}, [](const Tape&, const Matrix& g, std::span<Matrix*> in) {
    if (in[0]) in[0]->axpy(1.0, g);
    if (in[1]) in[1]->axpy(1.0, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  if (!a.value().same_shape(b.value())) shape_error("sub", a.value(), b.value());
  Matrix out = a.value();
  out.axpy(-1.0, b.value());
  return t.record(std::move(out), {a.id(), b.id()}, [](const Tape&, const Matrix& g, std::span<Matrix*> in) {
    if (in[0]) in[0]->axpy(1.0, g);
    if (in[1]) in[1]->axpy(-1.0, g);
  });
}

Var add_bias(Var a, Var bias) {
  Tape& t = tape_of(a, bias);
  const Matrix& av = a.value();
  const Matrix& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != av.cols()) shape_error("add_bias", av, bv);
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < out.cols(); ++j) r[j] += bv(0, j);
  }
  return t.record(std::move(out), {a.id(), bias.id()}, [](const Tape&, const Matrix& g, std::span<Matrix*> in) {
    if (in[0]) in[0]->axpy(1.0, g);
    if (in[1]) {
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) (*in[1])(0, j) += g(i, j);
    }
  });
}

Var add_scalar(Var a, double c) {
  Tape& t = tape_of(a);
  Matrix out = a.value();
  for (double& v : out.values()) v += c;
  return t.record(std::move(out), {a.id()}, [](const Tape&, const Matrix& g, std::span<Matrix*> in) {
    if (in[0]) in[0]->axpy(1.0, g);
  });
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  Matrix out = a.value();
  for (double& v : out.values()) v *= s;
  return t.record(std::move(out), {a.id()}, [s](const Tape&, const Matrix& g, std::span<Matrix*> in) {
    if (in[0]) in[0]->axpy(s, g);
  });
}

Var hadamard(Var a, Var b) {
  Tape& t = tape_of(a, b);
  if (!a.value().same_shape(b.value())) shape_error("hadamard", a.value(), b.value());
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= b.value().values()[i];
  const int ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [ia, ib](const Tape& tp, const Matrix& g, std::span<Matrix*> in) {
    const auto& A = tp.value_at(ia).values();
    const auto& B = tp.value_at(ib).values();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (in[0]) in[0]->values()[i] += g.values()[i] * B[i];
      if (in[1]) in[1]->values()[i] += g.values()[i] * A[i];
    }
  });
}

Var row_scale(Var a, Var s) {
  Tape& t = tape_of(a, s);
  const Matrix& av = a.value();
  const Matrix& sv = s.value();
  if (sv.cols() != 1 || sv.rows() != av.rows()) shape_error("row_scale", av, sv);
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (double& v : out.row(i)) v *= sv(i, 0);
  const int ia = a.id(), is = s.id();
  return t.record(std::move(out), {ia, is}, [ia, is](const Tape& tp, const Matrix& g, std::span<Matrix*> in) {
    const Matrix& A = tp.value_at(ia);
    const Matrix& S = tp.value_at(is);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) {
        if (in[0]) (*in[0])(i, j) += g(i, j) * S(i, 0);
        dot += g(i, j) * A(i, j);
      }
      if (in[1]) (*in[1])(i, 0) += dot;
    }
  });
}

Var select_column(Var a, std::size_t column) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  HC_REQUIRE(column < av.cols(), "select_column: column " + std::to_string(column) + " out of range for " +
                                     av.shape_string());
  Matrix out(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i) out(i, 0) = av(i, column);
  return t.record(std::move(out), {a.id()}, [column](const Tape&, const Matrix& g, std::span<Matrix*> in) {
    if (!in[0]) return;
    for (std::size_t i = 0; i < g.rows(); ++i) (*in[0])(i, column) += g(i, 0);
  });
}

Var row_softmax(Var a) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  Matrix out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    auto src = av.row(i);
    auto dst = out.row(i);
    if (src.empty()) continue;
    const double mx = *std::max_element(src.begin(), src.end());
    double z = 0.0;
    for (std::size_t j = 0; j < src.size(); ++j) {
      dst[j] = std::exp(src[j] - mx);
      z += dst[j];
    }
    for (double& v : dst) v /= z;
  }
  const int self = static_cast<int>(t.size());
  return t.record(std::move(out), {a.id()}, [self](const Tape& tp, const Matrix& g, std::span<Matrix*> in) {
    if (!in[0]) return;
    const Matrix& y = tp.value_at(self);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) dot += g(i, j) * y(i, j);
      for (std::size_t j = 0; j < g.cols(); ++j) (*in[0])(i, j) += y(i, j) * (g(i, j) - dot);
    }
  });
}

Var log_row_softmax(Var a) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  Matrix out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    auto src = av.row(i);
    auto dst = out.row(i);
    if (src.empty()) continue;
    const double mx = *std::max_element(src.begin(), src.end());
    double z = 0.0;
    for (double v : src) z += std::exp(v - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j] - lse;
  }
  const int self = static_cast<int>(t.size());
  return t.record(std::move(out), {a.id()}, [self](const Tape& tp, const Matrix& g, std::span<Matrix*> in) {
    if (!in[0]) return;
    const Matrix& y = tp.value_at(self);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      double gs = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) gs += g(i, j);
      for (std::size_t j = 0; j < g.cols(); ++j) (*in[0])(i, j) += g(i, j) - std::exp(y(i, j)) * gs;
    }
  });
}

Var elu(Var a) {
  Tape& t = tape_of(a);
  Matrix out = a.value();
  for (double& v : out.values())
    if (v <= 0.0) v = std::expm1(v);
  const int ia = a.id();
  return t.record(std::move(out), {ia}, [ia](const Tape& tp, const Matrix& g, std::span<Matrix*> in) {
    if (!in[0]) return;
    const auto& x = tp.value_at(ia).values();
    for (std::size_t i = 0; i < g.size(); ++i)
      in[0]->values()[i] += g.values()[i] * (x[i] > 0.0 ? 1.0 : std::exp(x[i]));
  });
}

Var log(Var a) {
  Tape& t = tape_of(a);
  Matrix out = a.value();
  for (double& v : out.values()) {
    HC_REQUIRE(v > 0.0, "log: non-positive input");
    v = std::log(v);
  }
  const int ia = a.id();
  return t.record(std::move(out), {ia}, [ia](const Tape& tp, const Matrix& g, std::span<Matrix*> in) {
    if (!in[0]) return;
    const auto& x = tp.value_at(ia).values();
    for (std::size_t i = 0; i < g.size(); ++i) in[0]->values()[i] += g.values()[i] / x[i];
  });
}

Var sigmoid(Var a) {
  Tape& t = tape_of(a);
  Matrix out = a.value();
  for (double& v : out.values()) v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  const int self = static_cast<int>(t.size());
  return t.record(std::move(out), {a.id()}, [self](const Tape& tp, const Matrix& g, std::span<Matrix*> in) {
    if (!in[0]) return;
    const auto& y = tp.value_at(self).values();
    for (std::size_t i = 0; i < g.size(); ++i) in[0]->values()[i] += g.values()[i] * y[i] * (1.0 - y[i]);
  });
}

Var log_sigmoid(Var a) {
  Tape& t = tape_of(a);
  Matrix out = a.value();
  // log(1 / (1 + e^-x)) = min(x, 0) - log1p(e^-|x|)
  for (double& v : out.values()) v = std::min(v, 0.0) - std::log1p(std::exp(-std::abs(v)));
  const int ia = a.id();
  return t.record(std::move(out), {ia}, [ia](const Tape& tp, const Matrix& g, std::span<Matrix*> in) {
    if (!in[0]) return;
    const auto& x = tp.value_at(ia).values();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = x[i] >= 0.0 ? std::exp(-x[i]) / (1.0 + std::exp(-x[i])) : 1.0 / (1.0 + std::exp(x[i]));
      in[0]->values()[i] += g.values()[i] * s;
    }
  });
}

Var gather_rows(Var a, std::vector<int> rows) {
  Tape& t = tape_of(a);
  Matrix out = hetcomplete::gather_rows(a.value(), rows);
  return t.record(std::move(out), {a.id()},
                  [rows = std::move(rows)](const Tape&, const Matrix& g, std::span<Matrix*> in) {
                    if (!in[0]) return;
                    for (std::size_t i = 0; i < rows.size(); ++i) {
                      auto dst = in[0]->row(static_cast<std::size_t>(rows[i]));
                      auto src = g.row(i);
                      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
                    }
                  });
}

Var scatter_add_rows(Var a, std::vector<int> rows, std::size_t n_out) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  HC_REQUIRE(rows.size() == av.rows(), "scatter_add_rows: index count " + std::to_string(rows.size()) +
                                           " does not match rows of " + av.shape_string());
  Matrix out(n_out, av.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    HC_REQUIRE(rows[i] >= 0 && static_cast<std::size_t>(rows[i]) < n_out, "scatter_add_rows: index out of range");
    auto dst = out.row(static_cast<std::size_t>(rows[i]));
    auto src = av.row(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
  }
  return t.record(std::move(out), {a.id()},
                  [rows = std::move(rows)](const Tape&, const Matrix& g, std::span<Matrix*> in) {
                    if (!in[0]) return;
                    for (std::size_t i = 0; i < rows.size(); ++i) {
                      auto src = g.row(static_cast<std::size_t>(rows[i]));
                      auto dst = in[0]->row(i);
                      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
                    }
                  });
}

Var gather_entries(Var a, std::vector<int> rows, std::vector<int> cols) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  HC_REQUIRE(rows.size() == cols.size(), "gather_entries: rows/cols length mismatch");
  Matrix out(rows.size(), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    HC_REQUIRE(rows[i] >= 0 && static_cast<std::size_t>(rows[i]) < av.rows() && cols[i] >= 0 &&
                   static_cast<std::size_t>(cols[i]) < av.cols(),
               "gather_entries: index out of range");
    out(i, 0) = av(static_cast<std::size_t>(rows[i]), static_cast<std::size_t>(cols[i]));
  }
  return t.record(std::move(out), {a.id()},
                  [rows = std::move(rows), cols = std::move(cols)](const Tape&, const Matrix& g,
                                                                   std::span<Matrix*> in) {
                    if (!in[0]) return;
                    for (std::size_t i = 0; i < rows.size(); ++i)
                      (*in[0])(static_cast<std::size_t>(rows[i]), static_cast<std::size_t>(cols[i])) += g(i, 0);
                  });
}

Var column_sums(Var a) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  Matrix out(1, av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(0, j) += av(i, j);
  return t.record(std::move(out), {a.id()}, [](const Tape&, const Matrix& g, std::span<Matrix*> in) {
    if (!in[0]) return;
    for (std::size_t i = 0; i < in[0]->rows(); ++i)
      for (std::size_t j = 0; j < in[0]->cols(); ++j) (*in[0])(i, j) += g(0, j);
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return t.record(Matrix(1, 1, s), {a.id()}, [](const Tape&, const Matrix& g, std::span<Matrix*> in) {
    if (!in[0]) return;
    for (double& v : in[0]->values()) v += g(0, 0);
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  HC_REQUIRE(n > 0, "mean of an empty matrix");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var frobenius_norm(Var a) {
  Tape& t = tape_of(a);
  const double norm = frobenius(a.value());
  const int ia = a.id();
  return t.record(Matrix(1, 1, norm), {ia}, [ia, norm](const Tape& tp, const Matrix& g, std::span<Matrix*> in) {
    if (!in[0] || norm == 0.0) return;  // subgradient 0 at the origin
    const auto& x = tp.value_at(ia).values();
    for (std::size_t i = 0; i < x.size(); ++i) in[0]->values()[i] += g(0, 0) * x[i] / norm;
  });
}

Var trace_quadratic_form(Var c, std::shared_ptr<const CsrMatrix> adjacency, std::vector<double> degrees,
                         double two_m) {
  Tape& t = tape_of(c);
  const Matrix& cv = c.value();
  HC_REQUIRE(adjacency != nullptr, "trace_quadratic_form: null adjacency");
  HC_REQUIRE(adjacency->rows == cv.rows() && adjacency->cols == cv.rows() && degrees.size() == cv.rows(),
             "trace_quadratic_form: adjacency/degrees do not match C " + cv.shape_string());
  HC_REQUIRE(two_m > 0.0, "trace_quadratic_form: two_m must be positive");
  // Tr(C^T A C) = sum_i <C_i, (A C)_i>;  Tr(C^T d d^T C) = ||d^T C||^2.
  const Matrix ac = adjacency->multiply(cv);
  double edge_part = 0.0;
  for (std::size_t i = 0; i < cv.size(); ++i) edge_part += cv.values()[i] * ac.values()[i];
  Matrix dtc(1, cv.cols());
  for (std::size_t i = 0; i < cv.rows(); ++i)
    for (std::size_t j = 0; j < cv.cols(); ++j) dtc(0, j) += degrees[i] * cv(i, j);
  double null_part = 0.0;
  for (double v : dtc.values()) null_part += v * v;
  const double value = edge_part - null_part / two_m;
  const int ic = c.id();
  return t.record(Matrix(1, 1, value), {ic},
                  [adjacency, degrees = std::move(degrees), two_m, ic](const Tape& tp, const Matrix& g,
                                                                       std::span<Matrix*> in) {
                    if (!in[0]) return;
                    // d/dC Tr(C^T B C) = 2 B C, B symmetric.
                    const Matrix& C = tp.value_at(ic);
                    const Matrix ac = adjacency->multiply(C);
                    Matrix dtc(1, C.cols());
                    for (std::size_t i = 0; i < C.rows(); ++i)
                      for (std::size_t j = 0; j < C.cols(); ++j) dtc(0, j) += degrees[i] * C(i, j);
                    const double s = g(0, 0);
                    for (std::size_t i = 0; i < C.rows(); ++i)
                      for (std::size_t j = 0; j < C.cols(); ++j)
                        (*in[0])(i, j) += s * 2.0 * (ac(i, j) - degrees[i] * dtc(0, j) / two_m);
                  });
}

// ---- gradient checking ---------------------------------------------------

double finite_diff_check(const LossBuilder& build, const Matrix& params, double h) {
  HC_REQUIRE(h > 0.0, "finite_diff_check: step must be positive");
  Matrix analytic;
  {
    Tape tape;
    Var p = tape.leaf(params, true);
    Var loss = build(tape, p);
    tape.backward(loss);
    analytic = tape.has_grad(p) ? tape.grad(p) : Matrix(params.rows(), params.cols());
  }
  auto eval = [&](const Matrix& at) {
    Tape tape;
    Var p = tape.leaf(at, true);
    return build(tape, p).scalar();
  };
  double worst = 0.0;
  Matrix probe = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double orig = params.values()[i];
    probe.values()[i] = orig + h;
    const double fp = eval(probe);
    probe.values()[i] = orig - h;
    const double fm = eval(probe);
    probe.values()[i] = orig;
    const double numeric = (fp - fm) / (2.0 * h);
    const double a = analytic.values()[i];
    worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a)));
  }
  return worst;
}

}  // namespace hetcomplete::ad
