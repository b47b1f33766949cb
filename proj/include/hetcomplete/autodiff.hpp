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

// Reverse-mode differentiation over dense matrices.
//
// A Tape records every primitive application in execution order. Var is a
// cheap handle (tape pointer + node index). Leaves are created with
// Tape::leaf(); constants with Tape::constant(). Calling Tape::backward() on
// a 1x1 loss walks the records in reverse once and fills the gradient of
// every node that (transitively) depends on a requires_grad leaf.
//
// All reductions run in a fixed order, so repeated runs are bitwise
// identical. In debug builds every primitive checks its output for NaN/Inf.

#ifndef HETCOMPLETE_AUTODIFF_HPP_
#define HETCOMPLETE_AUTODIFF_HPP_

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "hetcomplete/matrix.hpp"

namespace hetcomplete::ad {

class Tape;

class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }

  const Matrix& value() const;
  const Matrix& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  // Convenience for 1x1 results.
  double scalar() const;

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  // Receives the gradient of the node's output and one slot per input; a
  // slot is null when that input does not need a gradient.
  using BackwardFn = std::function<void(const Tape&, const Matrix& out_grad, std::span<Matrix*> in_grads)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var leaf(Matrix value, bool requires_grad = true);

  const Matrix& value(Var v) const;
  const Matrix& grad(Var v) const;
  const Matrix& value_at(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool has_grad(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  // Accumulates d(loss)/d(node) into every node on the path to a
  // requires_grad leaf. The tape may not be differentiated twice.
  void backward(Var loss);

  // Used by primitives. Records a node whose inputs are `inputs`.
  Var record(Matrix value, std::vector<int> inputs, BackwardFn fn);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool has_grad = false;
    std::vector<int> inputs;
    BackwardFn backward;
  };

  void check_owned(Var v) const;

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

// ---- primitives ----------------------------------------------------------

Var matmul(Var a, Var b);
// Sparse coefficient table times dense matrix. The table must outlive the
// tape, hence the shared pointer.
Var sparse_matmul(std::shared_ptr<const CsrMatrix> coefficients, Var x);
Var add(Var a, Var b);
Var sub(Var a, Var b);
// a + broadcast of a 1 x cols row vector.
Var add_bias(Var a, Var bias);
Var add_scalar(Var a, double c);
Var scale(Var a, double s);
Var hadamard(Var a, Var b);
// Multiplies row i of a (n x k) by s(i, 0), s is n x 1.
Var row_scale(Var a, Var s);
Var select_column(Var a, std::size_t column);
Var row_softmax(Var a);
// Numerically stable log(row_softmax(a)).
Var log_row_softmax(Var a);
// ELU with slope 1: x for x > 0, exp(x) - 1 otherwise.
Var elu(Var a);
Var log(Var a);
Var sigmoid(Var a);
// log(sigmoid(a)) without overflow.
Var log_sigmoid(Var a);
Var gather_rows(Var a, std::vector<int> rows);
// Output has n_out rows; row rows[i] receives += a.row(i).
Var scatter_add_rows(Var a, std::vector<int> rows, std::size_t n_out);
// Picks a(rows[i], cols[i]) into an n x 1 column.
Var gather_entries(Var a, std::vector<int> rows, std::vector<int> cols);
Var column_sums(Var a);
Var sum(Var a);
Var mean(Var a);
Var frobenius_norm(Var a);
// Tr(C^T B C) with B = A - d d^T / two_m, never materializing B. A is a
// symmetric 0/1 adjacency over the rows of C, d its degree vector and
// two_m = sum(d).
Var trace_quadratic_form(Var c, std::shared_ptr<const CsrMatrix> adjacency, std::vector<double> degrees,
                         double two_m);

// ---- gradient checking ---------------------------------------------------

// Builds a scalar loss from a parameter leaf on a fresh tape.
using LossBuilder = std::function<Var(Tape&, Var param)>;

// Max over entries of |analytic - central difference| / max(1, |analytic|).
double finite_diff_check(const LossBuilder& build, const Matrix& params, double h = 1e-5);

}  // namespace hetcomplete::ad

#endif  // HETCOMPLETE_AUTODIFF_HPP_
