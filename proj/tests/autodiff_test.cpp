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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hetcomplete/errors.hpp"

namespace hetcomplete::ad {
namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (double& v : m.values()) v = u(rng);
  return m;
}

TEST(Tape, ScalarSquare) {
  Tape t;
  Var w = t.leaf(Matrix(1, 1, 3.0));
  Var f = sum(hadamard(w, w));
  t.backward(f);
  EXPECT_DOUBLE_EQ(w.grad()(0, 0), 6.0);
}

TEST(Tape, SumOfProductGradient) {
  Tape t;
  Var x = t.constant(Matrix::from_rows({{1, 2}}));
  Var w = t.leaf(Matrix(2, 1, 0.3));
  t.backward(sum(matmul(x, w)));
  EXPECT_EQ(w.grad(), Matrix::from_rows({{1}, {2}}));
}

TEST(Tape, RejectsNonScalarLossAndSecondBackward) {
  Tape t;
  Var w = t.leaf(Matrix(2, 2, 1.0));
  EXPECT_THROW(t.backward(w), ContractViolation);
  Tape t2;
  Var v = t2.leaf(Matrix(1, 1, 1.0));
  Var s = sum(v);
  t2.backward(s);
  EXPECT_THROW(t2.backward(s), ContractViolation);
}

TEST(Primitives, ForwardValues) {
  Tape t;
  EXPECT_DOUBLE_EQ(matmul(t.constant(Matrix::from_rows({{1, 2}})), t.constant(Matrix::from_rows({{3}, {4}}))).scalar(),
                   11.0);
  Var sm = row_softmax(t.constant(Matrix(1, 2, 0.0)));
  EXPECT_DOUBLE_EQ(sm.value()(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(sm.value()(0, 1), 0.5);
  Var e = elu(t.constant(Matrix::from_rows({{2.0, -50.0}})));
  EXPECT_DOUBLE_EQ(e.value()(0, 0), 2.0);
  EXPECT_NEAR(e.value()(0, 1), -1.0, 1e-12);
}

TEST(Primitives, AdditiveAccumulation) {
  std::mt19937_64 rng(3);
  const Matrix w0 = random_matrix(3, 2, rng);
  const Matrix x = random_matrix(4, 3, rng);
  auto grad_of = [&](int which) {
    Tape t;
    Var w = t.leaf(w0);
    Var h = matmul(t.constant(x), w);
    Var l1 = sum(elu(h));
    Var l2 = frobenius_norm(h);
    t.backward(which == 0 ? l1 : which == 1 ? l2 : add(l1, l2));
    return w.grad();
  };
  Matrix both = grad_of(0);
  both.axpy(1.0, grad_of(1));
  EXPECT_LT(max_abs_diff(both, grad_of(2)), 1e-12);
}

TEST(Primitives, BitwiseRepeatable) {
  std::mt19937_64 rng(9);
  const Matrix w0 = random_matrix(3, 3, rng);
  auto run = [&] {
    Tape t;
    Var w = t.leaf(w0);
    t.backward(sum(log(row_softmax(matmul(w, w)))));
    return w.grad();
  };
  EXPECT_EQ(run(), run());
}

TEST(FiniteDiff, SquareIsTight) {
  const double err = finite_diff_check([](Tape&, Var w) { return sum(hadamard(w, w)); }, Matrix(1, 1, 3.0));
  EXPECT_LT(err, 1e-8);
}

TEST(FiniteDiff, SoftmaxCrossEntropy) {
  std::mt19937_64 rng(5);
  const Matrix logits = random_matrix(5, 3, rng, -2, 2);
  const double err = finite_diff_check(
      [](Tape&, Var z) {
        return scale(mean(log(gather_entries(row_softmax(z), {0, 1, 2, 3, 4}, {2, 0, 1, 1, 0}))), -1.0);
      },
      logits);
  EXPECT_LT(err, 1e-6);
}

}  // namespace
}  // namespace hetcomplete::ad
