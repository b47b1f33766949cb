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

#include "hetcomplete/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hetcomplete/errors.hpp"

namespace hetcomplete {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  HC_REQUIRE(data_.size() == rows * cols, "Matrix: value count does not match shape");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    HC_REQUIRE(row.size() == c, "Matrix::from_rows: ragged rows");
    std::copy(row.begin(), row.end(), m.row(i).begin());
    ++i;
  }
  return m;
}

std::string Matrix::shape_string() const {
  std::ostringstream os;
  os << "(" << rows_ << "x" << cols_ << ")";
  return os.str();
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Matrix::axpy(double scale, const Matrix& other) {
  HC_REQUIRE(same_shape(other), "axpy shape mismatch " + shape_string() + " vs " + other.shape_string());
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  HC_REQUIRE(a.cols() == b.rows(), "matmul shape mismatch " + a.shape_string() + " * " + b.shape_string());
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  HC_REQUIRE(a.rows() == b.rows(), "matmul_tn shape mismatch " + a.shape_string() + "^T * " + b.shape_string());
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto arow = a.row(k);
    auto brow = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      auto orow = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aki * brow[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  HC_REQUIRE(a.cols() == b.cols(), "matmul_nt shape mismatch " + a.shape_string() + " * " + b.shape_string() + "^T");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto arow = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto brow = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += arow[k] * brow[k];
      out(i, j) = s;
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix gather_rows(const Matrix& a, std::span<const int> rows) {
  Matrix out(rows.size(), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    HC_REQUIRE(rows[i] >= 0 && static_cast<std::size_t>(rows[i]) < a.rows(), "gather_rows: index out of range");
    auto src = a.row(static_cast<std::size_t>(rows[i]));
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  HC_REQUIRE(a.same_shape(b), "max_abs_diff shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

double frobenius(const Matrix& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return std::sqrt(s);
}

bool all_finite(const Matrix& a) {
  return std::all_of(a.values().begin(), a.values().end(), [](double v) { return std::isfinite(v); });
}

CsrMatrix CsrMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const auto& t = triplets[i];
    HC_REQUIRE(t.row >= 0 && static_cast<std::size_t>(t.row) < rows && t.col >= 0 &&
                   static_cast<std::size_t>(t.col) < cols,
               "CsrMatrix::from_triplets: index out of range");
    if (!m.col.empty() && i > 0 && triplets[i - 1].row == t.row && triplets[i - 1].col == t.col) {
      m.val.back() += t.value;
      continue;
    }
    m.col.push_back(t.col);
    m.val.push_back(t.value);
    m.row_ptr[static_cast<std::size_t>(t.row) + 1]++;
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  return m;
}

Matrix CsrMatrix::multiply(const Matrix& dense) const {
  HC_REQUIRE(cols == dense.rows(), "sparse_matmul shape mismatch (" + std::to_string(rows) + "x" +
                                       std::to_string(cols) + ") * " + dense.shape_string());
  Matrix out(rows, dense.cols());
  for (std::size_t r = 0; r < rows; ++r) {
    auto orow = out.row(r);
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      auto drow = dense.row(static_cast<std::size_t>(col[p]));
      const double v = val[p];
      for (std::size_t j = 0; j < dense.cols(); ++j) orow[j] += v * drow[j];
    }
  }
  return out;
}

Matrix CsrMatrix::multiply_transposed(const Matrix& dense) const {
  HC_REQUIRE(rows == dense.rows(), "sparse_matmul^T shape mismatch");
  Matrix out(cols, dense.cols());
  for (std::size_t r = 0; r < rows; ++r) {
    auto drow = dense.row(r);
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      auto orow = out.row(static_cast<std::size_t>(col[p]));
      const double v = val[p];
      for (std::size_t j = 0; j < dense.cols(); ++j) orow[j] += v * drow[j];
    }
  }
  return out;
}

Matrix CsrMatrix::to_dense() const {
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) out(r, static_cast<std::size_t>(col[p])) += val[p];
  return out;
}

Matrix solve_dense(Matrix a, Matrix b) {
  HC_REQUIRE(a.rows() == a.cols() && a.rows() == b.rows(), "solve_dense shape mismatch");
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) < 1e-300) throw ContractViolation("solve_dense: singular matrix");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
    }
  }
  Matrix x(n, b.cols());
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = b(ii, j);
      for (std::size_t k = ii + 1; k < n; ++k) s -= a(ii, k) * x(k, j);
      x(ii, j) = s / a(ii, ii);
    }
  }
  return x;
}

}  // namespace hetcomplete
