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


// Data splits and evaluation metrics.

#ifndef HETCOMPLETE_EVALUATION_HPP_
#define HETCOMPLETE_EVALUATION_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace hetcomplete {

struct SplitRatios {
  double train = 0.24;
  double val = 0.06;
  double test = 0.70;
};

// Indices into the item list, each part sorted ascending.
struct Split {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

// Seeded uniform shuffle, then cut at round(n * train) and round(n * val);
// the remainder is test. Throws ValidationError if any part is empty.
Split make_splits(int num_items, const SplitRatios& ratios, std::uint64_t seed);

// Per-class F1 averaged over all num_classes classes; a class absent from both
// predictions and truth contributes 0.
double macro_f1(std::span<const int> pred, std::span<const int> truth, int num_classes);
double micro_f1(std::span<const int> pred, std::span<const int> truth, int num_classes);

// Probability that a random positive outscores a random negative, ties 0.5.
// Throws ValidationError when only one class is present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Rank of a positive among its candidate set: 1 + number of candidates
// scoring at least as high.
int candidate_rank(double positive, std::span<const double> negatives);
// Mean reciprocal rank over 1-based ranks.
double mrr(std::span<const int> ranks);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 with fewer than two values
};
MeanStd mean_std(std::span<const double> values);

// Deterministic generator used by splits and samplers.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  // Uniform in [0, n).
  std::uint64_t below(std::uint64_t n);
  double uniform();
  double normal();

 private:
  std::uint64_t state_;
};

}  // namespace hetcomplete

#endif  // HETCOMPLETE_EVALUATION_HPP_
