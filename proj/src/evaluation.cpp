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


#include "hetcomplete/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hetcomplete/errors.hpp"

namespace hetcomplete {

std::uint64_t SplitMix::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix::below(std::uint64_t n) {
  HC_REQUIRE(n > 0, "SplitMix::below: empty range");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % n;
}

double SplitMix::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

Split make_splits(int num_items, const SplitRatios& ratios, std::uint64_t seed) {
  if (ratios.train <= 0 || ratios.val <= 0 || ratios.test <= 0)
    throw ValidationError("split ratios must all be positive");
  std::vector<int> order(static_cast<std::size_t>(std::max(num_items, 0)));
  std::iota(order.begin(), order.end(), 0);
  SplitMix rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const double total = ratios.train + ratios.val + ratios.test;
  const auto n_train = static_cast<std::size_t>(std::llround(num_items * ratios.train / total));
  const auto n_val = static_cast<std::size_t>(std::llround(num_items * ratios.val / total));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= order.size())
    throw ValidationError("split of " + std::to_string(num_items) + " items leaves an empty train, val or test part");
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
               order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

namespace {

struct Confusion {
  std::vector<double> tp, fp, fn;
};

Confusion confusion(std::span<const int> pred, std::span<const int> truth, int num_classes) {
  if (pred.size() != truth.size()) throw ValidationError("metric inputs differ in length");
  Confusion c{std::vector<double>(static_cast<std::size_t>(num_classes)),
              std::vector<double>(static_cast<std::size_t>(num_classes)),
              std::vector<double>(static_cast<std::size_t>(num_classes))};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int p = pred[i];
    const int t = truth[i];
    if (p < 0 || p >= num_classes || t < 0 || t >= num_classes) throw ValidationError("label outside [0, C)");
    if (p == t) {
      c.tp[static_cast<std::size_t>(p)] += 1;
    } else {
      c.fp[static_cast<std::size_t>(p)] += 1;
      c.fn[static_cast<std::size_t>(t)] += 1;
    }
  }
  return c;
}

double f1(double tp, double fp, double fn) {
  const double denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2 * tp / denom;
}

}  // namespace

double macro_f1(std::span<const int> pred, std::span<const int> truth, int num_classes) {
  const Confusion c = confusion(pred, truth, num_classes);
  double s = 0;
  for (int k = 0; k < num_classes; ++k)
    s += f1(c.tp[static_cast<std::size_t>(k)], c.fp[static_cast<std::size_t>(k)], c.fn[static_cast<std::size_t>(k)]);
  return s / num_classes;
}

double micro_f1(std::span<const int> pred, std::span<const int> truth, int num_classes) {
  const Confusion c = confusion(pred, truth, num_classes);
  const double tp = std::accumulate(c.tp.begin(), c.tp.end(), 0.0);
  const double fp = std::accumulate(c.fp.begin(), c.fp.end(), 0.0);
  const double fn = std::accumulate(c.fn.begin(), c.fn.end(), 0.0);
  return f1(tp, fp, fn);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("metric inputs differ in length");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double n_pos = 0;
  double rank_sum = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (labels[idx[k]] == 1) {
        rank_sum += avg_rank;
        n_pos += 1;
      }
    i = j;
  }
  const double n_neg = static_cast<double>(scores.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValidationError("ROC-AUC is undefined with a single class");
  return (rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg);
}

int candidate_rank(double positive, std::span<const double> negatives) {
  int r = 1;
  for (double s : negatives) r += s >= positive ? 1 : 0;
  return r;
}

double mrr(std::span<const int> ranks) {
  if (ranks.empty()) throw ValidationError("MRR needs at least one positive");
  double s = 0;
  for (int r : ranks) s += 1.0 / r;
  return s / static_cast<double>(ranks.size());
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return out;
}

}  // namespace hetcomplete
