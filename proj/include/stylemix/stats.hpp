// Copyright 2026 The Stylemix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "stylemix/rng.hpp"

namespace stylemix {

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Population standard deviation.
inline double stddev_pop(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

// Ranks with ties assigned the average rank (1-based).
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// Spearman rank correlation; ties get average ranks.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(average_ranks(x), average_ranks(y));
}

// Area under the ROC curve for scores where positives should rank higher.
// Rank-sum (Mann-Whitney) form; tied scores contribute 1/2.
inline double roc_auc(const std::vector<double>& positive_scores,
                      const std::vector<double>& negative_scores) {
  if (positive_scores.empty() || negative_scores.empty()) return 0.5;
  std::vector<double> neg = negative_scores;
  std::sort(neg.begin(), neg.end());
  double u = 0.0;
  for (double p : positive_scores) {
    const auto lo = std::lower_bound(neg.begin(), neg.end(), p) - neg.begin();
    const auto hi = std::upper_bound(neg.begin(), neg.end(), p) - neg.begin();
    u += static_cast<double>(lo) + 0.5 * static_cast<double>(hi - lo);
  }
  return u / (static_cast<double>(positive_scores.size()) * static_cast<double>(neg.size()));
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

// 95% null band for classification accuracy under "predictions carry no label
// information": shuffle the true labels, keep the predictions. When several
// (prediction, label) sets are given the statistic is the mean accuracy
// across sets, matching how repeated-seed results are reported.
inline Interval permutation_accuracy_band(
    const std::vector<std::pair<std::vector<int>, std::vector<int>>>& pred_label_sets,
    int permutations, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> null_stats;
  null_stats.reserve(permutations);
  for (int b = 0; b < permutations; ++b) {
    double acc_sum = 0.0;
    int counted = 0;
    for (const auto& [preds, labels] : pred_label_sets) {
      if (preds.empty()) continue;
      std::vector<int> shuffled = labels;
      rng.shuffle(shuffled);
      std::size_t hits = 0;
      for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == shuffled[i];
      acc_sum += static_cast<double>(hits) / static_cast<double>(preds.size());
      ++counted;
    }
    if (counted > 0) null_stats.push_back(acc_sum / counted);
  }
  std::sort(null_stats.begin(), null_stats.end());
  if (null_stats.empty()) return {0.0, 1.0};
  const auto q = [&](double p) {
    const double pos = p * (static_cast<double>(null_stats.size()) - 1.0);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= null_stats.size()) return null_stats.back();
    return null_stats[i] * (1.0 - frac) + null_stats[i + 1] * frac;
  };
  return {q(0.025), q(0.975)};
}

}  // namespace stylemix
