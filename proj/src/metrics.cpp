// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include "fclip/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fclip/errors.hpp"

namespace fclip {

std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(i, c) > scores(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double auc_rank(std::span<const double> scores, std::span<const int> is_positive) {
  if (scores.size() != is_positive.size()) throw InvalidArgument("auc_rank: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Ranks are doubled so midranks stay integral: 2*rank = first + last + 2.
  long double positive_rank_sum2 = 0.0L;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const long double midrank2 = static_cast<long double>(i + j + 2);
    for (std::size_t t = i; t <= j; ++t) {
      if (is_positive[order[t]] != 0) {
        positive_rank_sum2 += midrank2;
        ++positives;
      }
    }
    i = j + 1;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw InvalidArgument("auc_rank: need at least one positive and one negative");
  const long double p = static_cast<long double>(positives);
  const long double u2 = positive_rank_sum2 - p * (p + 1.0L);
  return static_cast<double>(u2 / (2.0L * p * static_cast<long double>(negatives)));
}

MetricEntry compute_metrics(const Matrix& scores, std::span<const int> labels, const MetricOptions& options,
                            std::vector<std::string>* warnings) {
  const auto n = static_cast<std::size_t>(scores.rows());
  const int c = static_cast<int>(scores.cols());
  if (n == 0) throw InvalidArgument("compute_metrics: no samples");
  if (labels.size() != n) throw InvalidArgument("compute_metrics: one label per score row required");
  if (c < 2) throw InvalidArgument("compute_metrics: at least two classes required");
  for (int y : labels) {
    if (y < 0 || y >= c) throw InvalidArgument("compute_metrics: label " + std::to_string(y) + " outside [0, C)");
  }
  const std::vector<int> pred = argmax_rows(scores);

  std::vector<int> support(static_cast<std::size_t>(c), 0);
  std::vector<int> tp(static_cast<std::size_t>(c), 0);
  std::vector<int> predicted(static_cast<std::size_t>(c), 0);
  int correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ++support[static_cast<std::size_t>(labels[i])];
    ++predicted[static_cast<std::size_t>(pred[i])];
    if (pred[i] == labels[i]) {
      ++tp[static_cast<std::size_t>(labels[i])];
      ++correct;
    }
  }

  MetricEntry m;
  double recall_sum = 0.0;
  double f1_sum = 0.0;
  int present = 0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (support[k] == 0) {
      if (warnings) warnings->push_back("class " + std::to_string(k) + " has no true samples; excluded from ACA/F1");
      continue;
    }
    ++present;
    const double recall = static_cast<double>(tp[k]) / support[k];
    const double precision = predicted[k] == 0 ? 0.0 : static_cast<double>(tp[k]) / predicted[k];
    recall_sum += recall;
    f1_sum += precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
  }
  m.aca = options.balanced_accuracy ? recall_sum / present : static_cast<double>(correct) / static_cast<double>(n);
  m.f1 = f1_sum / present;

  if (c == 2) {
    std::vector<double> margin(n);
    std::vector<int> positive(n);
    for (std::size_t i = 0; i < n; ++i) {
      margin[i] = scores(static_cast<Eigen::Index>(i), 1) - scores(static_cast<Eigen::Index>(i), 0);
      positive[i] = labels[i] == 1 ? 1 : 0;
    }
    if (support[0] > 0 && support[1] > 0) {
      m.auc = auc_rank(margin, positive);
    } else {
      m.auc = std::numeric_limits<double>::quiet_NaN();
      if (warnings) warnings->push_back("AUC undefined: only one class present");
    }
    return m;
  }

  double auc_sum = 0.0;
  int auc_classes = 0;
  std::vector<double> column(n);
  std::vector<int> positive(n);
  for (int k = 0; k < c; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    if (support[ks] == 0 || support[ks] == static_cast<int>(n)) continue;
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = scores(static_cast<Eigen::Index>(i), k);
      positive[i] = labels[i] == k ? 1 : 0;
    }
    auc_sum += auc_rank(column, positive);
    ++auc_classes;
  }
  if (auc_classes == 0) {
    m.auc = std::numeric_limits<double>::quiet_NaN();
    if (warnings) warnings->push_back("AUC undefined: only one class present");
  } else {
    m.auc = auc_sum / auc_classes;
  }
  return m;
}

MetricReport aggregate_folds(std::vector<MetricEntry> per_fold) {
  if (per_fold.empty()) throw InvalidArgument("aggregate_folds: no folds");
  MetricReport r;
  for (const MetricEntry& e : per_fold) {
    r.aca += e.aca;
    r.auc += e.auc;
    r.f1 += e.f1;
  }
  const double k = static_cast<double>(per_fold.size());
  r.aca /= k;
  r.auc /= k;
  r.f1 /= k;
  r.n_folds = static_cast<int>(per_fold.size());
  r.per_fold = std::move(per_fold);
  return r;
}

}  // namespace fclip
