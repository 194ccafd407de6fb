// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "fclip/autograd.hpp"

namespace fclip {

struct MetricEntry {
  double aca = 0.0;
  double auc = 0.0;
  double f1 = 0.0;
};

struct MetricReport {
  double aca = 0.0;
  double auc = 0.0;
  double f1 = 0.0;
  std::vector<MetricEntry> per_fold;
  int n_folds = 0;
  std::vector<std::string> warnings;
};

struct MetricOptions {
  // Balanced (per-class mean recall) when true, plain accuracy otherwise.
  bool balanced_accuracy = true;
};

// Row argmax; exact ties go to the lowest column.
std::vector<int> argmax_rows(const Matrix& scores);

// Area under the ROC curve from the Mann-Whitney statistic with midranks, so
// tied scores count one half. Throws InvalidArgument unless both classes occur.
double auc_rank(std::span<const double> scores, std::span<const int> is_positive);

// Scores are N x C, labels in [0, C). Binary AUC uses the margin s1 - s0;
// C > 2 averages one-vs-rest AUC over classes with both positives and
// negatives. Classes with no true samples are dropped from ACA and F1 and
// reported through `warnings`. AUC is NaN when no class qualifies.
MetricEntry compute_metrics(const Matrix& scores, std::span<const int> labels, const MetricOptions& options = {},
                            std::vector<std::string>* warnings = nullptr);

// Arithmetic mean of the entries.
MetricReport aggregate_folds(std::vector<MetricEntry> per_fold);

}  // namespace fclip
