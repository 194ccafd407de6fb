// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include "fclip/objectives.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "fclip/errors.hpp"

namespace fclip {

TargetMatrix identity_targets(int batch) {
  if (batch < 1) throw InvalidArgument("identity_targets: batch size must be at least 1");
  return {Matrix::Identity(batch, batch), TargetKind::Identity};
}

namespace {

// Dense ids in first-occurrence order, so equality tests are integer compares.
struct LabelIds {
  std::vector<int> id;
  // Per distinct label: first position, then occurrence count.
  std::vector<std::pair<std::size_t, int>> groups;
};

LabelIds label_ids(std::span<const std::string> categories) {
  if (categories.empty()) throw InvalidArgument("cooccurrence targets need at least one label");
  LabelIds out;
  out.id.resize(categories.size());
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i].empty()) throw InvalidArgument("empty category label");
    std::size_t k = 0;
    while (k < out.groups.size() && categories[out.groups[k].first] != categories[i]) ++k;
    if (k == out.groups.size()) out.groups.emplace_back(i, 0);
    out.id[i] = static_cast<int>(k);
    ++out.groups[k].second;
  }
  return out;
}

}  // namespace

Matrix cooccurrence_indicator(std::span<const std::string> categories) {
  const LabelIds labels = label_ids(categories);
  const auto b = static_cast<Eigen::Index>(labels.id.size());
  Matrix raw(b, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const int id = labels.id[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < b; ++i) raw(i, j) = labels.id[static_cast<std::size_t>(i)] == id ? 1.0 : 0.0;
  }
  return raw;
}

TargetMatrix cooccurrence_targets(std::span<const std::string> categories) {
  const LabelIds labels = label_ids(categories);
  const auto b = static_cast<Eigen::Index>(labels.id.size());
  // Row i holds 1/count over its own category, so every row sums to 1.
  Matrix g(b, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const int id = labels.id[static_cast<std::size_t>(j)];
    const double w = 1.0 / labels.groups[static_cast<std::size_t>(id)].second;
    for (Eigen::Index i = 0; i < b; ++i) g(i, j) = labels.id[static_cast<std::size_t>(i)] == id ? w : 0.0;
  }
  return {std::move(g), TargetKind::Cooccurrence};
}

double soft_cross_entropy(const Matrix& logits, const Matrix& targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
    throw ShapeError("soft_cross_entropy: logits and targets differ in shape");
  }
  if (logits.rows() == 0) throw ShapeError("soft_cross_entropy: empty batch");
  return -targets.cwiseProduct(log_softmax_rows(logits)).sum() / static_cast<double>(logits.rows());
}

double soft_cross_entropy(const Matrix& logits, const TargetMatrix& targets) {
  return soft_cross_entropy(logits, targets.matrix);
}

namespace {

double symmetric_ce(const EmbeddingBatch& v, const EmbeddingBatch& t, double lambda, const Matrix& targets) {
  const SimilarityPair s = scaled_similarities(v, t, lambda);
  return soft_cross_entropy(s.v2t, targets) + soft_cross_entropy(s.t2v, Matrix(targets.transpose()));
}

}  // namespace

double loss_m(const EmbeddingBatch& v, const EmbeddingBatch& t, double lambda) {
  return symmetric_ce(v, t, lambda, identity_targets(static_cast<int>(v.batch())).matrix);
}

double loss_p(const EmbeddingBatch& v, const EmbeddingBatch& t, double lambda,
              std::span<const std::string> categories) {
  if (static_cast<Eigen::Index>(categories.size()) != v.batch()) {
    throw InvalidArgument("loss_p: need one category per batch row");
  }
  return symmetric_ce(v, t, lambda, cooccurrence_targets(categories).matrix);
}

double loss_ek(const Matrix& expert_knowledge, const Matrix& public_text) {
  if (expert_knowledge.rows() != public_text.rows() || expert_knowledge.cols() != public_text.cols()) {
    throw ShapeError("loss_ek: expert knowledge and text features differ in shape");
  }
  if (expert_knowledge.size() == 0) throw ShapeError("loss_ek: empty input");
  return (expert_knowledge - public_text).squaredNorm() / static_cast<double>(expert_knowledge.size());
}

LossBreakdown total_loss(double l_p, double l_m, double l_ek, double alpha) {
  if (l_p < 0.0 || l_m < 0.0 || l_ek < 0.0 || alpha < 0.0) {
    throw InvalidArgument("total_loss: components must be nonnegative");
  }
  return {l_p, l_m, l_ek, alpha, l_p + l_m + alpha * l_ek};
}

namespace ag {

Var contrastive_loss(Var v, Var t, Var lambda, const Matrix& targets) {
  Var s = scaled_similarity(v, t, lambda);
  return add(soft_cross_entropy(s, targets), soft_cross_entropy(transpose(s), targets.transpose()));
}

Var total_loss(Var l_p, Var l_m, Var l_ek, double alpha) { return add(add(l_p, l_m), scale(l_ek, alpha)); }

}  // namespace ag
}  // namespace fclip
