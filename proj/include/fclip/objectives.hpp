// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "fclip/autograd.hpp"
#include "fclip/embedding.hpp"

namespace fclip {

enum class TargetKind { Identity, Cooccurrence };

// B x B row-stochastic matching targets.
struct TargetMatrix {
  Matrix matrix;
  TargetKind kind = TargetKind::Identity;
};

inline constexpr double kDefaultRevisionWeight = 100.0;

struct LossBreakdown {
  double l_p = 0.0;
  double l_m = 0.0;
  double l_ek = 0.0;
  double alpha = kDefaultRevisionWeight;
  double total = 0.0;
};

TargetMatrix identity_targets(int batch);

// Binary same-category matrix: raw(i, j) = [categories[i] == categories[j]].
Matrix cooccurrence_indicator(std::span<const std::string> categories);

// The indicator with each row divided by its sum.
TargetMatrix cooccurrence_targets(std::span<const std::string> categories);

double soft_cross_entropy(const Matrix& logits, const TargetMatrix& targets);
double soft_cross_entropy(const Matrix& logits, const Matrix& targets);

// CE(I, S_v2t) + CE(I, S_t2v).
double loss_m(const EmbeddingBatch& v, const EmbeddingBatch& t, double lambda);
// As loss_m with co-occurrence targets built from `categories`.
double loss_p(const EmbeddingBatch& v, const EmbeddingBatch& t, double lambda,
              std::span<const std::string> categories);
// Mean squared difference over all elements.
double loss_ek(const Matrix& expert_knowledge, const Matrix& public_text);

LossBreakdown total_loss(double l_p, double l_m, double l_ek, double alpha = kDefaultRevisionWeight);

namespace ag {

// Symmetric contrastive objective on the tape:
// CE(G, lambda v t^T) + CE(G^T, lambda t v^T).
Var contrastive_loss(Var v, Var t, Var lambda, const Matrix& targets);

// l_p + l_m + alpha * l_ek.
Var total_loss(Var l_p, Var l_m, Var l_ek, double alpha);

}  // namespace ag
}  // namespace fclip
