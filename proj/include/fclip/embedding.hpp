// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <utility>

#include "fclip/autograd.hpp"

namespace fclip {

// B x d projected features. `unit_norm` promises every row has L2 norm 1.
struct EmbeddingBatch {
  Matrix matrix;
  bool unit_norm = false;

  Eigen::Index batch() const { return matrix.rows(); }
  Eigen::Index dim() const { return matrix.cols(); }

  static EmbeddingBatch normalized(const Matrix& raw) { return {l2_normalize_rows(raw), true}; }
};

inline constexpr double kUnitNormTolerance = 1e-6;

// True when every row of m has norm 1 within kUnitNormTolerance.
bool rows_unit_norm(const Matrix& m, double tol = kUnitNormTolerance);

// Learnable similarity scale, stored as its logarithm.
struct TemperatureScale {
  static constexpr double kInitialLambda = 1.0 / 0.07;
  static constexpr double kMaxLambda = 100.0;

  double log_lambda = std::log(kInitialLambda);

  double lambda() const { return std::exp(log_lambda); }
  static double max_log_lambda() { return std::log(kMaxLambda); }
  static TemperatureScale from_lambda(double lambda) { return {std::log(lambda)}; }
};

struct SimilarityPair {
  Matrix v2t;
  Matrix t2v;
};

// S_v2t = lambda * v t^T and S_t2v = S_v2t^T. Both inputs must be unit-norm
// with equal shapes; throws ShapeError / InvalidArgument otherwise.
SimilarityPair scaled_similarities(const EmbeddingBatch& v, const EmbeddingBatch& t, double lambda);
inline SimilarityPair scaled_similarities(const EmbeddingBatch& v, const EmbeddingBatch& t,
                                          const TemperatureScale& scale) {
  return scaled_similarities(v, t, scale.lambda());
}

namespace ag {
// lambda * v t^T on the tape; lambda is a 1x1 node.
Var scaled_similarity(Var v, Var t, Var lambda);
}  // namespace ag

}  // namespace fclip
