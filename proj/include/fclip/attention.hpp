// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "fclip/autograd.hpp"
#include "fclip/rng.hpp"

namespace fclip {

// Multi-head cross-attention weights. Per head i, W_Q[i], W_K[i], W_V[i] map
// d -> head_dim; W_O maps heads * head_dim -> d.
struct AttentionParams {
  int heads = 0;
  int head_dim = 0;
  std::vector<Parameter> w_q;
  std::vector<Parameter> w_k;
  std::vector<Parameter> w_v;
  Parameter w_o;

  int dim() const { return heads * head_dim; }

  // Glorot-uniform initialization; dim must be divisible by heads.
  static AttentionParams init(int dim, int heads, Rng& rng);

  void collect_parameters(std::vector<Parameter*>& out);
  // Throws InvalidArgument unless every matrix is finite and shaped per head.
  void validate() const;
};

struct ExpertKnowledge {
  Matrix matrix;
};

// Queries are public image features, keys expert image features and values
// expert text features. Row k of the result only depends on query row k.
ExpertKnowledge extract_expert_knowledge(const Matrix& public_images, const Matrix& expert_images,
                                         const Matrix& expert_texts, const AttentionParams& params);

// Per-head softmax weights (B_p x B_m each) for the same inputs.
std::vector<Matrix> attention_weights(const Matrix& public_images, const Matrix& expert_images,
                                      const AttentionParams& params);

// Residual fusion t_p + EK.
Matrix fuse_expert_knowledge(const ExpertKnowledge& knowledge, const Matrix& public_text);

namespace ag {

Var extract_expert_knowledge(Var public_images, Var expert_images, Var expert_texts, AttentionParams& params);
Var fuse_expert_knowledge(Var knowledge, Var public_text);

}  // namespace ag
}  // namespace fclip
