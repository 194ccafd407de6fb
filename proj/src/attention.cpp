// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include "fclip/attention.hpp"

#include <cmath>
#include <string>

#include "fclip/encoders.hpp"
#include "fclip/errors.hpp"

namespace fclip {

AttentionParams AttentionParams::init(int dim, int heads, Rng& rng) {
  if (dim < 1 || heads < 1 || dim % heads != 0) {
    throw InvalidArgument("attention: dim must be a positive multiple of the head count");
  }
  AttentionParams p;
  p.heads = heads;
  p.head_dim = dim / heads;
  for (int i = 0; i < heads; ++i) {
    const std::string h = std::to_string(i);
    p.w_q.emplace_back("attention.w_q." + h, xavier_uniform(dim, p.head_dim, rng));
    p.w_k.emplace_back("attention.w_k." + h, xavier_uniform(dim, p.head_dim, rng));
    p.w_v.emplace_back("attention.w_v." + h, xavier_uniform(dim, p.head_dim, rng));
  }
  p.w_o = Parameter("attention.w_o", xavier_uniform(heads * p.head_dim, dim, rng));
  return p;
}

void AttentionParams::collect_parameters(std::vector<Parameter*>& out) {
  for (int i = 0; i < heads; ++i) {
    out.push_back(&w_q[static_cast<std::size_t>(i)]);
    out.push_back(&w_k[static_cast<std::size_t>(i)]);
    out.push_back(&w_v[static_cast<std::size_t>(i)]);
  }
  out.push_back(&w_o);
}

void AttentionParams::validate() const {
  if (heads < 1 || head_dim < 1) throw InvalidArgument("attention: empty head configuration");
  const auto n = static_cast<std::size_t>(heads);
  if (w_q.size() != n || w_k.size() != n || w_v.size() != n) {
    throw InvalidArgument("attention: projection count differs from head count");
  }
  const int d = dim();
  for (std::size_t i = 0; i < n; ++i) {
    for (const Parameter* w : {&w_q[i], &w_k[i], &w_v[i]}) {
      if (w->value.rows() != d || w->value.cols() != head_dim) {
        throw InvalidArgument("attention: " + w->name + " is not d x head_dim");
      }
      if (!w->value.allFinite()) throw InvalidArgument("attention: " + w->name + " is not finite");
    }
  }
  if (w_o.value.rows() != d || w_o.value.cols() != d) throw InvalidArgument("attention: W_O is not d x d");
  if (!w_o.value.allFinite()) throw InvalidArgument("attention: W_O is not finite");
}

namespace {

void check_inputs(Eigen::Index q_cols, Eigen::Index k_rows, Eigen::Index k_cols, Eigen::Index v_rows,
                  Eigen::Index v_cols, const AttentionParams& params) {
  params.validate();
  if (k_rows == 0) throw ShapeError("attention: no expert samples (B_m = 0)");
  if (k_rows != v_rows) throw ShapeError("attention: expert image and text rows are not aligned");
  const Eigen::Index d = params.dim();
  if (q_cols != d || k_cols != d || v_cols != d) {
    throw ShapeError("attention: feature width does not match attention dim " + std::to_string(d));
  }
}

}  // namespace

namespace ag {

Var extract_expert_knowledge(Var public_images, Var expert_images, Var expert_texts, AttentionParams& params) {
  check_inputs(public_images.cols(), expert_images.rows(), expert_images.cols(), expert_texts.rows(),
               expert_texts.cols(), params);
  Tape& tape = public_images.tape();
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(params.head_dim));
  std::vector<Var> heads;
  heads.reserve(static_cast<std::size_t>(params.heads));
  for (std::size_t i = 0; i < static_cast<std::size_t>(params.heads); ++i) {
    Var q = matmul(public_images, tape.param(params.w_q[i]));
    Var k = matmul(expert_images, tape.param(params.w_k[i]));
    Var v = matmul(expert_texts, tape.param(params.w_v[i]));
    Var weights = softmax_rows(scale(matmul_nt(q, k), inv_sqrt));
    heads.push_back(matmul(weights, v));
  }
  return matmul(concat_cols(heads), tape.param(params.w_o));
}

Var fuse_expert_knowledge(Var knowledge, Var public_text) { return add(public_text, knowledge); }

}  // namespace ag

ExpertKnowledge extract_expert_knowledge(const Matrix& public_images, const Matrix& expert_images,
                                         const Matrix& expert_texts, const AttentionParams& params) {
  check_inputs(public_images.cols(), expert_images.rows(), expert_images.cols(), expert_texts.rows(),
               expert_texts.cols(), params);
  const auto weights = attention_weights(public_images, expert_images, params);
  Matrix heads(public_images.rows(), params.dim());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    heads.middleCols(static_cast<Eigen::Index>(i) * params.head_dim, params.head_dim) =
        weights[i] * (expert_texts * params.w_v[i].value);
  }
  return {heads * params.w_o.value};
}

std::vector<Matrix> attention_weights(const Matrix& public_images, const Matrix& expert_images,
                                      const AttentionParams& params) {
  check_inputs(public_images.cols(), expert_images.rows(), expert_images.cols(), expert_images.rows(),
               expert_images.cols(), params);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(params.head_dim));
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < static_cast<std::size_t>(params.heads); ++i) {
    const Matrix q = public_images * params.w_q[i].value;
    const Matrix k = expert_images * params.w_k[i].value;
    out.push_back(softmax_rows(q * k.transpose() * inv_sqrt));
  }
  return out;
}

Matrix fuse_expert_knowledge(const ExpertKnowledge& knowledge, const Matrix& public_text) {
  if (knowledge.matrix.rows() != public_text.rows() || knowledge.matrix.cols() != public_text.cols()) {
    throw ShapeError("fuse_expert_knowledge: shapes differ");
  }
  return public_text + knowledge.matrix;
}

}  // namespace fclip
