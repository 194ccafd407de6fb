// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include "fclip/encoders.hpp"

#include <cmath>

#include "fclip/errors.hpp"

namespace fclip {

bool rows_unit_norm(const Matrix& m, double tol) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (std::abs(m.row(i).norm() - 1.0) > tol) return false;
  }
  return true;
}

SimilarityPair scaled_similarities(const EmbeddingBatch& v, const EmbeddingBatch& t, double lambda) {
  if (v.batch() != t.batch() || v.dim() != t.dim()) {
    throw ShapeError("scaled_similarities: image and text batches differ in shape");
  }
  if (!v.unit_norm || !t.unit_norm || !rows_unit_norm(v.matrix) || !rows_unit_norm(t.matrix)) {
    throw InvalidArgument("scaled_similarities: embeddings must be unit-norm");
  }
  SimilarityPair s;
  s.v2t = lambda * (v.matrix * t.matrix.transpose());
  s.t2v = s.v2t.transpose();
  return s;
}

namespace ag {
Var scaled_similarity(Var v, Var t, Var lambda) { return mul_scalar(matmul_nt(v, t), lambda); }
}  // namespace ag

Matrix xavier_uniform(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-limit, limit);
  }
  return m;
}

// --- image tower -----------------------------------------------------------

TinyConvImageEncoder::TinyConvImageEncoder(const EncoderConfig& config, Rng& rng)
    : image_size_(config.image_size),
      kernel_(config.conv_kernel),
      stride_(config.conv_stride),
      channels_(config.conv_channels),
      grid_(config.pool_grid) {
  if (image_size_ < kernel_ || kernel_ < 1 || stride_ < 1 || channels_ < 1 || grid_ < 1) {
    throw InvalidArgument("tiny-conv: inconsistent encoder geometry");
  }
  out_side_ = (image_size_ - kernel_) / stride_ + 1;
  if (out_side_ < grid_) throw InvalidArgument("tiny-conv: pooling grid larger than feature map");
  cell_of_position_.resize(static_cast<std::size_t>(out_side_) * out_side_);
  for (int oy = 0; oy < out_side_; ++oy) {
    for (int ox = 0; ox < out_side_; ++ox) {
      cell_of_position_[static_cast<std::size_t>(oy * out_side_ + ox)] =
          (oy * grid_ / out_side_) * grid_ + (ox * grid_ / out_side_);
    }
  }
  const int fan_in = kernel_ * kernel_ * 3;
  weight_ = Parameter("image_encoder.conv.weight", xavier_uniform(fan_in, channels_, rng));
  bias_ = Parameter("image_encoder.conv.bias", Matrix::Constant(1, channels_, 0.01));
}

int TinyConvImageEncoder::output_dim() const { return grid_ * grid_ * channels_; }

Matrix TinyConvImageEncoder::patches(const Image& image) const {
  const Image sized = resize_square(image, image_size_);
  const int positions = out_side_ * out_side_;
  Matrix p(positions, kernel_ * kernel_ * 3);
  for (int oy = 0; oy < out_side_; ++oy) {
    for (int ox = 0; ox < out_side_; ++ox) {
      const int row = oy * out_side_ + ox;
      int col = 0;
      for (int ky = 0; ky < kernel_; ++ky) {
        for (int kx = 0; kx < kernel_; ++kx) {
          for (int c = 0; c < 3; ++c) {
            p(row, col++) = sized.at(oy * stride_ + ky, ox * stride_ + kx, c) / 127.5 - 1.0;
          }
        }
      }
    }
  }
  return p;
}

Var TinyConvImageEncoder::forward(Tape& tape, std::span<const Image* const> images) {
  if (images.empty()) throw InvalidArgument("encode_images: empty image batch");
  const int positions = out_side_ * out_side_;
  const int cells = grid_ * grid_;
  Matrix all(static_cast<Eigen::Index>(images.size()) * positions, kernel_ * kernel_ * 3);
  std::vector<int> groups(static_cast<std::size_t>(all.rows()));
  for (std::size_t b = 0; b < images.size(); ++b) {
    all.middleRows(static_cast<Eigen::Index>(b) * positions, positions) = patches(*images[b]);
    for (int p = 0; p < positions; ++p) {
      groups[b * static_cast<std::size_t>(positions) + static_cast<std::size_t>(p)] =
          static_cast<int>(b) * cells + cell_of_position_[static_cast<std::size_t>(p)];
    }
  }
  Var x = tape.constant(std::move(all));
  Var h = ag::relu(ag::add_row(ag::matmul(x, tape.param(weight_)), tape.param(bias_)));
  Var pooled = ag::segment_mean_rows(h, groups, static_cast<int>(images.size()) * cells);
  return ag::regroup_rows(pooled, cells);
}

void TinyConvImageEncoder::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// --- text tower ------------------------------------------------------------

HashedBagTextEncoder::HashedBagTextEncoder(const EncoderConfig& config, Rng& rng)
    : tokenizer_(config.vocab_buckets, config.max_tokens), width_(config.text_width) {
  if (width_ < 1) throw InvalidArgument("hashed-bag: text_width must be positive");
  Matrix e(config.vocab_buckets, width_);
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    for (Eigen::Index j = 0; j < e.cols(); ++j) e(i, j) = 0.5 * rng.normal();
  }
  embedding_ = Parameter("text_encoder.embedding", std::move(e));
}

Var HashedBagTextEncoder::forward(Tape& tape, std::span<const std::string> texts) {
  if (texts.empty()) throw InvalidArgument("encode_texts: empty text batch");
  Matrix bag = Matrix::Zero(static_cast<Eigen::Index>(texts.size()), tokenizer_.buckets());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto ids = tokenizer_.encode(texts[i]);
    const double w = 1.0 / static_cast<double>(ids.size());
    for (int id : ids) bag(static_cast<Eigen::Index>(i), id) += w;
  }
  return ag::matmul(tape.constant(std::move(bag)), tape.param(embedding_));
}

void HashedBagTextEncoder::collect_parameters(std::vector<Parameter*>& out) { out.push_back(&embedding_); }

// --- projections and bundle -------------------------------------------------

Projection::Projection(std::string name, int in_dim, int out_dim, Rng& rng)
    : weight_(name + ".weight", xavier_uniform(in_dim, out_dim, rng)),
      bias_(name + ".bias", Matrix::Zero(1, out_dim)) {}

Var Projection::forward(Tape& tape, Var x) {
  if (x.cols() != weight_.value.rows()) {
    throw ShapeError("projection expects " + std::to_string(weight_.value.rows()) + " input features, got " +
                     std::to_string(x.cols()));
  }
  return ag::add_row(ag::matmul(x, tape.param(weight_)), tape.param(bias_));
}

void Projection::collect_parameters(std::vector<Parameter*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

std::unique_ptr<ImageEncoder> make_image_encoder(const EncoderConfig& config, Rng& rng) {
  if (config.image_encoder == "tiny-conv") return std::make_unique<TinyConvImageEncoder>(config, rng);
  throw InvalidArgument("unknown image encoder '" + config.image_encoder + "'");
}

std::unique_ptr<TextEncoder> make_text_encoder(const EncoderConfig& config, Rng& rng) {
  if (config.text_encoder == "hashed-bag") return std::make_unique<HashedBagTextEncoder>(config, rng);
  throw InvalidArgument("unknown text encoder '" + config.text_encoder + "'");
}

EncoderBundle::EncoderBundle(const EncoderConfig& config, Rng& rng) : config_(config) {
  // Sequenced explicitly: argument evaluation order would make initialization
  // depend on the compiler.
  image_ = make_image_encoder(config, rng);
  text_ = make_text_encoder(config, rng);
  init_projections(rng);
}

EncoderBundle::EncoderBundle(const EncoderConfig& config, std::unique_ptr<ImageEncoder> image,
                             std::unique_ptr<TextEncoder> text, Rng& rng)
    : config_(config), image_(std::move(image)), text_(std::move(text)) {
  init_projections(rng);
}

void EncoderBundle::init_projections(Rng& rng) {
  if (config_.embed_dim < 1) throw InvalidArgument("embed_dim must be positive");
  image_projection_ = Projection("image_projection", image_->output_dim(), config_.embed_dim, rng);
  text_projection_ = Projection("text_projection", text_->output_dim(), config_.embed_dim, rng);
}

Var EncoderBundle::image_embeddings(Tape& tape, std::span<const Image* const> images) {
  return ag::l2_normalize_rows(image_projection_.forward(tape, image_->forward(tape, images)));
}

Var EncoderBundle::text_embeddings(Tape& tape, std::span<const std::string> texts) {
  return ag::l2_normalize_rows(text_projection_.forward(tape, text_->forward(tape, texts)));
}

void EncoderBundle::collect_parameters(std::vector<Parameter*>& out) {
  image_->collect_parameters(out);
  image_projection_.collect_parameters(out);
  text_->collect_parameters(out);
  text_projection_.collect_parameters(out);
}

EmbeddingBatch encode_images(EncoderBundle& bundle, std::span<const Image* const> images) {
  Tape tape(false);
  return {bundle.image_embeddings(tape, images).value(), true};
}

EmbeddingBatch encode_images(EncoderBundle& bundle, std::span<const Image> images) {
  std::vector<const Image*> ptrs;
  ptrs.reserve(images.size());
  for (const auto& im : images) ptrs.push_back(&im);
  return encode_images(bundle, ptrs);
}

EmbeddingBatch encode_texts(EncoderBundle& bundle, std::span<const std::string> texts) {
  Tape tape(false);
  return {bundle.text_embeddings(tape, texts).value(), true};
}

EmbeddingBatch project_and_normalize(const Matrix& raw, const Matrix& weight, const RowVector& bias) {
  if (raw.cols() != weight.rows() || bias.cols() != weight.cols()) {
    throw ShapeError("project_and_normalize: projection does not match feature width");
  }
  Matrix projected = raw * weight;
  projected.rowwise() += bias;
  return EmbeddingBatch::normalized(projected);
}

}  // namespace fclip
