// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fclip/autograd.hpp"
#include "fclip/embedding.hpp"
#include "fclip/image.hpp"
#include "fclip/rng.hpp"
#include "fclip/tokenizer.hpp"

namespace fclip {

// Shapes of the desk-scale encoders. The defaults are the test configuration;
// production runs raise image_size / max_tokens / embed_dim.
struct EncoderConfig {
  std::string image_encoder = "tiny-conv";
  std::string text_encoder = "hashed-bag";
  int image_size = 32;
  int conv_channels = 8;
  int conv_kernel = 3;
  int conv_stride = 2;
  int pool_grid = 2;
  int vocab_buckets = 2048;
  int text_width = 32;
  int max_tokens = 16;
  int embed_dim = 16;
};

// E_v: a batch of images to B x output_dim() raw features.
class ImageEncoder {
 public:
  virtual ~ImageEncoder() = default;
  virtual int output_dim() const = 0;
  virtual Var forward(Tape& tape, std::span<const Image* const> images) = 0;
  virtual void collect_parameters(std::vector<Parameter*>& out) = 0;
};

// E_t: a batch of texts to B x output_dim() raw features.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual int output_dim() const = 0;
  virtual Var forward(Tape& tape, std::span<const std::string> texts) = 0;
  virtual void collect_parameters(std::vector<Parameter*>& out) = 0;
};

// One strided convolution with ReLU, then mean pooling on a grid x grid
// layout so the block position of a lesion survives into the features.
class TinyConvImageEncoder final : public ImageEncoder {
 public:
  TinyConvImageEncoder(const EncoderConfig& config, Rng& rng);

  int output_dim() const override;
  Var forward(Tape& tape, std::span<const Image* const> images) override;
  void collect_parameters(std::vector<Parameter*>& out) override;

  // im2col rows for one image after resizing and scaling to [-1, 1].
  Matrix patches(const Image& image) const;

 private:
  int image_size_;
  int kernel_;
  int stride_;
  int channels_;
  int grid_;
  int out_side_;
  std::vector<int> cell_of_position_;
  Parameter weight_;
  Parameter bias_;
};

// Mean of hashed token embeddings.
class HashedBagTextEncoder final : public TextEncoder {
 public:
  HashedBagTextEncoder(const EncoderConfig& config, Rng& rng);

  int output_dim() const override { return width_; }
  Var forward(Tape& tape, std::span<const std::string> texts) override;
  void collect_parameters(std::vector<Parameter*>& out) override;

  const HashingTokenizer& tokenizer() const { return tokenizer_; }

 private:
  HashingTokenizer tokenizer_;
  int width_;
  Parameter embedding_;
};

// Affine map d_in -> d_out.
class Projection {
 public:
  Projection() = default;
  Projection(std::string name, int in_dim, int out_dim, Rng& rng);

  Var forward(Tape& tape, Var x);
  void collect_parameters(std::vector<Parameter*>& out);
  int in_dim() const { return static_cast<int>(weight_.value.rows()); }
  int out_dim() const { return static_cast<int>(weight_.value.cols()); }

  Parameter& weight() { return weight_; }
  Parameter& bias() { return bias_; }

 private:
  Parameter weight_;
  Parameter bias_;
};

// Glorot-uniform matrix.
Matrix xavier_uniform(int rows, int cols, Rng& rng);

// Image and text towers with their projection heads into the shared space.
class EncoderBundle {
 public:
  EncoderBundle(const EncoderConfig& config, Rng& rng);
  EncoderBundle(const EncoderConfig& config, std::unique_ptr<ImageEncoder> image, std::unique_ptr<TextEncoder> text,
                Rng& rng);

  const EncoderConfig& config() const { return config_; }
  int embed_dim() const { return config_.embed_dim; }

  // Unit-norm P_v(E_v(x)) rows on the tape.
  Var image_embeddings(Tape& tape, std::span<const Image* const> images);
  Var text_embeddings(Tape& tape, std::span<const std::string> texts);

  void collect_parameters(std::vector<Parameter*>& out);

  ImageEncoder& image_encoder() { return *image_; }
  TextEncoder& text_encoder() { return *text_; }
  Projection& image_projection() { return image_projection_; }
  Projection& text_projection() { return text_projection_; }

 private:
  void init_projections(Rng& rng);

  EncoderConfig config_;
  std::unique_ptr<ImageEncoder> image_;
  std::unique_ptr<TextEncoder> text_;
  Projection image_projection_;
  Projection text_projection_;
};

std::unique_ptr<ImageEncoder> make_image_encoder(const EncoderConfig& config, Rng& rng);
std::unique_ptr<TextEncoder> make_text_encoder(const EncoderConfig& config, Rng& rng);

// Inference helpers: a private tape, no gradients. The bundle is not
// modified; parameters are only read.
EmbeddingBatch encode_images(EncoderBundle& bundle, std::span<const Image* const> images);
EmbeddingBatch encode_images(EncoderBundle& bundle, std::span<const Image> images);
EmbeddingBatch encode_texts(EncoderBundle& bundle, std::span<const std::string> texts);

// Row-normalizes a raw feature matrix after an explicit projection; exposed so
// the projection/normalization contract can be checked without encoders.
EmbeddingBatch project_and_normalize(const Matrix& raw, const Matrix& weight, const RowVector& bias);

}  // namespace fclip
