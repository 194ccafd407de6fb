// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fclip/autograd.hpp"
#include "fclip/embedding.hpp"
#include "fclip/encoders.hpp"

namespace fclip {

// Encoded class prompts, one unit row per class.
struct ZeroShotHead {
  std::vector<std::string> class_names;
  Matrix class_embeddings;

  int num_classes() const { return static_cast<int>(class_names.size()); }
  int dim() const { return static_cast<int>(class_embeddings.cols()); }
  // Throws InvalidArgument on C < 2, duplicates, shape or norm violations.
  void validate() const;
};

ZeroShotHead build_zero_shot_head(std::span<const std::string> class_names, std::string_view prompt_template,
                                  EncoderBundle& encoders);

struct Classification {
  std::vector<int> predictions;
  Matrix scores;
};

// scores = images . head^T.
Matrix zero_shot_scores(const EmbeddingBatch& images, const ZeroShotHead& head);
Classification classify(Matrix scores);
Classification zero_shot_classify(std::span<const Image> images, const ZeroShotHead& head, EncoderBundle& encoders);

inline constexpr double kTipBeta = 5.5;
inline constexpr double kTipMix = 1.0;

// Few-shot key/value cache. Keys are L2-normalized shot embeddings and values
// one-hot labels.
struct AdapterCache {
  Matrix keys;
  Matrix values;
  double beta = kTipBeta;
  double mix = kTipMix;

  // Throws InvalidArgument unless beta > 0, mix >= 0 and values are one-hot.
  // Keys are only required to be unit-norm when `unit_keys` is set.
  void validate(bool unit_keys = true) const;
};

AdapterCache build_adapter_cache(const EmbeddingBatch& shots, std::span<const int> labels, int num_classes,
                                 double beta = kTipBeta, double mix = kTipMix);

// mix * exp(-beta (1 - q K^T)) V + q H^T for each query row.
Matrix tip_adapter_scores(const Matrix& queries, const AdapterCache& cache, const ZeroShotHead& head);
// Single-query form.
RowVector tip_adapter_predict(const RowVector& query, const AdapterCache& cache, const ZeroShotHead& head);

struct TipFinetuneOptions {
  int steps = 200;
  double lr = 1e-3;
  // Multiplies the scores inside the training cross-entropy only.
  double logit_scale = 100.0;
};

// Tip-Adapter-F: keys become trainable and are fitted with full-batch AdamW on
// cross-entropy over the shots. Fitted keys are not renormalized.
AdapterCache tip_adapter_finetune(const AdapterCache& cache, const EmbeddingBatch& shots, std::span<const int> labels,
                                  const ZeroShotHead& head, const TipFinetuneOptions& options = {});

struct ClipAdapterConfig {
  int reduction = 4;
  double residual = 0.2;
  int steps = 300;
  double lr = 1e-2;
  double weight_decay = 0.0;
  double logit_scale = 100.0;
  std::uint64_t seed = 0;
};

// x -> r * (relu(x W1) W2) + (1 - r) * x, renormalized. W2 starts at zero so
// the initial map is the identity on unit rows.
struct ClipAdapter {
  Parameter w1;
  Parameter w2;
  double residual = 0.2;

  Matrix adapt(const Matrix& embeddings) const;
};

ClipAdapter make_clip_adapter(int dim, const ClipAdapterConfig& config);
// Throws InvalidArgument when a head class has no shot.
ClipAdapter clip_adapter_fit(const EmbeddingBatch& shots, std::span<const int> labels, const ZeroShotHead& head,
                             const ClipAdapterConfig& config = {});
Matrix clip_adapter_scores(const ClipAdapter& adapter, const EmbeddingBatch& images, const ZeroShotHead& head);

struct LinearProbeConfig {
  int steps = 500;
  double lr = 1e-2;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
};

// One affine layer d -> C.
struct LinearProbe {
  Parameter weight;
  Parameter bias;

  long num_parameters() const { return static_cast<long>(weight.value.size() + bias.value.size()); }
  Matrix scores(const Matrix& embeddings) const;
};

// Throws InvalidArgument when a class in [0, num_classes) has no sample.
LinearProbe linear_probe_fit(const EmbeddingBatch& train, std::span<const int> labels, int num_classes,
                             const LinearProbeConfig& config = {});
// Encodes through the frozen bundle (read-only) and fits on the result.
LinearProbe linear_probe_fit(EncoderBundle& frozen, std::span<const Image> images, std::span<const int> labels,
                             int num_classes, const LinearProbeConfig& config = {});
Matrix linear_probe_scores(const LinearProbe& probe, const EmbeddingBatch& images);

}  // namespace fclip
