// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include "fclip/adaptation.hpp"

#include <cmath>
#include <set>

#include "fclip/data_model.hpp"
#include "fclip/errors.hpp"
#include "fclip/metrics.hpp"
#include "fclip/model.hpp"

namespace fclip {

namespace {

void check_class_names(std::span<const std::string> names) {
  if (names.size() < 2) throw InvalidArgument("zero-shot head needs at least two classes");
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) throw InvalidArgument("duplicate class name '" + n + "'");
  }
}

void check_labels(std::span<const int> labels, Eigen::Index rows, int num_classes) {
  if (static_cast<Eigen::Index>(labels.size()) != rows) throw InvalidArgument("one label per embedding row required");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw InvalidArgument("label " + std::to_string(y) + " outside [0, C)");
  }
}

void require_every_class(std::span<const int> labels, int num_classes, const char* what) {
  std::vector<bool> seen(static_cast<std::size_t>(num_classes), false);
  for (int y : labels) seen[static_cast<std::size_t>(y)] = true;
  for (int c = 0; c < num_classes; ++c) {
    if (!seen[static_cast<std::size_t>(c)]) {
      throw InvalidArgument(std::string(what) + ": class " + std::to_string(c) + " has no training sample");
    }
  }
}

Matrix one_hot(std::span<const int> labels, int num_classes) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) m(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return m;
}

void require_unit(const EmbeddingBatch& e, const char* what) {
  if (!rows_unit_norm(e.matrix)) throw InvalidArgument(std::string(what) + ": embeddings must be unit-norm");
}

}  // namespace

void ZeroShotHead::validate() const {
  check_class_names(class_names);
  if (class_embeddings.rows() != num_classes()) throw InvalidArgument("zero-shot head: one embedding row per class");
  if (!rows_unit_norm(class_embeddings)) throw InvalidArgument("zero-shot head rows must be unit-norm");
}

ZeroShotHead build_zero_shot_head(std::span<const std::string> class_names, std::string_view prompt_template,
                                  EncoderBundle& encoders) {
  check_class_names(class_names);
  std::vector<std::string> prompts;
  for (const auto& name : class_names) prompts.push_back(fill_prompt(name, prompt_template));
  ZeroShotHead head{{class_names.begin(), class_names.end()}, encode_texts(encoders, prompts).matrix};
  head.validate();
  return head;
}

Matrix zero_shot_scores(const EmbeddingBatch& images, const ZeroShotHead& head) {
  if (images.dim() != head.dim()) throw ShapeError("zero-shot: image and head dimensions differ");
  return images.matrix * head.class_embeddings.transpose();
}

Classification classify(Matrix scores) {
  Classification c;
  c.predictions = argmax_rows(scores);
  c.scores = std::move(scores);
  return c;
}

Classification zero_shot_classify(std::span<const Image> images, const ZeroShotHead& head, EncoderBundle& encoders) {
  head.validate();
  return classify(zero_shot_scores(encode_images(encoders, images), head));
}

void AdapterCache::validate(bool unit_keys) const {
  if (!(beta > 0.0)) throw InvalidArgument("adapter cache: beta must be positive");
  if (!(mix >= 0.0)) throw InvalidArgument("adapter cache: mix must be nonnegative");
  if (keys.rows() != values.rows() || keys.rows() == 0) throw ShapeError("adapter cache: keys and values misaligned");
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    const bool binary = ((values.row(i).array() == 0.0) || (values.row(i).array() == 1.0)).all();
    if (!binary || values.row(i).sum() != 1.0) throw InvalidArgument("adapter cache: value rows must be one-hot");
  }
  if (unit_keys && !rows_unit_norm(keys)) throw InvalidArgument("adapter cache: keys must be unit-norm");
}

AdapterCache build_adapter_cache(const EmbeddingBatch& shots, std::span<const int> labels, int num_classes, double beta,
                                 double mix) {
  require_unit(shots, "adapter cache");
  check_labels(labels, shots.batch(), num_classes);
  AdapterCache cache{shots.matrix, one_hot(labels, num_classes), beta, mix};
  cache.validate();
  return cache;
}

Matrix tip_adapter_scores(const Matrix& queries, const AdapterCache& cache, const ZeroShotHead& head) {
  if (queries.cols() != cache.keys.cols() || queries.cols() != head.dim()) {
    throw ShapeError("tip adapter: query, key and head dimensions differ");
  }
  if (cache.values.cols() != head.num_classes()) throw ShapeError("tip adapter: cache and head class counts differ");
  const Matrix zero_shot = queries * head.class_embeddings.transpose();
  const Matrix affinity = (-cache.beta * (1.0 - (queries * cache.keys.transpose()).array())).exp().matrix();
  return cache.mix * (affinity * cache.values) + zero_shot;
}

RowVector tip_adapter_predict(const RowVector& query, const AdapterCache& cache, const ZeroShotHead& head) {
  return tip_adapter_scores(Matrix(query), cache, head).row(0);
}

AdapterCache tip_adapter_finetune(const AdapterCache& cache, const EmbeddingBatch& shots, std::span<const int> labels,
                                  const ZeroShotHead& head, const TipFinetuneOptions& options) {
  cache.validate(false);
  check_labels(labels, shots.batch(), head.num_classes());
  if (shots.dim() != cache.keys.cols() || shots.dim() != head.dim()) throw ShapeError("tip adapter-f: dimensions differ");
  Parameter keys("tip.keys", cache.keys, /*apply_decay=*/false);
  AdamW opt({&keys}, 0.9, 0.999, 1e-8, 0.0);
  const Matrix targets = one_hot(labels, head.num_classes());
  const Matrix zero_shot = shots.matrix * head.class_embeddings.transpose();
  for (int step = 0; step < options.steps; ++step) {
    keys.zero_grad();
    Tape tape;
    Var q = tape.constant(shots.matrix);
    Var affinity = ag::exp(ag::scale(ag::sub(ag::matmul_nt(q, tape.param(keys)), tape.constant(Matrix::Ones(
                                                                                    shots.batch(), keys.value.rows()))),
                                     cache.beta));
    Var scores = ag::add(ag::scale(ag::matmul(affinity, tape.constant(cache.values)), cache.mix),
                         tape.constant(zero_shot));
    tape.backward(ag::soft_cross_entropy(ag::scale(scores, options.logit_scale), targets));
    opt.step(options.lr);
  }
  AdapterCache out = cache;
  out.keys = keys.value;
  return out;
}

Matrix ClipAdapter::adapt(const Matrix& embeddings) const {
  const Matrix hidden = (embeddings * w1.value).cwiseMax(0.0);
  return l2_normalize_rows(residual * (hidden * w2.value) + (1.0 - residual) * embeddings);
}

ClipAdapter make_clip_adapter(int dim, const ClipAdapterConfig& config) {
  if (config.reduction < 1 || dim < config.reduction) throw InvalidArgument("clip adapter: bad reduction ratio");
  if (config.residual < 0.0 || config.residual > 1.0) throw InvalidArgument("clip adapter: residual must be in [0, 1]");
  const int hidden = dim / config.reduction;
  Rng rng(config.seed);
  return ClipAdapter{Parameter("clip_adapter.w1", xavier_uniform(dim, hidden, rng)),
                     Parameter("clip_adapter.w2", Matrix::Zero(hidden, dim)), config.residual};
}

ClipAdapter clip_adapter_fit(const EmbeddingBatch& shots, std::span<const int> labels, const ZeroShotHead& head,
                             const ClipAdapterConfig& config) {
  head.validate();
  require_unit(shots, "clip adapter");
  check_labels(labels, shots.batch(), head.num_classes());
  require_every_class(labels, head.num_classes(), "clip adapter");
  if (shots.dim() != head.dim()) throw ShapeError("clip adapter: shot and head dimensions differ");
  ClipAdapter adapter = make_clip_adapter(head.dim(), config);
  AdamW opt({&adapter.w1, &adapter.w2}, 0.9, 0.999, 1e-8, config.weight_decay);
  const Matrix targets = one_hot(labels, head.num_classes());
  for (int step = 0; step < config.steps; ++step) {
    adapter.w1.zero_grad();
    adapter.w2.zero_grad();
    Tape tape;
    Var x = tape.constant(shots.matrix);
    Var adapted = ag::matmul(ag::relu(ag::matmul(x, tape.param(adapter.w1))), tape.param(adapter.w2));
    Var blended = ag::l2_normalize_rows(
        ag::add(ag::scale(adapted, config.residual), tape.constant((1.0 - config.residual) * shots.matrix)));
    Var logits = ag::scale(ag::matmul_nt(blended, tape.constant(head.class_embeddings)), config.logit_scale);
    tape.backward(ag::soft_cross_entropy(logits, targets));
    opt.step(config.lr);
  }
  return adapter;
}

Matrix clip_adapter_scores(const ClipAdapter& adapter, const EmbeddingBatch& images, const ZeroShotHead& head) {
  if (images.dim() != head.dim()) throw ShapeError("clip adapter: image and head dimensions differ");
  return adapter.adapt(images.matrix) * head.class_embeddings.transpose();
}

Matrix LinearProbe::scores(const Matrix& embeddings) const {
  if (embeddings.cols() != weight.value.rows()) throw ShapeError("linear probe: embedding width mismatch");
  return (embeddings * weight.value).rowwise() + RowVector(bias.value.row(0));
}

LinearProbe linear_probe_fit(const EmbeddingBatch& train, std::span<const int> labels, int num_classes,
                             const LinearProbeConfig& config) {
  if (num_classes < 2) throw InvalidArgument("linear probe needs at least two classes");
  check_labels(labels, train.batch(), num_classes);
  require_every_class(labels, num_classes, "linear probe");
  Rng rng(config.seed);
  const int d = static_cast<int>(train.dim());
  LinearProbe probe{Parameter("probe.weight", xavier_uniform(d, num_classes, rng)),
                    Parameter("probe.bias", Matrix::Zero(1, num_classes))};
  AdamW opt({&probe.weight, &probe.bias}, 0.9, 0.999, 1e-8, config.weight_decay);
  const Matrix targets = one_hot(labels, num_classes);
  for (int step = 0; step < config.steps; ++step) {
    probe.weight.zero_grad();
    probe.bias.zero_grad();
    Tape tape;
    Var logits = ag::add_row(ag::matmul(tape.constant(train.matrix), tape.param(probe.weight)), tape.param(probe.bias));
    tape.backward(ag::soft_cross_entropy(logits, targets));
    opt.step(config.lr);
  }
  return probe;
}

LinearProbe linear_probe_fit(EncoderBundle& frozen, std::span<const Image> images, std::span<const int> labels,
                             int num_classes, const LinearProbeConfig& config) {
  return linear_probe_fit(encode_images(frozen, images), labels, num_classes, config);
}

Matrix linear_probe_scores(const LinearProbe& probe, const EmbeddingBatch& images) { return probe.scores(images.matrix); }

}  // namespace fclip
