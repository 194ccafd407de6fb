// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fclip/config.hpp"
#include "fclip/data_model.hpp"
#include "fclip/model.hpp"
#include "fclip/objectives.hpp"

namespace fclip {

// One optimizer step's worth of records. In mixed mode both halves hold
// batch_size / 2 records; with mixing disabled expert_half is empty and
// public_half holds batch_size records.
struct MixedBatch {
  std::vector<const ImageTextRecord*> expert_half;
  std::vector<const ImageTextRecord*> public_half;
};

// Batches for one epoch. The larger corpus is walked once in a seeded
// permutation (the final batch topped up with seeded draws from it); the
// smaller one is sampled with replacement. Equal sizes walk both.
// Throws InvalidArgument on an empty corpus or odd batch size.
std::vector<MixedBatch> mixed_batches(const Corpus& expert, const Corpus& pub, const TrainConfig& config,
                                      int epoch = 0);

// Public-only batches of batch_size records (mixing ablated).
std::vector<MixedBatch> public_batches(const Corpus& pub, const TrainConfig& config, int epoch = 0);

std::size_t batches_per_epoch(std::size_t expert_size, std::size_t public_size, const TrainConfig& config);

// Linear warmup from 0 over warmup_steps, then half-cosine decay to 0 at
// total_steps. With warmup_steps >= total_steps only the ramp is used.
double lr_at(long step, long total_steps, long warmup_steps, double base_lr);

// One single-category record per (record, category) pair; ids of expanded
// multi-label records gain a "#<k>" suffix. Single-label corpora are copied.
Corpus expand_multilabel(const Corpus& pub);

// Prompt for a public record's first category. fit() expands multi-label
// records first, so the first category is the only one.
std::string public_prompt(const ImageTextRecord& record, const std::string& prompt_template);

struct StepTrace {
  long step = 0;
  int epoch = 0;
  LossBreakdown loss;
  double lr = 0.0;
  double lambda = 0.0;
};

struct StepOptions {
  // Drops the attention branch outright, as if it were never built. Used as
  // the reference for the revision-off ablation contract.
  bool ek_free = false;
};

// Forward, backward and one AdamW update at `lr`. Throws TrainingError naming
// the first non-finite loss component.
LossBreakdown train_step(const MixedBatch& batch, Model& model, AdamW& optimizer, const TrainConfig& config,
                         double lr, const StepOptions& options = {});

// Loss values for a batch without touching parameters or gradients.
LossBreakdown evaluate_batch(const MixedBatch& batch, Model& model, const TrainConfig& config,
                             const StepOptions& options = {});

AdamW make_optimizer(Model& model, const TrainConfig& config);

struct FitOutputs {
  // Empty paths skip the corresponding artifact.
  std::filesystem::path checkpoint;
  std::filesystem::path loss_log;
  std::function<void(const StepTrace&)> on_step;
  StepOptions step_options;
};

struct FitResult {
  std::vector<StepTrace> trace;
  std::filesystem::path checkpoint;
};

// Trains `model` in place for config.epochs (or config.max_steps) steps.
FitResult fit(Model& model, const Corpus& expert, const Corpus& pub, const TrainConfig& config,
              const FitOutputs& outputs = {});

}  // namespace fclip
