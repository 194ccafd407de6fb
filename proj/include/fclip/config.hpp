// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fclip/data_model.hpp"
#include "fclip/encoders.hpp"

namespace fclip {

struct AblationFlags {
  bool revision_on = true;
  bool mixed_on = true;
  bool fusion_on = false;
};

struct ModelConfig {
  EncoderConfig encoders;
  int heads = 2;
  std::uint64_t init_seed = 0;
};

// Pretraining recipe. Serialized as one flat JSON object; the reference run
// uses batch 24, AdamW lr 1e-4 / decay 1e-5, alpha 100, d 512, image 512,
// 256 tokens, 8 heads.
struct TrainConfig {
  int batch_size = 24;
  int epochs = 1;
  double lr = 1e-4;
  double weight_decay = 1e-5;
  double alpha = 100.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  // Stop after this many optimizer steps; 0 runs every epoch to completion.
  int max_steps = 0;
  AblationFlags ablation;
  // Blocks L_EK gradients into the expert branches (v_m, t_m).
  bool ek_stop_gradient = false;
  // When revision and fusion are both off, still evaluate L_EK (detached) so
  // the log shows it. Turning this off removes the attention path entirely.
  bool monitor_ek = true;
  std::string prompt_template = std::string(kDefaultPromptTemplate);
  ModelConfig model;

  // Throws ConfigError on any violated invariant.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);

// Strict: unknown keys are an error that lists every valid key. Missing keys
// keep their defaults.
TrainConfig train_config_from_json(const nlohmann::json& j);
TrainConfig load_train_config(const std::string& path);

std::vector<std::string> train_config_keys();

// 16 hex digits of FNV-1a over the canonical (sorted-key) JSON dump.
std::string config_hash(const nlohmann::json& resolved);
inline std::string config_hash(const TrainConfig& config) { return config_hash(to_json(config)); }

}  // namespace fclip
