// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fclip/attention.hpp"
#include "fclip/config.hpp"
#include "fclip/encoders.hpp"

namespace fclip {

// Encoders, projection heads, cross-attention and the temperature.
class Model {
 public:
  explicit Model(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  EncoderBundle& encoders() { return encoders_; }
  AttentionParams& attention() { return attention_; }
  Parameter& log_lambda() { return log_lambda_; }
  double lambda() const { return std::exp(log_lambda_.value(0, 0)); }

  // Stable order: encoders, attention, log_lambda.
  std::vector<Parameter*> parameters();
  void zero_grad();
  // Keeps lambda at or below TemperatureScale::kMaxLambda.
  void clamp_temperature();

 private:
  Model(const ModelConfig& config, Rng rng);

  ModelConfig config_;
  // Members below draw from the init Rng in declaration order.
  EncoderBundle encoders_;
  AttentionParams attention_;
  Parameter log_lambda_;
};

// Order-sensitive FNV-1a over every parameter's name, shape and bytes.
std::uint64_t parameter_checksum(std::span<Parameter* const> params);

// Decoupled weight decay Adam. State is bound to the parameter list given at
// construction.
class AdamW {
 public:
  AdamW(std::vector<Parameter*> params, double beta1, double beta2, double eps, double weight_decay);

  void step(double lr);
  long steps_taken() const { return t_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  double beta1_;
  double beta2_;
  double eps_;
  double weight_decay_;
  long t_ = 0;
};

struct Checkpoint {
  std::unique_ptr<Model> model;
  TrainConfig config;
  std::string config_hash;
  long step = 0;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary layout: "FCLIPCK1", u32 version, u64 header length, JSON header
// (config, config_hash, step, parameter table), then row-major float64 data.
void save_checkpoint(const std::filesystem::path& path, Model& model, const TrainConfig& config, long step);
// Throws CheckpointError on a missing file, bad magic, version or shape.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fclip
