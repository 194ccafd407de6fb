// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include "fclip/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "fclip/errors.hpp"
#include "fclip/tokenizer.hpp"

namespace fclip {

using nlohmann::json;

void TrainConfig::validate() const {
  if (batch_size < 2 || batch_size % 2 != 0) throw ConfigError("batch_size must be a positive even number");
  if (epochs < 1) throw ConfigError("epochs must be positive");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be nonnegative");
  if (alpha < 0.0) throw ConfigError("alpha must be nonnegative");
  if (max_steps < 0) throw ConfigError("max_steps must be nonnegative");
  if (ablation.revision_on && ablation.fusion_on) {
    throw ConfigError("revision_on and fusion_on cannot both be enabled");
  }
  if (ablation.fusion_on && !ablation.mixed_on) throw ConfigError("fusion_on needs mixed_on for expert keys");
  if (model.heads < 1 || model.encoders.embed_dim % model.heads != 0) {
    throw ConfigError("embed_dim must be divisible by heads");
  }
  if (prompt_template.find("{}") == std::string::npos ||
      prompt_template.find("{}", prompt_template.find("{}") + 2) != std::string::npos) {
    throw ConfigError("prompt_template must contain exactly one '{}'");
  }
}

json to_json(const TrainConfig& c) {
  const auto& e = c.model.encoders;
  return json{{"batch_size", c.batch_size},
              {"epochs", c.epochs},
              {"lr", c.lr},
              {"weight_decay", c.weight_decay},
              {"alpha", c.alpha},
              {"adam_beta1", c.adam_beta1},
              {"adam_beta2", c.adam_beta2},
              {"adam_eps", c.adam_eps},
              {"seed", c.seed},
              {"max_steps", c.max_steps},
              {"revision_on", c.ablation.revision_on},
              {"mixed_on", c.ablation.mixed_on},
              {"fusion_on", c.ablation.fusion_on},
              {"ek_stop_gradient", c.ek_stop_gradient},
              {"monitor_ek", c.monitor_ek},
              {"prompt_template", c.prompt_template},
              {"heads", c.model.heads},
              {"init_seed", c.model.init_seed},
              {"image_encoder", e.image_encoder},
              {"text_encoder", e.text_encoder},
              {"image_size", e.image_size},
              {"conv_channels", e.conv_channels},
              {"conv_kernel", e.conv_kernel},
              {"conv_stride", e.conv_stride},
              {"pool_grid", e.pool_grid},
              {"vocab_buckets", e.vocab_buckets},
              {"text_width", e.text_width},
              {"max_tokens", e.max_tokens},
              {"embed_dim", e.embed_dim}};
}

std::vector<std::string> train_config_keys() {
  const json defaults = to_json(TrainConfig{});
  std::vector<std::string> keys;
  for (const auto& [k, _] : defaults.items()) keys.push_back(k);
  return keys;
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type: " + e.what());
  }
}

}  // namespace

TrainConfig train_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a flat JSON object");
  const auto valid = train_config_keys();
  for (const auto& [k, _] : j.items()) {
    if (std::find(valid.begin(), valid.end(), k) == valid.end()) {
      std::string msg = "unknown config key '" + k + "'; valid keys are:";
      for (const auto& v : valid) msg += " " + v;
      throw ConfigError(msg);
    }
  }
  TrainConfig c;
  auto& e = c.model.encoders;
  read(j, "batch_size", c.batch_size);
  read(j, "epochs", c.epochs);
  read(j, "lr", c.lr);
  read(j, "weight_decay", c.weight_decay);
  read(j, "alpha", c.alpha);
  read(j, "adam_beta1", c.adam_beta1);
  read(j, "adam_beta2", c.adam_beta2);
  read(j, "adam_eps", c.adam_eps);
  read(j, "seed", c.seed);
  read(j, "max_steps", c.max_steps);
  read(j, "revision_on", c.ablation.revision_on);
  read(j, "mixed_on", c.ablation.mixed_on);
  read(j, "fusion_on", c.ablation.fusion_on);
  read(j, "ek_stop_gradient", c.ek_stop_gradient);
  read(j, "monitor_ek", c.monitor_ek);
  read(j, "prompt_template", c.prompt_template);
  read(j, "heads", c.model.heads);
  read(j, "init_seed", c.model.init_seed);
  read(j, "image_encoder", e.image_encoder);
  read(j, "text_encoder", e.text_encoder);
  read(j, "image_size", e.image_size);
  read(j, "conv_channels", e.conv_channels);
  read(j, "conv_kernel", e.conv_kernel);
  read(j, "conv_stride", e.conv_stride);
  read(j, "pool_grid", e.pool_grid);
  read(j, "vocab_buckets", e.vocab_buckets);
  read(j, "text_width", e.text_width);
  read(j, "max_tokens", e.max_tokens);
  read(j, "embed_dim", e.embed_dim);
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return train_config_from_json(j);
}

std::string config_hash(const json& resolved) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(resolved.dump())));
  return buf;
}

}  // namespace fclip
