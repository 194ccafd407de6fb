// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include "fclip/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fclip/errors.hpp"
#include "fclip/tokenizer.hpp"

namespace fclip {

using nlohmann::json;

Model::Model(const ModelConfig& config) : Model(config, Rng(config.init_seed)) {}

Model::Model(const ModelConfig& config, Rng rng)
    : config_(config),
      encoders_(config.encoders, rng),
      attention_(AttentionParams::init(config.encoders.embed_dim, config.heads, rng)),
      log_lambda_("log_lambda", Matrix::Constant(1, 1, TemperatureScale{}.log_lambda), /*apply_decay=*/false) {}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out;
  encoders_.collect_parameters(out);
  attention_.collect_parameters(out);
  out.push_back(&log_lambda_);
  return out;
}

void Model::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

void Model::clamp_temperature() {
  double& v = log_lambda_.value(0, 0);
  v = std::min(v, TemperatureScale::max_log_lambda());
}

std::uint64_t parameter_checksum(std::span<Parameter* const> params) {
  std::string bytes;
  for (const Parameter* p : params) {
    bytes += p->name;
    bytes += ':' + std::to_string(p->value.rows()) + 'x' + std::to_string(p->value.cols()) + ';';
    bytes.append(reinterpret_cast<const char*>(p->value.data()), sizeof(double) * static_cast<std::size_t>(p->value.size()));
  }
  return fnv1a64(bytes);
}

AdamW::AdamW(std::vector<Parameter*> params, double beta1, double beta2, double eps, double weight_decay)
    : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw InvalidArgument("AdamW: betas must be in [0, 1)");
  if (!(eps > 0.0)) throw InvalidArgument("AdamW: eps must be positive");
  if (weight_decay < 0.0) throw InvalidArgument("AdamW: weight decay must be nonnegative");
  for (const Parameter* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void AdamW::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    if (p.decay) p.value *= 1.0 - lr * weight_decay_;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

namespace {

constexpr std::array<char, 8> kMagic = {'F', 'C', 'L', 'I', 'P', 'C', 'K', '1'};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, Model& model, const TrainConfig& config, long step) {
  const auto params = model.parameters();
  json table = json::array();
  for (const Parameter* p : params) table.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  const json cfg = to_json(config);
  const std::string header = json{{"config", cfg}, {"config_hash", config_hash(cfg)}, {"step", step}, {"parameters", table}}.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(kMagic.data(), kMagic.size());
  const std::uint32_t version = kCheckpointVersion;
  const std::uint64_t length = header.size();
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const Parameter* p : params) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = p->value;
    out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(sizeof(double) * rm.size()));
  }
  if (!out) throw CheckpointError("short write to checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw CheckpointError(path.string() + " is not a checkpoint file");
  std::uint32_t version = 0;
  std::uint64_t length = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&length), sizeof(length));
  if (!in) throw CheckpointError(path.string() + ": truncated header");
  if (version != kCheckpointVersion) {
    throw CheckpointError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  if (length > (std::uint64_t{1} << 30)) throw CheckpointError(path.string() + ": implausible header length");
  std::string header(length, '\0');
  in.read(header.data(), static_cast<std::streamsize>(length));
  if (!in) throw CheckpointError(path.string() + ": truncated header");

  Checkpoint ck;
  json meta;
  try {
    meta = json::parse(header);
    ck.config = train_config_from_json(meta.at("config"));
    ck.config_hash = meta.at("config_hash").get<std::string>();
    ck.step = meta.at("step").get<long>();
  } catch (const json::exception& e) {
    throw CheckpointError(path.string() + ": bad header: " + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(path.string() + ": bad config: " + e.what());
  }
  ck.model = std::make_unique<Model>(ck.config.model);
  auto params = ck.model->parameters();
  const json& table = meta.at("parameters");
  if (table.size() != params.size()) throw CheckpointError(path.string() + ": parameter count differs from the config");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    const auto name = table[i].at("name").get<std::string>();
    const auto rows = table[i].at("rows").get<Eigen::Index>();
    const auto cols = table[i].at("cols").get<Eigen::Index>();
    if (name != p.name || rows != p.value.rows() || cols != p.value.cols()) {
      throw CheckpointError(path.string() + ": parameter '" + name + "' does not match the model layout");
    }
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
    in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(sizeof(double) * rm.size()));
    if (!in) throw CheckpointError(path.string() + ": truncated data for '" + name + "'");
    p.value = rm;
    p.zero_grad();
  }
  return ck;
}

}  // namespace fclip
