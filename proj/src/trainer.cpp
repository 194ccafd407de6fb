// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include "fclip/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "fclip/attention.hpp"
#include "fclip/errors.hpp"

namespace fclip {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng epoch_rng(std::uint64_t seed, int epoch) {
  return Rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(epoch))));
}

void check_batch_size(const TrainConfig& config) {
  if (config.batch_size < 2 || config.batch_size % 2 != 0) {
    throw InvalidArgument("batch_size must be a positive even number, got " + std::to_string(config.batch_size));
  }
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// `count` indices: a permutation of [0, n) followed by uniform draws.
std::vector<std::size_t> padded_pass(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> order = rng.permutation(n);
  while (order.size() < count) order.push_back(rng.index(n));
  return order;
}

}  // namespace

std::size_t batches_per_epoch(std::size_t expert_size, std::size_t public_size, const TrainConfig& config) {
  check_batch_size(config);
  const auto b = static_cast<std::size_t>(config.batch_size);
  if (!config.ablation.mixed_on) return ceil_div(public_size, b);
  return ceil_div(std::max(expert_size, public_size), b / 2);
}

std::vector<MixedBatch> mixed_batches(const Corpus& expert, const Corpus& pub, const TrainConfig& config, int epoch) {
  check_batch_size(config);
  if (expert.empty()) throw InvalidArgument("mixed_batches: expert corpus is empty");
  if (pub.empty()) throw InvalidArgument("mixed_batches: public corpus is empty");
  const std::size_t half = static_cast<std::size_t>(config.batch_size) / 2;
  const bool public_larger = pub.size() >= expert.size();
  const Corpus& large = public_larger ? pub : expert;
  const Corpus& small = public_larger ? expert : pub;
  const std::size_t count = ceil_div(large.size(), half);
  const std::size_t slots = count * half;

  Rng rng = epoch_rng(config.seed, epoch);
  const std::vector<std::size_t> large_order = padded_pass(large.size(), slots, rng);
  std::vector<std::size_t> small_order;
  if (small.size() == large.size()) {
    small_order = padded_pass(small.size(), slots, rng);
  } else {
    small_order.reserve(slots);
    for (std::size_t i = 0; i < slots; ++i) small_order.push_back(rng.index(small.size()));
  }

  std::vector<MixedBatch> batches(count);
  for (std::size_t b = 0; b < count; ++b) {
    auto& large_half = public_larger ? batches[b].public_half : batches[b].expert_half;
    auto& small_half = public_larger ? batches[b].expert_half : batches[b].public_half;
    for (std::size_t i = 0; i < half; ++i) {
      large_half.push_back(&large[large_order[b * half + i]]);
      small_half.push_back(&small[small_order[b * half + i]]);
    }
  }
  return batches;
}

std::vector<MixedBatch> public_batches(const Corpus& pub, const TrainConfig& config, int epoch) {
  check_batch_size(config);
  if (pub.empty()) throw InvalidArgument("public_batches: public corpus is empty");
  const auto b = static_cast<std::size_t>(config.batch_size);
  const std::size_t count = ceil_div(pub.size(), b);
  Rng rng = epoch_rng(config.seed, epoch);
  const std::vector<std::size_t> order = padded_pass(pub.size(), count * b, rng);
  std::vector<MixedBatch> batches(count);
  for (std::size_t i = 0; i < order.size(); ++i) batches[i / b].public_half.push_back(&pub[order[i]]);
  return batches;
}

double lr_at(long step, long total_steps, long warmup_steps, double base_lr) {
  if (total_steps < 1 || step < 0 || step >= total_steps) {
    throw InvalidArgument("lr_at: step " + std::to_string(step) + " outside [0, " + std::to_string(total_steps) + ")");
  }
  if (warmup_steps < 0) throw InvalidArgument("lr_at: negative warmup");
  if (step < warmup_steps) return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  if (warmup_steps >= total_steps) return base_lr;
  const double progress = static_cast<double>(step - warmup_steps) / static_cast<double>(total_steps - warmup_steps);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

Corpus expand_multilabel(const Corpus& pub) {
  std::vector<ImageTextRecord> out;
  out.reserve(pub.size());
  for (const ImageTextRecord& r : pub.records()) {
    if (r.categories.size() <= 1) {
      out.push_back(r);
      continue;
    }
    for (std::size_t k = 0; k < r.categories.size(); ++k) {
      ImageTextRecord copy = r;
      copy.id = r.id + "#" + std::to_string(k);
      copy.categories = {r.categories[k]};
      out.push_back(std::move(copy));
    }
  }
  return Corpus(pub.name(), std::move(out));
}

std::string public_prompt(const ImageTextRecord& record, const std::string& prompt_template) {
  if (record.categories.empty()) throw InvalidArgument("public record '" + record.id + "' has no category");
  return fill_prompt(record.categories.front(), prompt_template);
}

namespace {

struct Forward {
  Var total;
  LossBreakdown loss;
};

void require_finite(double value, const char* component) {
  if (!std::isfinite(value)) throw TrainingError(component, "loss is not finite (" + std::to_string(value) + ")");
}

Forward forward(Tape& tape, const MixedBatch& batch, Model& model, const TrainConfig& config,
                const StepOptions& options) {
  if (batch.public_half.empty()) throw InvalidArgument("batch has no public records");
  EncoderBundle& enc = model.encoders();
  std::vector<const Image*> pub_images;
  std::vector<std::string> prompts;
  std::vector<std::string> keys;
  for (const ImageTextRecord* r : batch.public_half) {
    pub_images.push_back(&r->image);
    prompts.push_back(public_prompt(*r, config.prompt_template));
    keys.push_back(r->categories.front());
  }

  Var lambda = ag::exp(tape.param(model.log_lambda()));
  Var v_p = enc.image_embeddings(tape, pub_images);
  Var t_p = enc.text_embeddings(tape, prompts);

  Forward f;
  f.loss.alpha = 0.0;
  const AblationFlags& ab = config.ablation;
  const bool have_expert = !batch.expert_half.empty();
  Var t_p_used = t_p;
  Var l_m;
  Var l_ek;
  bool l_ek_in_total = false;
  if (have_expert) {
    std::vector<const Image*> exp_images;
    std::vector<std::string> exp_texts;
    for (const ImageTextRecord* r : batch.expert_half) {
      exp_images.push_back(&r->image);
      exp_texts.push_back(r->text_en);
    }
    Var v_m = enc.image_embeddings(tape, exp_images);
    Var t_m = enc.text_embeddings(tape, exp_texts);
    l_m = ag::contrastive_loss(v_m, t_m, lambda, identity_targets(static_cast<int>(v_m.rows())).matrix);
    f.loss.l_m = l_m.scalar();

    if (!options.ek_free && (ab.revision_on || ab.fusion_on)) {
      Var keys_in = config.ek_stop_gradient ? ag::detach(v_m) : v_m;
      Var values_in = config.ek_stop_gradient ? ag::detach(t_m) : t_m;
      Var ek = ag::extract_expert_knowledge(v_p, keys_in, values_in, model.attention());
      if (ab.revision_on) {
        l_ek = ag::mse(ek, t_p);
        l_ek_in_total = true;
        f.loss.alpha = config.alpha;
        f.loss.l_ek = l_ek.scalar();
      } else {
        t_p_used = ag::fuse_expert_knowledge(ek, t_p);
        f.loss.l_ek = loss_ek(ek.value(), t_p.value());
      }
    } else if (!options.ek_free && config.monitor_ek) {
      const ExpertKnowledge ek = extract_expert_knowledge(v_p.value(), v_m.value(), t_m.value(), model.attention());
      f.loss.l_ek = loss_ek(ek.matrix, t_p.value());
    }
  }

  Var l_p = ag::contrastive_loss(v_p, t_p_used, lambda, cooccurrence_targets(keys).matrix);
  f.loss.l_p = l_p.scalar();
  f.total = l_p;
  if (have_expert) f.total = ag::add(f.total, l_m);
  if (l_ek_in_total) f.total = ag::add(f.total, ag::scale(l_ek, config.alpha));
  f.loss.total = f.total.scalar();

  require_finite(f.loss.l_p, "l_p");
  require_finite(f.loss.l_m, "l_m");
  require_finite(f.loss.l_ek, "l_ek");
  require_finite(f.loss.total, "total");
  return f;
}

}  // namespace

LossBreakdown train_step(const MixedBatch& batch, Model& model, AdamW& optimizer, const TrainConfig& config, double lr,
                         const StepOptions& options) {
  for (const Parameter* p : model.parameters()) {
    if (!p->value.allFinite()) throw TrainingError(p->name, "parameter is not finite before the step");
  }
  model.zero_grad();
  Tape tape;
  const Forward f = forward(tape, batch, model, config, options);
  tape.backward(f.total);
  for (const Parameter* p : model.parameters()) {
    if (!p->grad.allFinite()) throw TrainingError(p->name, "gradient is not finite");
  }
  optimizer.step(lr);
  model.clamp_temperature();
  return f.loss;
}

LossBreakdown evaluate_batch(const MixedBatch& batch, Model& model, const TrainConfig& config,
                             const StepOptions& options) {
  Tape tape(false);
  return forward(tape, batch, model, config, options).loss;
}

AdamW make_optimizer(Model& model, const TrainConfig& config) {
  return AdamW(model.parameters(), config.adam_beta1, config.adam_beta2, config.adam_eps, config.weight_decay);
}

FitResult fit(Model& model, const Corpus& expert, const Corpus& raw_public, const TrainConfig& config,
              const FitOutputs& outputs) {
  config.validate();
  const Corpus pub = expand_multilabel(raw_public);
  if (pub.empty()) throw InvalidArgument("fit: public corpus is empty");
  if (config.ablation.mixed_on && expert.empty()) throw InvalidArgument("fit: expert corpus is empty");
  const long per_epoch = static_cast<long>(batches_per_epoch(expert.size(), pub.size(), config));
  const long total = config.max_steps > 0 ? config.max_steps : per_epoch * config.epochs;

  std::ofstream log;
  if (!outputs.loss_log.empty()) {
    if (outputs.loss_log.has_parent_path()) std::filesystem::create_directories(outputs.loss_log.parent_path());
    log.open(outputs.loss_log, std::ios::trunc);
    if (!log) throw Error("cannot write loss log " + outputs.loss_log.string());
  }

  AdamW optimizer = make_optimizer(model, config);
  FitResult result;
  long step = 0;
  for (int epoch = 0; step < total; ++epoch) {
    const auto batches = config.ablation.mixed_on ? mixed_batches(expert, pub, config, epoch)
                                                  : public_batches(pub, config, epoch);
    for (const MixedBatch& batch : batches) {
      if (step >= total) break;
      StepTrace t;
      t.step = step;
      t.epoch = epoch;
      t.lr = lr_at(step, total, per_epoch, config.lr);
      t.loss = train_step(batch, model, optimizer, config, t.lr, outputs.step_options);
      t.lambda = model.lambda();
      if (log.is_open()) {
        log << nlohmann::json{{"step", t.step},     {"epoch", t.epoch},     {"l_p", t.loss.l_p},
                              {"l_m", t.loss.l_m},   {"l_ek", t.loss.l_ek},  {"alpha", t.loss.alpha},
                              {"total", t.loss.total}, {"lr", t.lr},         {"lambda", t.lambda}}
                   .dump()
            << '\n';
      }
      if (outputs.on_step) outputs.on_step(t);
      result.trace.push_back(t);
      ++step;
    }
  }
  if (!outputs.checkpoint.empty()) {
    save_checkpoint(outputs.checkpoint, model, config, step);
    result.checkpoint = outputs.checkpoint;
  }
  return result;
}

}  // namespace fclip
