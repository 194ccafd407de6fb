// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fclip/adaptation.hpp"
#include "fclip/data_model.hpp"
#include "fclip/metrics.hpp"

namespace fclip {

enum class Protocol { ZeroShot, ClipAdapter, TipAdapter, TipAdapterF, LinearProbe };

std::string_view to_string(Protocol p);
// Accepts zeroshot, clipadapter, tipadapter, tipadapter-f, linear.
Protocol parse_protocol(std::string_view s);

struct EvalOptions {
  Protocol protocol = Protocol::ZeroShot;
  int shots = 5;
  int folds = 5;
  std::uint64_t seed = 0;
  std::string prompt_template = std::string(kDefaultPromptTemplate);
  // In (0, 1): each fold is a fresh stratified split with this training
  // share instead of a k-fold partition. 0 keeps the k-fold split.
  double train_fraction = 0.0;
  double tip_beta = kTipBeta;
  double tip_mix = kTipMix;
  TipFinetuneOptions tip_finetune;
  ClipAdapterConfig clip_adapter;
  LinearProbeConfig linear_probe;
  MetricOptions metrics;
};

struct FoldAssignment {
  // fold[i] is the test fold of sample i.
  std::vector<int> fold;
  bool stratified = true;
};

// Per class, shuffle its samples and deal them round-robin into k folds,
// continuing the count across classes. Falls back to an unstratified dealing
// of one seeded permutation when some class has fewer than k samples.
FoldAssignment stratified_folds(std::span<const int> labels, int k, std::uint64_t seed);

// Up to `shots` indices per class from `pool`, drawn with a seeded shuffle.
std::vector<std::size_t> draw_shots(std::span<const std::size_t> pool, std::span<const int> labels, int num_classes,
                                    int shots, std::uint64_t seed);

// Labels are each record's first category indexed into the vocabulary.
std::vector<int> corpus_labels(const Corpus& corpus);

// Runs the protocol on every fold and averages. Only `encoders` is read.
MetricReport kfold_evaluate(const Corpus& corpus, EncoderBundle& encoders, const EvalOptions& options);

nlohmann::json to_json(const MetricReport& report);

}  // namespace fclip
