// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include "fclip/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "fclip/errors.hpp"
#include "fclip/rng.hpp"

namespace fclip {

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::ZeroShot: return "zeroshot";
    case Protocol::ClipAdapter: return "clipadapter";
    case Protocol::TipAdapter: return "tipadapter";
    case Protocol::TipAdapterF: return "tipadapter-f";
    case Protocol::LinearProbe: return "linear";
  }
  return "unknown";
}

Protocol parse_protocol(std::string_view s) {
  for (Protocol p : {Protocol::ZeroShot, Protocol::ClipAdapter, Protocol::TipAdapter, Protocol::TipAdapterF,
                     Protocol::LinearProbe}) {
    if (s == to_string(p)) return p;
  }
  throw InvalidArgument("unknown protocol '" + std::string(s) + "'");
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

int num_classes_of(std::span<const int> labels) {
  int c = 0;
  for (int y : labels) {
    if (y < 0) throw InvalidArgument("negative class label");
    c = std::max(c, y + 1);
  }
  return c;
}

std::vector<std::vector<std::size_t>> by_class(std::span<const std::size_t> indices, std::span<const int> labels,
                                               int num_classes) {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(num_classes));
  for (std::size_t i : indices) out[static_cast<std::size_t>(labels[i])].push_back(i);
  return out;
}

}  // namespace

FoldAssignment stratified_folds(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("k-fold needs k >= 2");
  if (labels.size() < static_cast<std::size_t>(k)) throw InvalidArgument("k-fold needs at least k samples");
  const int c = num_classes_of(labels);
  std::vector<std::size_t> all(labels.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto groups = by_class(all, labels, c);

  FoldAssignment out;
  out.fold.assign(labels.size(), 0);
  Rng rng(seed);
  out.stratified = std::none_of(groups.begin(), groups.end(),
                                [k](const auto& g) { return !g.empty() && g.size() < static_cast<std::size_t>(k); });
  std::vector<std::size_t> order;
  if (out.stratified) {
    for (auto& g : groups) {
      rng.shuffle(g);
      order.insert(order.end(), g.begin(), g.end());
    }
  } else {
    order = rng.permutation(labels.size());
  }
  for (std::size_t pos = 0; pos < order.size(); ++pos) out.fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  return out;
}

std::vector<std::size_t> draw_shots(std::span<const std::size_t> pool, std::span<const int> labels, int num_classes,
                                    int shots, std::uint64_t seed) {
  if (shots < 1) throw InvalidArgument("shots must be positive");
  Rng rng(seed);
  std::vector<std::size_t> out;
  for (auto& g : by_class(pool, labels, num_classes)) {
    rng.shuffle(g);
    const std::size_t take = std::min(g.size(), static_cast<std::size_t>(shots));
    out.insert(out.end(), g.begin(), g.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

std::vector<int> corpus_labels(const Corpus& corpus) {
  const auto& vocab = corpus.category_vocabulary();
  std::vector<int> labels;
  labels.reserve(corpus.size());
  for (const auto& r : corpus.records()) {
    if (r.categories.empty()) throw LoadError(r.id, "record has no category label");
    const auto it = std::lower_bound(vocab.begin(), vocab.end(), r.categories.front());
    labels.push_back(static_cast<int>(it - vocab.begin()));
  }
  return labels;
}

namespace {

EmbeddingBatch rows_of(const EmbeddingBatch& all, std::span<const std::size_t> idx) {
  Matrix m(static_cast<Eigen::Index>(idx.size()), all.dim());
  for (std::size_t i = 0; i < idx.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = all.matrix.row(static_cast<Eigen::Index>(idx[i]));
  return {std::move(m), all.unit_norm};
}

std::vector<int> labels_of(std::span<const int> labels, std::span<const std::size_t> idx) {
  std::vector<int> out;
  for (std::size_t i : idx) out.push_back(labels[i]);
  return out;
}

Matrix run_protocol(const EvalOptions& o, const ZeroShotHead& head, const EmbeddingBatch& embeddings,
                    std::span<const int> labels, std::span<const std::size_t> train, std::span<const std::size_t> test,
                    std::uint64_t fold_seed, std::vector<std::string>& warnings) {
  const EmbeddingBatch test_emb = rows_of(embeddings, test);
  const int c = head.num_classes();
  if (o.protocol == Protocol::ZeroShot) return zero_shot_scores(test_emb, head);
  if (o.protocol == Protocol::LinearProbe) {
    LinearProbeConfig cfg = o.linear_probe;
    cfg.seed = fold_seed;
    const auto y = labels_of(labels, train);
    return linear_probe_scores(linear_probe_fit(rows_of(embeddings, train), y, c, cfg), test_emb);
  }
  const auto shot_idx = draw_shots(train, labels, c, o.shots, fold_seed);
  if (shot_idx.size() < static_cast<std::size_t>(o.shots) * static_cast<std::size_t>(c)) {
    warnings.push_back("fewer than " + std::to_string(o.shots) + " shots available for some class");
  }
  const EmbeddingBatch shots = rows_of(embeddings, shot_idx);
  const auto y = labels_of(labels, shot_idx);
  switch (o.protocol) {
    case Protocol::TipAdapter:
      return tip_adapter_scores(test_emb.matrix, build_adapter_cache(shots, y, c, o.tip_beta, o.tip_mix), head);
    case Protocol::TipAdapterF: {
      const AdapterCache cache = build_adapter_cache(shots, y, c, o.tip_beta, o.tip_mix);
      return tip_adapter_scores(test_emb.matrix, tip_adapter_finetune(cache, shots, y, head, o.tip_finetune), head);
    }
    case Protocol::ClipAdapter: {
      ClipAdapterConfig cfg = o.clip_adapter;
      cfg.seed = fold_seed;
      return clip_adapter_scores(clip_adapter_fit(shots, y, head, cfg), test_emb, head);
    }
    default: break;
  }
  throw InvalidArgument("unsupported protocol");
}

}  // namespace

MetricReport kfold_evaluate(const Corpus& corpus, EncoderBundle& encoders, const EvalOptions& options) {
  if (options.train_fraction < 0.0 || options.train_fraction >= 1.0) {
    throw InvalidArgument("train_fraction must be 0 (k-fold) or in (0, 1)");
  }
  const std::vector<int> labels = corpus_labels(corpus);
  const auto& vocab = corpus.category_vocabulary();
  const ZeroShotHead head = build_zero_shot_head(vocab, options.prompt_template, encoders);
  std::vector<const Image*> images;
  for (const auto& r : corpus.records()) images.push_back(&r.image);
  const EmbeddingBatch embeddings = encode_images(encoders, images);

  std::vector<std::string> warnings;
  FoldAssignment folds = stratified_folds(labels, options.folds, options.seed);
  if (!folds.stratified) warnings.push_back("a class has fewer samples than folds; using unstratified folds");

  std::vector<MetricEntry> per_fold;
  for (int f = 0; f < options.folds; ++f) {
    const std::uint64_t fold_seed = derive_seed(options.seed, static_cast<std::uint64_t>(f));
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    if (options.train_fraction > 0.0) {
      std::vector<std::size_t> all(labels.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      Rng rng(fold_seed);
      for (auto& g : by_class(all, labels, static_cast<int>(vocab.size()))) {
        rng.shuffle(g);
        const auto take = static_cast<std::size_t>(std::ceil(options.train_fraction * static_cast<double>(g.size())));
        for (std::size_t i = 0; i < g.size(); ++i) (i < take ? train : test).push_back(g[i]);
      }
      std::sort(train.begin(), train.end());
      std::sort(test.begin(), test.end());
    } else {
      for (std::size_t i = 0; i < labels.size(); ++i) (folds.fold[i] == f ? test : train).push_back(i);
    }
    if (test.empty()) throw InvalidArgument("fold " + std::to_string(f) + " has no test samples");
    const Matrix scores = run_protocol(options, head, embeddings, labels, train, test, fold_seed, warnings);
    per_fold.push_back(compute_metrics(scores, labels_of(labels, test), options.metrics, &warnings));
  }
  MetricReport report = aggregate_folds(std::move(per_fold));
  std::sort(warnings.begin(), warnings.end());
  warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());
  report.warnings = std::move(warnings);
  return report;
}

nlohmann::json to_json(const MetricReport& report) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& e : report.per_fold) folds.push_back({{"aca", e.aca}, {"auc", e.auc}, {"f1", e.f1}});
  return {{"aca", report.aca},       {"auc", report.auc},   {"f1", report.f1},
          {"n_folds", report.n_folds}, {"per_fold", folds}, {"warnings", report.warnings}};
}

}  // namespace fclip
