// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "caption_fixtures.hpp"
#include "fclip/adaptation.hpp"
#include "fclip/attention.hpp"
#include "fclip/config.hpp"
#include "fclip/corpus_tools.hpp"
#include "fclip/errors.hpp"
#include "fclip/evaluation.hpp"
#include "fclip/metrics.hpp"
#include "fclip/model.hpp"
#include "fclip/objectives.hpp"
#include "fclip/trainer.hpp"
#include "test_support.hpp"

using namespace fclip;
using fclip::testing::random_matrix;
using fclip::testing::random_unit_rows;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Matrix permute_rows(const Matrix& m, const std::vector<std::size_t>& perm) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(perm[i]));
  }
  return out;
}

// 1. Co-occurrence targets against pairwise equality. The targets depend on
// labels only through which positions share a label, so every list over an
// alphabet of size <= 3 is covered by enumerating restricted growth strings
// (one per partition into at most three blocks) for every B up to 16.
Outcome target_matrix_oracle() {
  const auto t0 = Clock::now();
  const std::string names[3] = {"a", "b", "c"};
  long lists = 0;
  for (int b = 1; b <= 16; ++b) {
    const auto n = static_cast<std::size_t>(b);
    std::vector<int> code(n, 0);
    // prefix_max[i] is the largest code in positions 0..i-1.
    std::vector<int> prefix_max(n, 0);
    std::vector<std::string> cats(n, names[0]);
    while (true) {
      ++lists;
      const Matrix g = cooccurrence_targets(cats).matrix;
      int block_size[3] = {0, 0, 0};
      for (int c : code) ++block_size[c];
      double inverse[3] = {0.0, 0.0, 0.0};
      for (int k = 0; k < 3; ++k) inverse[k] = block_size[k] > 0 ? 1.0 / block_size[k] : 0.0;
      double worst = 0.0;
      const double* col = g.data();
      for (int j = 0; j < b; ++j, col += b) {
        const int cj = code[static_cast<std::size_t>(j)];
        for (int i = 0; i < b; ++i) {
          const double want = code[static_cast<std::size_t>(i)] == cj ? inverse[cj] : 0.0;
          worst = std::max(worst, std::abs(col[i] - want));
        }
      }
      if (!(worst <= 1e-12)) return {false, "mismatch at B=" + std::to_string(b)};
      // Next restricted growth string: code[0] = 0, code[i] <= 1 + max(code[0..i)), values < 3.
      int i = b - 1;
      while (i >= 1 && code[static_cast<std::size_t>(i)] >= std::min(prefix_max[static_cast<std::size_t>(i)] + 1, 2)) --i;
      if (i < 1) break;
      ++code[static_cast<std::size_t>(i)];
      cats[static_cast<std::size_t>(i)] = names[code[static_cast<std::size_t>(i)]];
      for (int k = i + 1; k < b; ++k) {
        const auto u = static_cast<std::size_t>(k);
        prefix_max[u] = std::max(prefix_max[u - 1], code[u - 1]);
        code[u] = 0;
        cats[u] = names[0];
      }
    }
  }
  for (int b = 1; b <= 24; ++b) {
    if (identity_targets(b).matrix != Matrix::Identity(b, b)) return {false, "identity_targets differs at B=" + std::to_string(b)};
  }
  const double secs = seconds_since(t0);
  return {secs < 10.0, std::to_string(lists) + " label partitions, " + fmt("%.2f s (limit 10 s)", secs)};
}

// 2. Uniform logits.
Outcome uniform_logit_value() {
  double worst = 0.0;
  for (int b : {2, 4, 8, 24}) {
    const double ln_b = std::log(static_cast<double>(b));
    worst = std::max(worst, std::abs(soft_cross_entropy(Matrix::Zero(b, b), identity_targets(b)) - ln_b));
    Rng rng(static_cast<std::uint64_t>(b));
    const EmbeddingBatch v{random_unit_rows(b, 8, rng), true};
    const EmbeddingBatch t{random_unit_rows(b, 8, rng), true};
    worst = std::max(worst, std::abs(loss_m(v, t, 0.0) - 2.0 * ln_b));
  }
  return {worst <= 1e-6, fmt("max deviation %.3g (tol 1e-6)", worst)};
}

// 3. Gradients of every loss against central differences, over embeddings,
// attention parameters and log_lambda.
Outcome gradient_checks() {
  const auto t0 = Clock::now();
  constexpr int kB = 4, kD = 8, kHeads = 2;
  constexpr double kH = 1e-5, kTol = 1e-4, kFloor = 1e-6;
  const std::vector<std::string> cats = {"a", "b", "a", "c"};
  const Matrix g_p = cooccurrence_targets(cats).matrix;
  const Matrix g_m = identity_targets(kB).matrix;

  enum class Which { Lm, Lp, Lek, Total };
  double worst = 0.0;
  std::string worst_at;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    std::vector<Matrix> inputs = {random_matrix(kB, kD, rng), random_matrix(kB, kD, rng), random_matrix(kB, kD, rng),
                                  random_matrix(kB, kD, rng), Matrix::Constant(1, 1, std::log(1.0 / 0.07))};
    AttentionParams attn = AttentionParams::init(kD, kHeads, rng);
    std::vector<Parameter*> params;
    attn.collect_parameters(params);

    auto build = [&](Tape& tape, const std::vector<Var>& x, Which which) {
      Var v_p = ag::l2_normalize_rows(x[0]);
      Var t_p = ag::l2_normalize_rows(x[1]);
      Var v_m = ag::l2_normalize_rows(x[2]);
      Var t_m = ag::l2_normalize_rows(x[3]);
      Var lambda = ag::exp(x[4]);
      Var l_m = ag::contrastive_loss(v_m, t_m, lambda, g_m);
      Var l_p = ag::contrastive_loss(v_p, t_p, lambda, g_p);
      Var l_ek = ag::mse(ag::extract_expert_knowledge(v_p, v_m, t_m, attn), t_p);
      (void)tape;
      switch (which) {
        case Which::Lm: return l_m;
        case Which::Lp: return l_p;
        case Which::Lek: return l_ek;
        case Which::Total: return ag::total_loss(l_p, l_m, l_ek, 100.0);
      }
      return l_m;
    };
    auto evaluate = [&](Which which) {
      Tape tape(false);
      std::vector<Var> x;
      for (const Matrix& m : inputs) x.push_back(tape.constant(m));
      return build(tape, x, which).scalar();
    };

    for (Which which : {Which::Lm, Which::Lp, Which::Lek, Which::Total}) {
      for (Parameter* p : params) p->zero_grad();
      std::vector<Matrix> analytic;
      {
        Tape tape;
        std::vector<Var> x;
        for (const Matrix& m : inputs) x.push_back(tape.leaf(m));
        tape.backward(build(tape, x, which));
        for (const Var& v : x) analytic.push_back(v.grad());
      }
      auto compare = [&](double a, double& slot, const std::string& where) {
        const double saved = slot;
        slot = saved + kH;
        const double up = evaluate(which);
        slot = saved - kH;
        const double down = evaluate(which);
        slot = saved;
        const double numeric = (up - down) / (2.0 * kH);
        const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), kFloor});
        if (err > worst) {
          worst = err;
          worst_at = where;
        }
      };
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        for (Eigen::Index i = 0; i < inputs[k].size(); ++i) {
          compare(analytic[k].data()[i], inputs[k].data()[i], "input " + std::to_string(k));
        }
      }
      for (Parameter* p : params) {
        for (Eigen::Index i = 0; i < p->value.size(); ++i) compare(p->grad.data()[i], p->value.data()[i], p->name);
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= kTol && secs < 60.0,
          fmt("max relative error %.3g (tol 1e-4)", worst) + " at " + worst_at + ", 20 seeds, " +
              fmt("%.2f s", secs)};
}

// 4. Attention invariances.
Outcome attention_invariances() {
  double perm_dev = 0.0, single_dev = 0.0, simplex_dev = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const AttentionParams p = AttentionParams::init(8, 2, rng);
    const Matrix vp = random_matrix(5, 8, rng), vm = random_matrix(6, 8, rng), tm = random_matrix(6, 8, rng);
    const auto perm = rng.permutation(6);
    const Matrix a = extract_expert_knowledge(vp, vm, tm, p).matrix;
    const Matrix b = extract_expert_knowledge(vp, permute_rows(vm, perm), permute_rows(tm, perm), p).matrix;
    perm_dev = std::max(perm_dev, (a - b).cwiseAbs().maxCoeff());

    const Matrix one = extract_expert_knowledge(vp, vm.topRows(1), tm.topRows(1), p).matrix;
    for (Eigen::Index i = 1; i < one.rows(); ++i) single_dev = std::max(single_dev, (one.row(i) - one.row(0)).cwiseAbs().maxCoeff());

    for (const Matrix& w : attention_weights(vp, vm, p)) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) simplex_dev = std::max(simplex_dev, std::abs(w.row(i).sum() - 1.0));
    }
  }
  const bool ok = perm_dev <= 1e-6 && single_dev <= 1e-6 && simplex_dev <= 1e-6;
  return {ok, fmt("permutation %.3g, ", perm_dev) + fmt("single key %.3g, ", single_dev) +
                  fmt("row sums %.3g (tol 1e-6)", simplex_dev)};
}

// 5. Toy end-to-end pretraining then held-out zero-shot classification.
Outcome toy_separability() {
  const auto t0 = Clock::now();
  SyntheticConfig sc;
  sc.num_categories = 2;
  sc.samples_per_category = 32;
  sc.noise_level = 0.05;
  sc.seed = 5;
  const SyntheticCorpora data = make_synthetic_corpus(sc);

  // A quarter of each category is held out from pretraining.
  const std::vector<int> labels = corpus_labels(data.pub);
  const FoldAssignment folds = stratified_folds(labels, 4, 11);
  std::vector<ImageTextRecord> train, test;
  for (std::size_t i = 0; i < data.pub.size(); ++i) (folds.fold[i] == 0 ? test : train).push_back(data.pub[i]);
  const Corpus pub_train("public-train", train);

  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.alpha = 100.0;
  cfg.lr = 2e-3;
  cfg.max_steps = 2000;
  cfg.seed = 2;
  cfg.model.encoders.embed_dim = 16;
  cfg.model.heads = 2;
  cfg.model.init_seed = 2;
  Model model(cfg.model);
  const FitResult fit_result = fit(model, data.expert, pub_train, cfg);

  const auto& vocab = data.pub.category_vocabulary();
  const ZeroShotHead head = build_zero_shot_head(vocab, cfg.prompt_template, model.encoders());
  std::vector<Image> images;
  std::vector<int> truth;
  for (const auto& r : test) {
    images.push_back(r.image);
    truth.push_back(static_cast<int>(std::find(vocab.begin(), vocab.end(), r.categories.front()) - vocab.begin()));
  }
  const Classification c = zero_shot_classify(images, head, model.encoders());
  int correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += c.predictions[i] == truth[i];
  const double acc = static_cast<double>(correct) / static_cast<double>(truth.size());
  const double ek_first = fit_result.trace.front().loss.l_ek;
  const double ek_last = fit_result.trace.back().loss.l_ek;
  const double ratio = ek_last / ek_first;
  const double secs = seconds_since(t0);
  const bool ok = acc >= 0.95 && ratio <= 0.5 && fit_result.trace.size() <= 2000 && secs <= 300.0;
  return {ok, fmt("held-out zero-shot accuracy %.3f (need >= 0.95), ", acc) + fmt("L_EK %.4g", ek_first) +
                  fmt(" -> %.4g", ek_last) + fmt(" (ratio %.3f, need <= 0.5), ", ratio) +
                  std::to_string(fit_result.trace.size()) + " steps, " + fmt("%.1f s", secs)};
}

// 100 public records over 4 categories and 10 expert pairs.
SyntheticCorpora corpora_100_10() {
  SyntheticConfig cfg;
  cfg.num_categories = 4;
  cfg.samples_per_category = 25;
  cfg.image_size = 16;
  cfg.seed = 1;
  SyntheticCorpora c = make_synthetic_corpus(cfg);
  std::vector<ImageTextRecord> expert(c.expert.records().begin(), c.expert.records().begin() + 10);
  c.expert = Corpus("expert10", std::move(expert));
  return c;
}

// 6. Ablation switches.
Outcome ablation_contracts() {
  const SyntheticCorpora c = corpora_100_10();
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.lr = 1e-3;
  cfg.seed = 3;
  cfg.model.encoders.image_size = 16;
  cfg.model.encoders.embed_dim = 8;

  auto run = [&](const TrainConfig& config, const StepOptions& options, std::vector<LossBreakdown>* losses) {
    auto model = std::make_unique<Model>(config.model);
    AdamW opt = make_optimizer(*model, config);
    const auto batches = config.ablation.mixed_on ? mixed_batches(c.expert, c.pub, config) : public_batches(c.pub, config);
    for (int s = 0; s < 50; ++s) {
      const LossBreakdown l = train_step(batches[static_cast<std::size_t>(s) % batches.size()], *model, opt, config, config.lr, options);
      if (losses) losses->push_back(l);
    }
    return model;
  };

  // Revision off against a build without the attention branch.
  TrainConfig no_rev = cfg;
  no_rev.ablation.revision_on = false;
  std::vector<LossBreakdown> rev_losses;
  auto a = run(no_rev, {}, &rev_losses);
  auto b = run(no_rev, StepOptions{true}, nullptr);
  double traj = 0.0;
  const auto pa = a->parameters(), pb = b->parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) traj = std::max(traj, (pa[i]->value - pb[i]->value).cwiseAbs().maxCoeff());
  double contribution = 0.0;
  for (const auto& l : rev_losses) contribution = std::max(contribution, std::abs(l.total - l.l_p - l.l_m));

  // Mixing off.
  TrainConfig no_mix = cfg;
  no_mix.ablation.mixed_on = false;
  std::size_t expert_records = 0;
  for (const auto& batch : public_batches(c.pub, no_mix)) {
    for (const auto* r : batch.public_half) expert_records += r->source_kind == SourceKind::ExpertPair;
    expert_records += batch.expert_half.size();
  }
  std::vector<LossBreakdown> mix_losses;
  run(no_mix, {}, &mix_losses);
  double max_lm = 0.0;
  for (const auto& l : mix_losses) max_lm = std::max({max_lm, std::abs(l.l_m), std::abs(l.l_ek)});

  // Fusion: L_p recomputed from t_p + EK built by hand.
  TrainConfig fusion = cfg;
  fusion.ablation.revision_on = false;
  fusion.ablation.fusion_on = true;
  Model m(fusion.model);
  const MixedBatch batch = mixed_batches(c.expert, c.pub, fusion).front();
  const LossBreakdown fl = evaluate_batch(batch, m, fusion);
  std::vector<const Image*> pi, ei;
  std::vector<std::string> prompts, texts, keys;
  for (const auto* r : batch.public_half) {
    pi.push_back(&r->image);
    prompts.push_back(public_prompt(*r, fusion.prompt_template));
    keys.push_back(r->categories.front());
  }
  for (const auto* r : batch.expert_half) {
    ei.push_back(&r->image);
    texts.push_back(r->text_en);
  }
  const Matrix vp = encode_images(m.encoders(), pi).matrix;
  const Matrix tp = encode_texts(m.encoders(), prompts).matrix;
  const ExpertKnowledge ek = extract_expert_knowledge(vp, encode_images(m.encoders(), ei).matrix,
                                                      encode_texts(m.encoders(), texts).matrix, m.attention());
  const Matrix fused = fuse_expert_knowledge(ek, tp);
  const double fuse_dev = (fused - (tp + ek.matrix)).cwiseAbs().maxCoeff();
  const Matrix g = cooccurrence_targets(keys).matrix;
  const Matrix s = m.lambda() * vp * fused.transpose();
  const double expected = soft_cross_entropy(s, g) + soft_cross_entropy(Matrix(s.transpose()), Matrix(g.transpose()));
  const double lp_dev = std::abs(fl.l_p - expected);

  const bool ok = traj <= 1e-6 && contribution <= 1e-12 && expert_records == 0 && max_lm == 0.0 && fuse_dev == 0.0 &&
                  lp_dev <= 1e-9;
  return {ok, fmt("revision-off trajectory gap %.3g (tol 1e-6), ", traj) + fmt("l_ek share %.3g (tol 1e-12); ", contribution) +
                  "no-mixed expert records " + std::to_string(expert_records) + fmt(", max |l_m|,|l_ek| %.3g; ", max_lm) +
                  fmt("fusion |t_p+EK - fused| %.3g, ", fuse_dev) + fmt("L_p gap %.3g", lp_dev)};
}

// 7. Batch composition over one epoch.
Outcome batch_ratio() {
  const SyntheticCorpora c = corpora_100_10();
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.seed = 17;
  const auto a = mixed_batches(c.expert, c.pub, cfg);
  const auto b = mixed_batches(c.expert, c.pub, cfg);
  bool shape_ok = a.size() == 50;
  for (const auto& batch : a) {
    shape_ok = shape_ok && batch.expert_half.size() == 2 && batch.public_half.size() == 2;
    for (const auto* r : batch.expert_half) shape_ok = shape_ok && r->source_kind == SourceKind::ExpertPair;
    for (const auto* r : batch.public_half) shape_ok = shape_ok && r->source_kind == SourceKind::LabeledPublic;
  }
  bool same = a.size() == b.size();
  for (std::size_t i = 0; same && i < a.size(); ++i) {
    same = a[i].expert_half == b[i].expert_half && a[i].public_half == b[i].public_half;
  }
  return {shape_ok && same, std::to_string(a.size()) + " batches, all 2+2: " + (shape_ok ? "yes" : "no") +
                                ", seed-deterministic: " + (same ? "yes" : "no")};
}

// 8. Metrics against brute force.
Outcome metric_oracles() {
  Rng rng(8);
  int exact = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.index(199);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.index(t % 2 ? 12 : 100000)) / 7.0;
      y[i] = rng.uniform() < 0.5;
    }
    y[0] = 1;
    y[1] = 0;
    long twice = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!y[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (y[j]) continue;
        ++pairs;
        twice += s[i] > s[j] ? 2 : (s[i] == s[j] ? 1 : 0);
      }
    }
    exact += auc_rank(s, y) == static_cast<double>(twice) / static_cast<double>(2 * pairs);
  }
  const double worked = auc_rank(std::vector<double>{0.9, 0.8, 0.3, 0.1}, std::vector<int>{1, 0, 1, 0});
  Matrix perfect(6, 3);
  perfect << 0.9, 0.05, 0.05, 0.8, 0.1, 0.1, 0.1, 0.7, 0.2, 0.2, 0.6, 0.2, 0.1, 0.1, 0.8, 0.0, 0.3, 0.7;
  const MetricEntry m = compute_metrics(perfect, std::vector<int>{0, 0, 1, 1, 2, 2});
  const bool ok = exact == 100 && worked == 0.75 && m.aca == 1.0 && m.auc == 1.0 && m.f1 == 1.0;
  return {ok, std::to_string(exact) + "/100 exact AUC matches, worked example " + fmt("%.4g", worked) +
                  fmt(", perfect ACA %.3g", m.aca) + fmt(" AUC %.3g", m.auc) + fmt(" F1 %.3g", m.f1)};
}

// 9. Adapter contracts.
Outcome adapter_contracts() {
  Rng rng(9);
  constexpr int kClasses = 3, kShots = 5, kDim = 16;
  const Matrix centers = random_unit_rows(kClasses, kDim, rng);
  Matrix shots(kClasses * kShots, kDim);
  std::vector<int> labels;
  for (int c = 0; c < kClasses; ++c) {
    for (int k = 0; k < kShots; ++k) {
      const RowVector row = centers.row(c) + random_matrix(1, kDim, rng, 0.3);
      shots.row(c * kShots + k) = row / row.norm();
      labels.push_back(c);
    }
  }
  ZeroShotHead head;
  head.class_names = {"c0", "c1", "c2"};
  head.class_embeddings = random_unit_rows(kClasses, kDim, rng);

  const Matrix queries = random_unit_rows(20, kDim, rng);
  const AdapterCache zero_mix = build_adapter_cache({shots, true}, labels, kClasses, kTipBeta, 0.0);
  const bool mix_exact = tip_adapter_scores(queries, zero_mix, head) == zero_shot_scores({queries, true}, head);

  const AdapterCache cache = build_adapter_cache({shots, true}, labels, kClasses);
  const AdapterCache tuned = tip_adapter_finetune(cache, {shots, true}, labels, head);
  const auto pred = argmax_rows(tip_adapter_scores(shots, tuned, head));
  int correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += pred[i] == labels[i];
  const double train_acc = static_cast<double>(correct) / static_cast<double>(labels.size());

  EncoderBundle bundle(EncoderConfig{}, rng);
  SyntheticConfig sc;
  sc.num_categories = 2;
  sc.samples_per_category = 6;
  const Corpus corpus = make_synthetic_corpus(sc).pub;
  std::vector<Image> images;
  for (const auto& r : corpus.records()) images.push_back(r.image);
  std::vector<Parameter*> params;
  bundle.collect_parameters(params);
  const std::uint64_t before = parameter_checksum(params);
  linear_probe_fit(bundle, images, corpus_labels(corpus), 2);
  const std::uint64_t after = parameter_checksum(params);

  const bool ok = mix_exact && train_acc == 1.0 && before == after;
  return {ok, std::string("mix=0 equals zero-shot: ") + (mix_exact ? "yes" : "no") +
                  fmt(", TipAdapter-f train accuracy %.3f", train_acc) + ", encoder checksum " +
                  (before == after ? "unchanged" : "changed")};
}

// 10. Corpus tools.
Outcome corpus_tools() {
  const auto set = fclip::testing::modality_set();
  std::vector<ColorHistogram> hists;
  for (const auto& img : set.images) hists.push_back(color_histogram(img));
  const auto labels = classify_modality(hists, {color_histogram(set.ffa_reference), color_histogram(set.oct_reference)});
  int correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += labels[i] == set.truth[i];

  Rng rng(10);
  Image img(24, 31);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.index(256));
  const bool gamma_identity = gamma_correct(img, 1.0) == img;

  int fixtures_ok = 0;
  const auto fixtures = fclip::testing::caption_fixtures();
  for (const auto& f : fixtures) {
    try {
      const CaptionBlock b = split_caption(f.raw);
      fixtures_ok += f.parses && b.figure_id == f.figure_id && b.preamble == f.preamble && b.subcaptions == f.subcaptions;
    } catch (const CaptionParseError&) {
      fixtures_ok += !f.parses;
    }
  }
  const bool ok = correct == 30 && set.images.size() == 30 && gamma_identity && fixtures_ok == 20 && fixtures.size() == 20;
  return {ok, "modality " + std::to_string(correct) + "/30, gamma=1 identity: " + (gamma_identity ? "yes" : "no") +
                  ", caption fixtures " + std::to_string(fixtures_ok) + "/" + std::to_string(fixtures.size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 target-matrix oracle", target_matrix_oracle},
      {"2 uniform-logit value", uniform_logit_value},
      {"3 gradient checks", gradient_checks},
      {"4 attention invariances", attention_invariances},
      {"5 toy end-to-end separability", toy_separability},
      {"6 ablation contracts", ablation_contracts},
      {"7 batch ratio", batch_ratio},
      {"8 metric oracles", metric_oracles},
      {"9 adapter contracts", adapter_contracts},
      {"10 corpus tools", corpus_tools},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
