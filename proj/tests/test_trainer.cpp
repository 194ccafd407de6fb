// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "fclip/config.hpp"
#include "fclip/errors.hpp"
#include "fclip/model.hpp"
#include "fclip/trainer.hpp"
#include "test_support.hpp"

using namespace fclip;
using fclip::testing::TempDir;

namespace {

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

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.lr = 1e-3;
  cfg.seed = 3;
  cfg.model.encoders.image_size = 16;
  cfg.model.encoders.embed_dim = 8;
  cfg.model.heads = 2;
  return cfg;
}

std::vector<Matrix> snapshot(Model& m, bool skip_attention) {
  std::vector<Matrix> out;
  for (Parameter* p : m.parameters()) {
    if (skip_attention && p->name.rfind("attention", 0) == 0) continue;
    out.push_back(p->value);
  }
  return out;
}

double max_diff(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  REQUIRE(a.size() == b.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return d;
}

// Runs `steps` train_steps at a constant rate over the epoch-0 batches.
std::vector<LossBreakdown> run(Model& model, const SyntheticCorpora& c, const TrainConfig& cfg, int steps,
                               const StepOptions& options = {}) {
  AdamW opt = make_optimizer(model, cfg);
  const auto batches = cfg.ablation.mixed_on ? mixed_batches(c.expert, c.pub, cfg) : public_batches(c.pub, cfg);
  std::vector<LossBreakdown> out;
  for (int s = 0; s < steps; ++s) out.push_back(train_step(batches[static_cast<std::size_t>(s) % batches.size()], model, opt, cfg, cfg.lr, options));
  return out;
}

}  // namespace

TEST_CASE("mixed batches: 100 public, 10 expert, batch 4") {
  const auto c = corpora_100_10();
  const TrainConfig cfg = small_config();
  const auto batches = mixed_batches(c.expert, c.pub, cfg);
  CHECK(batches.size() == 50);
  CHECK(batches_per_epoch(10, 100, cfg) == 50);
  std::map<std::string, int> public_uses;
  std::map<std::string, int> expert_uses;
  for (const auto& b : batches) {
    REQUIRE(b.expert_half.size() == 2);
    REQUIRE(b.public_half.size() == 2);
    for (const auto* r : b.expert_half) {
      CHECK(r->source_kind == SourceKind::ExpertPair);
      ++expert_uses[r->id];
    }
    for (const auto* r : b.public_half) {
      CHECK(r->source_kind == SourceKind::LabeledPublic);
      ++public_uses[r->id];
    }
  }
  // The larger corpus is walked exactly once.
  CHECK(public_uses.size() == 100);
  for (const auto& [id, n] : public_uses) CHECK(n == 1);
  int expert_total = 0;
  for (const auto& [id, n] : expert_uses) expert_total += n;
  CHECK(expert_total == 100);

  const auto again = mixed_batches(c.expert, c.pub, cfg);
  for (std::size_t i = 0; i < batches.size(); ++i) {
    CHECK(again[i].expert_half == batches[i].expert_half);
    CHECK(again[i].public_half == batches[i].public_half);
  }
  const auto next_epoch = mixed_batches(c.expert, c.pub, cfg, 1);
  bool differs = false;
  for (std::size_t i = 0; i < batches.size(); ++i) differs |= next_epoch[i].public_half != batches[i].public_half;
  CHECK(differs);
}

TEST_CASE("mixed batches: uneven sizes pad the final batch, errors") {
  const auto c = corpora_100_10();
  TrainConfig cfg = small_config();
  cfg.batch_size = 6;
  const auto batches = mixed_batches(c.expert, c.pub, cfg);
  CHECK(batches.size() == 34);
  for (const auto& b : batches) {
    CHECK(b.expert_half.size() == 3);
    CHECK(b.public_half.size() == 3);
  }
  cfg.batch_size = 5;
  CHECK_THROWS_AS(mixed_batches(c.expert, c.pub, cfg), InvalidArgument);
  cfg.batch_size = 4;
  CHECK_THROWS_AS(mixed_batches(Corpus("e", {}), c.pub, cfg), InvalidArgument);
}

TEST_CASE("public-only batches carry no expert records") {
  const auto c = corpora_100_10();
  const auto batches = public_batches(c.pub, small_config());
  CHECK(batches.size() == 25);
  for (const auto& b : batches) {
    CHECK(b.expert_half.empty());
    CHECK(b.public_half.size() == 4);
  }
}

TEST_CASE("lr schedule") {
  CHECK(lr_at(0, 100, 10, 1e-3) == 0.0);
  CHECK(lr_at(10, 100, 10, 1e-3) == doctest::Approx(1e-3));
  CHECK(lr_at(99, 100, 10, 1e-3) < 1e-5);
  CHECK(lr_at(5, 100, 10, 1e-3) == doctest::Approx(5e-4));
  // Continuity at the boundary and monotone decay after it.
  CHECK(std::abs(lr_at(9, 100, 10, 1e-3) - lr_at(10, 100, 10, 1e-3)) <= 1e-4 + 1e-12);
  for (long s = 10; s + 1 < 100; ++s) CHECK(lr_at(s + 1, 100, 10, 1e-3) <= lr_at(s, 100, 10, 1e-3));
  for (long s = 0; s < 100; ++s) {
    const double v = lr_at(s, 100, 10, 1e-3);
    CHECK(v >= 0.0);
    CHECK(v <= 1e-3 + 1e-15);
  }
  CHECK_THROWS_AS(lr_at(100, 100, 10, 1e-3), InvalidArgument);
  CHECK_THROWS_AS(lr_at(-1, 100, 10, 1e-3), InvalidArgument);
}

TEST_CASE("alpha zero matches a run without the attention branch") {
  const auto c = corpora_100_10();
  TrainConfig cfg = small_config();
  cfg.alpha = 0.0;
  Model a(cfg.model), b(cfg.model);
  const auto la = run(a, c, cfg, 20);
  run(b, c, cfg, 20, StepOptions{true});
  CHECK(max_diff(snapshot(a, true), snapshot(b, true)) < 1e-12);
  for (const auto& l : la) {
    CHECK(l.l_ek > 0.0);
    CHECK(l.total == doctest::Approx(l.l_p + l.l_m));
  }
}

TEST_CASE("revision off: EK-free trajectory and zero contribution") {
  const auto c = corpora_100_10();
  TrainConfig cfg = small_config();
  cfg.ablation.revision_on = false;
  Model a(cfg.model), b(cfg.model);
  const auto la = run(a, c, cfg, 50);
  run(b, c, cfg, 50, StepOptions{true});
  CHECK(max_diff(snapshot(a, false), snapshot(b, false)) < 1e-6);
  for (const auto& l : la) CHECK(l.total == doctest::Approx(l.l_p + l.l_m).epsilon(1e-14));
}

TEST_CASE("mixing off: public-only batches, l_m and l_ek are zero") {
  const auto c = corpora_100_10();
  TrainConfig cfg = small_config();
  cfg.ablation.mixed_on = false;
  Model m(cfg.model);
  for (const auto& l : run(m, c, cfg, 10)) {
    CHECK(l.l_m == 0.0);
    CHECK(l.l_ek == 0.0);
    CHECK(l.total == l.l_p);
  }
}

TEST_CASE("fusion adds exactly EK to t_p before L_p") {
  const auto c = corpora_100_10();
  TrainConfig cfg = small_config();
  cfg.ablation.revision_on = false;
  cfg.ablation.fusion_on = true;
  Model m(cfg.model);
  const auto batch = mixed_batches(c.expert, c.pub, cfg).front();
  const LossBreakdown l = evaluate_batch(batch, m, cfg);

  // Rebuild the fused public loss by hand from the plain building blocks.
  std::vector<const Image*> pi, ei;
  std::vector<std::string> prompts, texts, cats;
  for (const auto* r : batch.public_half) {
    pi.push_back(&r->image);
    prompts.push_back(public_prompt(*r, cfg.prompt_template));
    cats.push_back(r->categories.front());
  }
  for (const auto* r : batch.expert_half) {
    ei.push_back(&r->image);
    texts.push_back(r->text_en);
  }
  const Matrix vp = encode_images(m.encoders(), pi).matrix;
  const Matrix tp = encode_texts(m.encoders(), prompts).matrix;
  const Matrix vm = encode_images(m.encoders(), ei).matrix;
  const Matrix tm = encode_texts(m.encoders(), texts).matrix;
  const ExpertKnowledge ek = extract_expert_knowledge(vp, vm, tm, m.attention());
  const Matrix fused = fuse_expert_knowledge(ek, tp);
  CHECK(fused == Matrix(tp + ek.matrix));
  const Matrix g = cooccurrence_targets(cats).matrix;
  const Matrix s = m.lambda() * vp * fused.transpose();
  const double expected = soft_cross_entropy(s, g) + soft_cross_entropy(Matrix(s.transpose()), Matrix(g.transpose()));
  CHECK(l.l_p == doctest::Approx(expected).epsilon(1e-12));
  CHECK(l.total == doctest::Approx(l.l_p + l.l_m).epsilon(1e-14));
}

TEST_CASE("a step is bit-identical across runs") {
  const auto c = corpora_100_10();
  const TrainConfig cfg = small_config();
  Model a(cfg.model), b(cfg.model);
  const auto la = run(a, c, cfg, 3);
  const auto lb = run(b, c, cfg, 3);
  for (std::size_t i = 0; i < la.size(); ++i) {
    CHECK(la[i].total == lb[i].total);
    CHECK(la[i].l_ek == lb[i].l_ek);
  }
  CHECK(parameter_checksum(a.parameters()) == parameter_checksum(b.parameters()));
}

TEST_CASE("toy run: total loss decreases over 200 steps") {
  SyntheticConfig sc;
  sc.num_categories = 2;
  sc.samples_per_category = 16;
  sc.image_size = 16;
  const auto c = make_synthetic_corpus(sc);
  TrainConfig cfg = small_config();
  cfg.batch_size = 8;
  cfg.max_steps = 200;
  cfg.lr = 2e-3;
  cfg.model.encoders.embed_dim = 16;
  Model m(cfg.model);
  const FitResult r = fit(m, c.expert, c.pub, cfg);
  REQUIRE(r.trace.size() == 200);
  CHECK(r.trace.back().loss.total < r.trace.front().loss.total);
}

TEST_CASE("fit logs one record per step and writes a reloadable checkpoint") {
  const auto c = corpora_100_10();
  TrainConfig cfg = small_config();
  TempDir dir("trainer-fit");
  Model m(cfg.model);
  FitOutputs out;
  out.checkpoint = dir.path() / "ck.fclip";
  out.loss_log = dir.path() / "loss.jsonl";
  const FitResult r = fit(m, c.expert, c.pub, cfg, out);
  CHECK(r.trace.size() == 50);
  std::ifstream log(out.loss_log);
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("step") == lines);
    for (const char* k : {"l_p", "l_m", "l_ek", "total", "lambda"}) CHECK(j.contains(k));
    ++lines;
  }
  CHECK(lines == 50);

  Checkpoint ck = load_checkpoint(out.checkpoint);
  CHECK(ck.step == 50);
  CHECK(ck.config_hash == config_hash(cfg));
  std::vector<Image> probe;
  for (std::size_t i = 0; i < 5; ++i) probe.push_back(c.pub[i].image);
  const std::vector<std::string> texts = {"a", "optic disc", "drusen and haemorrhage"};
  CHECK((encode_images(m.encoders(), probe).matrix - encode_images(ck.model->encoders(), probe).matrix).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((encode_texts(m.encoders(), texts).matrix - encode_texts(ck.model->encoders(), texts).matrix).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(ck.model->lambda() == m.lambda());
  CHECK(parameter_checksum(ck.model->parameters()) == parameter_checksum(m.parameters()));
}

TEST_CASE("checkpoint errors") {
  TempDir dir("trainer-ck");
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "missing.fclip"), CheckpointError);
  std::ofstream(dir.path() / "junk.fclip") << "not a checkpoint";
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "junk.fclip"), CheckpointError);
}

TEST_CASE("multi-label public records expand to one record per category") {
  Image img(2, 2);
  ImageTextRecord r{"p", img, "", "", {"a", "b"}, Modality::CFP, SourceKind::LabeledPublic};
  ImageTextRecord s{"q", img, "", "", {"c"}, Modality::CFP, SourceKind::LabeledPublic};
  const Corpus e = expand_multilabel(Corpus("pub", {r, s}));
  REQUIRE(e.size() == 3);
  CHECK(e[0].categories == std::vector<std::string>{"a"});
  CHECK(e[1].categories == std::vector<std::string>{"b"});
  CHECK(e[0].id != e[1].id);
  CHECK(e[2].id == "q");
}

TEST_CASE("config validation and strict parsing") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.batch_size = 7;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.ablation.fusion_on = true;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.ablation.revision_on = false;
  CHECK_NOTHROW(cfg.validate());
  cfg = TrainConfig{};
  cfg.prompt_template = "no placeholder";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  const TrainConfig defaults;
  CHECK(defaults.batch_size == 24);
  CHECK(defaults.lr == 1e-4);
  CHECK(defaults.weight_decay == 1e-5);
  CHECK(defaults.alpha == 100.0);

  try {
    train_config_from_json(nlohmann::json{{"learningrate", 0.1}});
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("lr") != std::string::npos);
  }
  const TrainConfig round = train_config_from_json(to_json(small_config()));
  CHECK(config_hash(round) == config_hash(small_config()));
  CHECK(config_hash(round) != config_hash(TrainConfig{}));
}
