// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "fclip/data_model.hpp"
#include "fclip/errors.hpp"
#include "test_support.hpp"

using namespace fclip;
using fclip::testing::TempDir;

TEST_CASE("fill_prompt substitutes the single placeholder verbatim") {
  CHECK(fill_prompt("glaucoma", "a fundus photograph of {}") == "a fundus photograph of glaucoma");
  CHECK(fill_prompt("drusen", "{}") == "drusen");
  CHECK(fill_prompt("a{b}", "<{}>") == "<a{b}>");
  CHECK_THROWS_AS(fill_prompt("x", "no placeholder"), MalformedTemplateError);
  CHECK_THROWS_AS(fill_prompt("x", "{} and {}"), MalformedTemplateError);
}

TEST_CASE("fill_prompt is injective over distinct categories") {
  std::set<std::string> outputs;
  std::vector<std::string> cats = {"", "a", "aa", "glaucoma", "Glaucoma", "diabetic retinopathy", "{}", "x y"};
  for (const auto& c : cats) outputs.insert(fill_prompt(c, "pre {} post"));
  CHECK(outputs.size() == cats.size());
}

TEST_CASE("synthetic corpus sizes and determinism") {
  SyntheticConfig cfg;
  cfg.num_categories = 2;
  cfg.samples_per_category = 8;
  cfg.seed = 7;
  const auto a = make_synthetic_corpus(cfg);
  const auto b = make_synthetic_corpus(cfg);
  CHECK(a.expert.size() == 16);
  CHECK(a.pub.size() == 16);
  CHECK(a.expert == b.expert);
  CHECK(a.pub == b.pub);
  for (const auto& r : a.expert.records()) {
    CHECK(r.source_kind == SourceKind::ExpertPair);
    CHECK_FALSE(r.text_en.empty());
  }
  for (const auto& r : a.pub.records()) {
    CHECK(r.source_kind == SourceKind::LabeledPublic);
    CHECK(r.text_en.empty());
    CHECK(r.categories.size() == 1);
  }
  CHECK(a.pub.category_vocabulary().size() == 2);

  cfg.seed = 8;
  CHECK_FALSE(make_synthetic_corpus(cfg).pub == a.pub);
}

TEST_CASE("synthetic expert descriptions differ per category and span sentences") {
  SyntheticConfig cfg;
  cfg.num_categories = 5;
  cfg.samples_per_category = 1;
  const auto c = make_synthetic_corpus(cfg);
  std::set<std::string> texts;
  for (const auto& r : c.expert.records()) {
    texts.insert(r.text_en);
    CHECK(std::count(r.text_en.begin(), r.text_en.end(), '.') >= 2);
  }
  CHECK(texts.size() == 5);
}

TEST_CASE("noise-free synthetic images are identical within a category") {
  SyntheticConfig cfg;
  cfg.num_categories = 3;
  cfg.samples_per_category = 4;
  cfg.noise_level = 0.0;
  const auto c = make_synthetic_corpus(cfg);
  for (std::size_t i = 0; i < c.pub.size(); ++i) {
    for (std::size_t j = 0; j < c.pub.size(); ++j) {
      const bool same_cat = c.pub[i].categories == c.pub[j].categories;
      CHECK((c.pub[i].image == c.pub[j].image) == same_cat);
    }
  }
}

TEST_CASE("synthetic corpora are separable by nearest raw-pixel centroid") {
  for (double noise : {0.05, 0.1}) {
    SyntheticConfig cfg;
    cfg.num_categories = 6;
    cfg.samples_per_category = 10;
    cfg.noise_level = noise;
    cfg.seed = 3;
    const auto c = make_synthetic_corpus(cfg);
    const auto& vocab = c.pub.category_vocabulary();
    const std::size_t dim = c.pub[0].image.pixels.size();
    std::vector<std::vector<double>> centroid(vocab.size(), std::vector<double>(dim, 0.0));
    std::vector<int> count(vocab.size(), 0);
    auto label_of = [&](const ImageTextRecord& r) {
      return static_cast<std::size_t>(std::find(vocab.begin(), vocab.end(), r.categories[0]) - vocab.begin());
    };
    for (const auto& r : c.pub.records()) {
      const auto k = label_of(r);
      ++count[k];
      for (std::size_t p = 0; p < dim; ++p) centroid[k][p] += r.image.pixels[p];
    }
    for (std::size_t k = 0; k < vocab.size(); ++k) {
      for (double& v : centroid[k]) v /= count[k];
    }
    int correct = 0;
    for (const auto& r : c.pub.records()) {
      std::size_t best = 0;
      double best_d = 1e300;
      for (std::size_t k = 0; k < vocab.size(); ++k) {
        double d = 0.0;
        for (std::size_t p = 0; p < dim; ++p) d += (r.image.pixels[p] - centroid[k][p]) * (r.image.pixels[p] - centroid[k][p]);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      correct += best == label_of(r);
    }
    CHECK(correct == static_cast<int>(c.pub.size()));
  }
}

TEST_CASE("save then load is the identity on corpus contents") {
  TempDir dir("dm-roundtrip");
  SyntheticConfig cfg;
  cfg.num_categories = 3;
  cfg.samples_per_category = 3;
  const auto c = make_synthetic_corpus(cfg);
  const auto path = save_corpus(c.expert, dir.path() / "expert");
  const Corpus loaded = load_corpus(path);
  CHECK(loaded.records() == c.expert.records());
  CHECK(loaded.category_vocabulary() == c.expert.category_vocabulary());
}

namespace {

void write_manifest(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines) {
  std::ofstream out(path);
  for (const auto& l : lines) out << l.dump() << '\n';
}

nlohmann::json line(const std::string& id, const std::string& image, const std::string& text, const std::string& kind,
                    std::vector<std::string> cats = {}) {
  return {{"id", id},     {"image_path", image},   {"text_en", text},      {"text_zh", ""},
          {"categories", cats}, {"modality", "CFP"}, {"source_kind", kind}};
}

}  // namespace

TEST_CASE("load_corpus keeps file order and names offending records") {
  TempDir dir("dm-load");
  Image img(2, 2);
  write_png(img, dir.path() / "a.png");
  const auto manifest = dir.path() / "m.jsonl";

  write_manifest(manifest, {line("r3", "a.png", "t", "EXPERT_PAIR"), line("r1", "a.png", "t", "EXPERT_PAIR"),
                            line("r2", "a.png", "", "LABELED_PUBLIC", {"x"})});
  const Corpus ok = load_corpus(manifest);
  REQUIRE(ok.size() == 3);
  CHECK(ok[0].id == "r3");
  CHECK(ok[1].id == "r1");
  CHECK(ok[2].id == "r2");
  CHECK(ok[2].source_kind == SourceKind::LabeledPublic);

  write_manifest(manifest, {line("r1", "a.png", "t", "EXPERT_PAIR"), line("r1", "a.png", "t", "EXPERT_PAIR")});
  try {
    load_corpus(manifest);
    FAIL("duplicate id accepted");
  } catch (const LoadError& e) {
    CHECK(e.record_id() == "r1");
    CHECK(std::string(e.what()).find("r1") != std::string::npos);
  }

  write_manifest(manifest, {line("e1", "a.png", "", "EXPERT_PAIR")});
  CHECK_THROWS_AS(load_corpus(manifest), LoadError);

  write_manifest(manifest, {line("p1", "a.png", "", "LABELED_PUBLIC")});
  CHECK_THROWS_AS(load_corpus(manifest), LoadError);

  write_manifest(manifest, {line("m1", "missing.png", "t", "EXPERT_PAIR")});
  try {
    load_corpus(manifest);
    FAIL("missing image accepted");
  } catch (const LoadError& e) {
    CHECK(e.record_id() == "m1");
  }
}

TEST_CASE("corpus invariants") {
  Image img(1, 1);
  ImageTextRecord a{"a", img, "t", "", {"z", "b"}, Modality::CFP, SourceKind::ExpertPair};
  ImageTextRecord b{"b", img, "", "", {"b"}, Modality::OCT, SourceKind::LabeledPublic};
  const Corpus c("c", {a, b});
  CHECK(c.category_vocabulary() == std::vector<std::string>{"b", "z"});
  CHECK_THROWS_AS(Corpus("c", {a, a}), LoadError);
  ImageTextRecord bad = a;
  bad.image.pixels.pop_back();
  CHECK_THROWS_AS(Corpus("c", {bad}), LoadError);
}

TEST_CASE("subsample sizes and determinism") {
  SyntheticConfig cfg;
  cfg.num_categories = 2;
  cfg.samples_per_category = 5;
  const Corpus c = make_synthetic_corpus(cfg).pub;
  CHECK(subsample_corpus(c, 1.0, 0).records() == c.records());
  const Corpus h1 = subsample_corpus(c, 0.5, 1);
  const Corpus h2 = subsample_corpus(c, 0.5, 1);
  CHECK(h1.size() == 5);
  CHECK(h1.records() == h2.records());
  CHECK(subsample_corpus(c, 0.31, 4).size() == 4);
  CHECK_THROWS_AS(subsample_corpus(c, 0.0, 0), InvalidArgument);
  CHECK_THROWS_AS(subsample_corpus(c, 1.5, 0), InvalidArgument);

  CHECK(subsample_size(284660, 0.5) == 142330);
  // The published half-size run: 278,348 training images halved plus the
  // 2,169 expert CFP pairs gives 141,343.
  CHECK(subsample_size(278348, 0.5) + 2169 == 141343);
  CHECK(subsample_size(3, 0.5) == 2);
  CHECK(subsample_size(10, 0.3) == 3);
}

TEST_CASE("public records expand to one text item per category") {
  Image img(1, 1);
  ImageTextRecord r{"r", img, "", "", {"a", "b"}, Modality::CFP, SourceKind::LabeledPublic};
  const Corpus c("c", {r});
  const auto items = expand_public_items(c, "photo of {}");
  REQUIRE(items.size() == 2);
  CHECK(items[0].text == "photo of a");
  CHECK(items[1].category == "b");
}
