// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include "fclip/data_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "fclip/errors.hpp"
#include "fclip/rng.hpp"

namespace fclip {

using nlohmann::json;

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::CFP: return "CFP";
    case Modality::FFA: return "FFA";
    case Modality::OCT: return "OCT";
  }
  return "CFP";
}

std::string_view to_string(SourceKind k) {
  return k == SourceKind::ExpertPair ? "EXPERT_PAIR" : "LABELED_PUBLIC";
}

Modality parse_modality(std::string_view s) {
  if (s == "CFP") return Modality::CFP;
  if (s == "FFA") return Modality::FFA;
  if (s == "OCT") return Modality::OCT;
  throw InvalidArgument("unknown modality '" + std::string(s) + "'");
}

SourceKind parse_source_kind(std::string_view s) {
  if (s == "EXPERT_PAIR") return SourceKind::ExpertPair;
  if (s == "LABELED_PUBLIC") return SourceKind::LabeledPublic;
  throw InvalidArgument("unknown source_kind '" + std::string(s) + "'");
}

void validate_record(const ImageTextRecord& record) {
  if (record.id.empty()) throw InvalidArgument("empty record id");
  if (record.source_kind == SourceKind::ExpertPair && record.text_en.empty()) {
    throw InvalidArgument("EXPERT_PAIR record has empty text_en");
  }
  if (record.source_kind == SourceKind::LabeledPublic && record.categories.empty()) {
    throw InvalidArgument("LABELED_PUBLIC record has no categories");
  }
  for (const auto& c : record.categories) {
    if (c.empty()) throw InvalidArgument("empty category label");
  }
  if (record.image.empty()) throw InvalidArgument("image must be at least 1x1");
  if (record.image.pixels.size() != static_cast<std::size_t>(record.image.height) * record.image.width * 3) {
    throw InvalidArgument("pixel buffer does not match image dimensions");
  }
}

Corpus::Corpus(std::string name, std::vector<ImageTextRecord> records)
    : name_(std::move(name)), records_(std::move(records)) {
  std::unordered_set<std::string> ids;
  std::set<std::string> vocab;
  for (const auto& r : records_) {
    try {
      validate_record(r);
    } catch (const InvalidArgument& e) {
      throw LoadError(r.id, e.what());
    }
    if (!ids.insert(r.id).second) throw LoadError(r.id, "duplicate record id");
    vocab.insert(r.categories.begin(), r.categories.end());
  }
  vocabulary_.assign(vocab.begin(), vocab.end());
}

std::string fill_prompt(std::string_view category, std::string_view prompt_template) {
  const auto pos = prompt_template.find("{}");
  if (pos == std::string_view::npos) {
    throw MalformedTemplateError("prompt template has no '{}' placeholder: \"" +
                                 std::string(prompt_template) + "\"");
  }
  if (prompt_template.find("{}", pos + 2) != std::string_view::npos) {
    throw MalformedTemplateError("prompt template has more than one '{}' placeholder: \"" +
                                 std::string(prompt_template) + "\"");
  }
  std::string out;
  out.reserve(prompt_template.size() + category.size());
  out.append(prompt_template.substr(0, pos));
  out.append(category);
  out.append(prompt_template.substr(pos + 2));
  return out;
}

namespace {

constexpr std::array<const char*, 8> kCategoryNames = {
    "glaucoma",         "diabetic retinopathy",     "drusen",          "macular hole",
    "retinal detachment", "pathological myopia", "optic disc edema", "retinal vein occlusion"};

struct Rgb {
  std::uint8_t r, g, b;
  const char* name;
};

constexpr std::array<Rgb, 8> kPalette = {{{250, 240, 60, "yellow"},
                                          {40, 200, 240, "cyan"},
                                          {250, 250, 250, "white"},
                                          {30, 220, 60, "green"},
                                          {60, 70, 250, "blue"},
                                          {240, 60, 230, "magenta"},
                                          {10, 10, 10, "black"},
                                          {250, 150, 20, "orange"}}};

constexpr std::array<const char*, 4> kQuadrants = {"superior temporal", "superior nasal",
                                                   "inferior temporal", "inferior nasal"};

Rgb category_color(int c) {
  if (c < static_cast<int>(kPalette.size())) return kPalette[static_cast<std::size_t>(c)];
  // Beyond the palette: a deterministic but distinct colour per index.
  const auto h = static_cast<std::uint32_t>(c) * 2654435761u;
  return {static_cast<std::uint8_t>(h & 0xff), static_cast<std::uint8_t>((h >> 8) & 0xff),
          static_cast<std::uint8_t>((h >> 16) & 0xff), "mottled"};
}

Image synthetic_image(int category, int side, double noise, Rng& rng) {
  Image img(side, side);
  const Rgb color = category_color(category);
  const int quadrant = category % 4;
  const int half = side / 2 > 0 ? side / 2 : 1;
  const int y0 = (quadrant / 2) * half;
  const int x0 = (quadrant % 2) * half;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const bool in_block = y >= y0 && y < y0 + half && x >= x0 && x < x0 + half;
      const std::array<int, 3> base =
          in_block ? std::array<int, 3>{color.r, color.g, color.b} : std::array<int, 3>{150, 50, 30};
      for (int ch = 0; ch < 3; ++ch) {
        int v = base[static_cast<std::size_t>(ch)];
        if (noise > 0.0) {
          v += static_cast<int>(std::lround(rng.uniform(-1.0, 1.0) * noise * 255.0));
        }
        img.at(y, x, ch) = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
    }
  }
  return img;
}

std::string expert_description(int category) {
  const std::string name = synthetic_category_name(category);
  const Rgb color = category_color(category);
  const std::string quadrant = kQuadrants[static_cast<std::size_t>(category % 4)];
  return "Color fundus photograph demonstrating " + name + ". A sharply demarcated " + color.name +
         " area occupies the " + quadrant + " quadrant of the posterior pole. These findings are typical of " +
         name + " and warrant follow up.";
}

}  // namespace

std::string synthetic_category_name(int index) {
  if (index >= 0 && index < static_cast<int>(kCategoryNames.size())) {
    return kCategoryNames[static_cast<std::size_t>(index)];
  }
  return "lesion pattern " + std::to_string(index);
}

SyntheticCorpora make_synthetic_corpus(const SyntheticConfig& config) {
  if (config.num_categories <= 0 || config.samples_per_category <= 0 || config.image_size <= 0) {
    throw InvalidArgument("synthetic config counts and image size must be positive");
  }
  if (config.noise_level < 0.0 || config.noise_level >= 1.0) {
    throw InvalidArgument("noise_level must lie in [0, 1)");
  }
  Rng rng(config.seed);
  std::vector<ImageTextRecord> expert;
  std::vector<ImageTextRecord> pub;
  for (int c = 0; c < config.num_categories; ++c) {
    const std::string name = synthetic_category_name(c);
    for (int i = 0; i < config.samples_per_category; ++i) {
      ImageTextRecord e;
      e.id = "expert-c" + std::to_string(c) + "-" + std::to_string(i);
      e.image = synthetic_image(c, config.image_size, config.noise_level, rng);
      e.text_en = expert_description(c);
      e.text_zh = "眼底彩照显示" + name + "。";
      e.categories = {name};
      e.source_kind = SourceKind::ExpertPair;
      expert.push_back(std::move(e));

      ImageTextRecord p;
      p.id = "public-c" + std::to_string(c) + "-" + std::to_string(i);
      p.image = synthetic_image(c, config.image_size, config.noise_level, rng);
      p.categories = {name};
      p.source_kind = SourceKind::LabeledPublic;
      pub.push_back(std::move(p));
    }
  }
  return {Corpus("synthetic-expert", std::move(expert)), Corpus("synthetic-public", std::move(pub))};
}

namespace {

std::string sanitize(const std::string& id) {
  std::string out = id;
  for (char& ch : out) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                    ch == '-' || ch == '_' || ch == '.';
    if (!ok) ch = '_';
  }
  return out;
}

}  // namespace

std::filesystem::path save_corpus(const Corpus& corpus, const std::filesystem::path& dir,
                                  const std::string& file_name) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "images");
  const fs::path manifest = dir / file_name;
  std::ofstream out(manifest, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write manifest: " + manifest.string());
  const std::string prefix = manifest.stem().string();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& r = corpus[i];
    const std::string rel = "images/" + prefix + "-" + std::to_string(i) + "-" + sanitize(r.id) + ".png";
    write_png(r.image, dir / rel);
    json line = {{"id", r.id},
                 {"image_path", rel},
                 {"text_en", r.text_en},
                 {"text_zh", r.text_zh},
                 {"categories", r.categories},
                 {"modality", std::string(to_string(r.modality))},
                 {"source_kind", std::string(to_string(r.source_kind))}};
    out << line.dump() << '\n';
  }
  return manifest;
}

Corpus load_corpus(const std::filesystem::path& manifest) {
  std::ifstream in(manifest, std::ios::binary);
  if (!in) throw LoadError("", "cannot open manifest " + manifest.string());
  const auto base = manifest.parent_path();
  std::vector<ImageTextRecord> records;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw LoadError("", "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    ImageTextRecord r;
    r.id = j.value("id", "");
    try {
      if (r.id.empty()) throw InvalidArgument("missing id");
      if (!seen.insert(r.id).second) throw InvalidArgument("duplicate record id");
      const std::string image_path = j.at("image_path").get<std::string>();
      r.text_en = j.value("text_en", "");
      r.text_zh = j.value("text_zh", "");
      r.categories = j.value("categories", std::vector<std::string>{});
      r.modality = parse_modality(j.value("modality", "CFP"));
      r.source_kind = parse_source_kind(j.at("source_kind").get<std::string>());
      const auto full = base / image_path;
      if (!std::filesystem::exists(full)) throw InvalidArgument("missing image file " + full.string());
      r.image = read_png(full);
      validate_record(r);
    } catch (const LoadError&) {
      throw;
    } catch (const std::exception& e) {
      throw LoadError(r.id, e.what());
    }
    records.push_back(std::move(r));
  }
  return Corpus(manifest.stem().string(), std::move(records));
}

std::size_t subsample_size(std::size_t corpus_size, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidArgument("subsample fraction must lie in (0, 1]");
  }
  // Guard against products like 0.3 * 10 = 3.0000000000000004.
  const long double exact = static_cast<long double>(fraction) * static_cast<long double>(corpus_size);
  const auto k = static_cast<std::size_t>(std::ceil(exact - exact * 1e-12L));
  return std::min(k, corpus_size);
}

Corpus subsample_corpus(const Corpus& corpus, double fraction, std::uint64_t seed) {
  const std::size_t k = subsample_size(corpus.size(), fraction);
  Rng rng(seed);
  auto perm = rng.permutation(corpus.size());
  perm.resize(k);
  std::sort(perm.begin(), perm.end());
  std::vector<ImageTextRecord> picked;
  picked.reserve(k);
  for (auto i : perm) picked.push_back(corpus[i]);
  return Corpus(corpus.name(), std::move(picked));
}

std::vector<TextItem> expand_public_items(const Corpus& corpus, std::string_view prompt_template) {
  std::vector<TextItem> items;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const auto& c : corpus[i].categories) {
      items.push_back({i, fill_prompt(c, prompt_template), c});
    }
  }
  return items;
}

std::vector<TextItem> expert_items(const Corpus& corpus) {
  std::vector<TextItem> items;
  items.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& r = corpus[i];
    items.push_back({i, r.text_en, r.categories.empty() ? std::string() : r.categories.front()});
  }
  return items;
}

}  // namespace fclip
