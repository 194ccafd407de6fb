// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fclip/image.hpp"

namespace fclip {

enum class Modality { CFP, FFA, OCT };
enum class SourceKind { ExpertPair, LabeledPublic };

std::string_view to_string(Modality m);
std::string_view to_string(SourceKind k);
Modality parse_modality(std::string_view s);
SourceKind parse_source_kind(std::string_view s);

inline constexpr std::string_view kDefaultPromptTemplate = "a fundus photograph of {}";

struct ImageTextRecord {
  std::string id;
  Image image;
  std::string text_en;
  std::string text_zh;
  std::vector<std::string> categories;
  Modality modality = Modality::CFP;
  SourceKind source_kind = SourceKind::ExpertPair;

  friend bool operator==(const ImageTextRecord&, const ImageTextRecord&) = default;
};

// Throws InvalidArgument describing the first violated record invariant.
void validate_record(const ImageTextRecord& record);

// Immutable, validated list of records with its derived category vocabulary.
class Corpus {
 public:
  Corpus() = default;
  // Validates every record and id uniqueness; throws LoadError naming the
  // offending record.
  Corpus(std::string name, std::vector<ImageTextRecord> records);

  const std::string& name() const { return name_; }
  const std::vector<ImageTextRecord>& records() const { return records_; }
  const std::vector<std::string>& category_vocabulary() const { return vocabulary_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const ImageTextRecord& operator[](std::size_t i) const { return records_[i]; }

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::string name_;
  std::vector<ImageTextRecord> records_;
  std::vector<std::string> vocabulary_;
};

struct SyntheticConfig {
  int num_categories = 2;
  int samples_per_category = 8;
  int image_size = 32;
  std::uint64_t seed = 0;
  double noise_level = 0.05;
};

struct SyntheticCorpora {
  Corpus expert;
  Corpus pub;
};

// Replaces the single "{}" in `prompt_template` with `category`.
std::string fill_prompt(std::string_view category, std::string_view prompt_template);

// Display name used for synthetic category `index`.
std::string synthetic_category_name(int index);

SyntheticCorpora make_synthetic_corpus(const SyntheticConfig& config);

// JSON-lines manifest; image_path entries are relative to the manifest file.
Corpus load_corpus(const std::filesystem::path& manifest);

// Writes `<dir>/<file_name>` plus PNGs under `<dir>/images/`.
std::filesystem::path save_corpus(const Corpus& corpus, const std::filesystem::path& dir,
                                  const std::string& file_name = "manifest.jsonl");

// ceil(fraction * size) records drawn uniformly without replacement; the
// selection keeps the original relative order.
Corpus subsample_corpus(const Corpus& corpus, double fraction, std::uint64_t seed);

// Size of a subsample without materializing it.
std::size_t subsample_size(std::size_t corpus_size, double fraction);

// One (record, category) text item. Multi-label public records expand into one
// item per category; expert records yield one item carrying their description.
struct TextItem {
  std::size_t record_index = 0;
  std::string text;
  std::string category;
};

std::vector<TextItem> expand_public_items(const Corpus& corpus, std::string_view prompt_template);
std::vector<TextItem> expert_items(const Corpus& corpus);

}  // namespace fclip
