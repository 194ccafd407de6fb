// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include "fclip/tokenizer.hpp"

#include "fclip/errors.hpp"

namespace fclip {

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (const char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    const bool word_char = u >= 0x80 || (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z');
    if (word_char) {
      current.push_back(u >= 'A' && u <= 'Z' ? static_cast<char>(u - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (const char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  return h;
}

HashingTokenizer::HashingTokenizer(int buckets, int max_tokens) : buckets_(buckets), max_tokens_(max_tokens) {
  if (buckets < 2) throw InvalidArgument("tokenizer needs at least 2 buckets");
  if (max_tokens < 1) throw InvalidArgument("max_tokens must be positive");
}

std::vector<int> HashingTokenizer::encode(std::string_view text) const {
  std::vector<int> ids{0};
  for (const auto& w : split_words(text)) {
    if (static_cast<int>(ids.size()) >= max_tokens_) break;
    ids.push_back(1 + static_cast<int>(fnv1a64(w) % static_cast<std::uint64_t>(buckets_ - 1)));
  }
  return ids;
}

}  // namespace fclip
