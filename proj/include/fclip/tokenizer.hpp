// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fclip {

// Lower-cased word pieces split on ASCII punctuation and whitespace. Bytes
// outside ASCII stay inside words so UTF-8 text survives untouched.
std::vector<std::string> split_words(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes);

// Hashes words into a fixed number of buckets. Bucket 0 is reserved for the
// start token that begins every sequence, so no text encodes to nothing.
class HashingTokenizer {
 public:
  HashingTokenizer(int buckets, int max_tokens);

  // Start token followed by word buckets, truncated to max_tokens.
  std::vector<int> encode(std::string_view text) const;

  int buckets() const { return buckets_; }
  int max_tokens() const { return max_tokens_; }

 private:
  int buckets_;
  int max_tokens_;
};

}  // namespace fclip
