#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hmn/corpus/types.hpp"

namespace hmn::corpus {

/// Bidirectional word <-> index map with reserved special tokens at 0..4.
class Vocabulary {
 public:
  static constexpr std::size_t kPadIndex = 0;
  static constexpr std::size_t kUnkIndex = 1;
  static constexpr std::size_t kSosIndex = 2;
  static constexpr std::size_t kEosIndex = 3;
  static constexpr std::size_t kSentinelIndex = 4;

  Vocabulary();
  /// Rebuilds from a stored word list; the first five entries must be the
  /// reserved tokens in order.
  explicit Vocabulary(std::vector<std::string> words);

  /// Every word of the training dialogues: history and response tokens, KB
  /// components, turn tags t1..tN and the speaker tags.
  static Vocabulary build(std::span<const Dialogue> train);

  std::size_t add(std::string_view word);
  /// Index of the word, or the UNK index if unknown.
  std::size_t index(std::string_view word) const;
  bool contains(std::string_view word) const;
  const std::string& word(std::size_t index) const;
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  /// FNV-1a over the ordered word list.
  std::uint64_t hash() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace hmn::corpus
