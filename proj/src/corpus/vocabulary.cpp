#include "hmn/corpus/vocabulary.hpp"

#include <algorithm>

#include "hmn/corpus/tagging.hpp"
#include "hmn/errors.hpp"

namespace hmn::corpus {

Vocabulary::Vocabulary() {
  for (auto w : {kPad, kUnk, kSos, kEos, kSentinel}) add(w);
}

Vocabulary::Vocabulary(std::vector<std::string> words) {
  const std::string_view reserved[] = {kPad, kUnk, kSos, kEos, kSentinel};
  if (words.size() < std::size(reserved)) throw InputError("vocabulary: missing reserved tokens");
  for (std::size_t i = 0; i < std::size(reserved); ++i) {
    if (words[i] != reserved[i]) throw InputError("vocabulary: reserved token mismatch at index " + std::to_string(i));
  }
  for (const auto& w : words) {
    if (index_.contains(w)) throw InputError("vocabulary: duplicate word '" + w + "'");
    add(w);
  }
}

Vocabulary Vocabulary::build(std::span<const Dialogue> train) {
  Vocabulary v;
  v.add(speaker_tag(Speaker::User));
  v.add(speaker_tag(Speaker::Sys));
  int max_turn = 1;
  for (const auto& d : train) {
    for (const auto& sample : make_samples(d)) {
      for (const auto& t : sample.history) max_turn = std::max(max_turn, t.turn);
    }
  }
  for (int t = 1; t <= max_turn; ++t) v.add(turn_tag(t));
  for (const auto& d : train) {
    for (const auto& turn : d.turns) {
      for (const auto& w : tokenize(turn.utterance)) v.add(w);
    }
    for (const auto& triple : d.kb) {
      v.add(triple.subject);
      v.add(triple.relation);
      v.add(triple.object);
    }
  }
  return v;
}

std::size_t Vocabulary::add(std::string_view word) {
  auto it = index_.find(std::string(word));
  if (it != index_.end()) return it->second;
  const std::size_t id = words_.size();
  words_.emplace_back(word);
  index_.emplace(words_.back(), id);
  return id;
}

std::size_t Vocabulary::index(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnkIndex : it->second;
}

bool Vocabulary::contains(std::string_view word) const { return index_.contains(std::string(word)); }

const std::string& Vocabulary::word(std::size_t index) const {
  if (index >= words_.size()) throw ContractError("vocabulary index out of range: " + std::to_string(index));
  return words_[index];
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& w : words_) {
    for (unsigned char c : w) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace hmn::corpus
