#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hmn/corpus/types.hpp"

namespace hmn::corpus {

/// Lowercase, then split on whitespace.
std::vector<std::string> tokenize(std::string_view utterance);

/// Tags every word with its turn (a user utterance opens a new turn) and
/// speaker, then appends the sentinel. Throws InputError on an empty turn list
/// or when no user turn is present.
std::vector<TaggedToken> tag_history(std::span<const Turn> turns);

struct CopyLabels {
  std::vector<std::size_t> history;
  std::vector<std::size_t> kb;
};

/// Per response word: the last history position holding the word (else the
/// history sentinel) and the last triple whose object is the word (else
/// kb.size()).
CopyLabels make_copy_labels(std::span<const std::string> response, std::span<const TaggedToken> history,
                            std::span<const KBTriple> kb);

/// One sample per system turn that has at least one user turn before it.
std::vector<DialogueSample> make_samples(const Dialogue& dialogue);
std::vector<DialogueSample> make_samples(std::span<const Dialogue> dialogues);

}  // namespace hmn::corpus
