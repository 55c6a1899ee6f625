#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace hmn::corpus {

inline constexpr std::string_view kPad = "<pad>";
inline constexpr std::string_view kUnk = "<unk>";
inline constexpr std::string_view kSos = "<sos>";
inline constexpr std::string_view kEos = "<eos>";
inline constexpr std::string_view kSentinel = "<sentinel>";

enum class Speaker { User, Sys };

std::string_view speaker_tag(Speaker s);
Speaker parse_speaker(std::string_view tag);
/// "t1", "t2", ...
std::string turn_tag(int turn);

struct TaggedToken {
  std::string token;
  int turn = 1;
  Speaker speaker = Speaker::User;

  bool is_sentinel() const { return token == kSentinel; }
  friend bool operator==(const TaggedToken&, const TaggedToken&) = default;
};

struct KBTriple {
  std::string subject;
  std::string relation;
  std::string object;

  friend bool operator==(const KBTriple&, const KBTriple&) = default;
};

struct Turn {
  Speaker speaker = Speaker::User;
  std::string utterance;

  friend bool operator==(const Turn&, const Turn&) = default;
};

/// A whole conversation with the knowledge rows it is grounded on.
struct Dialogue {
  std::string id;
  std::vector<Turn> turns;
  std::vector<KBTriple> kb;
  /// Raw KB rows before column decomposition (equals kb.size() for triple data).
  std::size_t kb_rows = 0;
  std::string scenario;

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

/// One supervised example: predict `response` from `history` and `kb`.
///
/// `history` ends with the sentinel token. The KB sentinel is implicit: its
/// position is kb.size(). Copy labels index these memories, one per response
/// word, with the sentinel position meaning "not in this memory".
struct DialogueSample {
  std::vector<TaggedToken> history;
  std::vector<KBTriple> kb;
  std::vector<std::string> response;
  std::vector<std::size_t> his_copy_labels;
  std::vector<std::size_t> kb_copy_labels;
  std::string dialogue_id;
  std::size_t turn_id = 0;
  std::string scenario;

  std::size_t history_sentinel() const { return history.size() - 1; }
  std::size_t kb_sentinel() const { return kb.size(); }

  friend bool operator==(const DialogueSample&, const DialogueSample&) = default;
};

}  // namespace hmn::corpus
