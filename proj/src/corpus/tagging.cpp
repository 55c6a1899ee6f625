#include "hmn/corpus/tagging.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "hmn/errors.hpp"

namespace hmn::corpus {

std::string_view speaker_tag(Speaker s) { return s == Speaker::User ? "user" : "sys"; }

Speaker parse_speaker(std::string_view tag) {
  if (tag == "user") return Speaker::User;
  if (tag == "sys" || tag == "system" || tag == "assistant") return Speaker::Sys;
  throw InputError("unknown speaker tag: " + std::string(tag));
}

std::string turn_tag(int turn) { return "t" + std::to_string(turn); }

std::vector<std::string> tokenize(std::string_view utterance) {
  std::string lowered(utterance);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::istringstream in(lowered);
  std::vector<std::string> out;
  for (std::string word; in >> word;) out.push_back(std::move(word));
  return out;
}

std::vector<TaggedToken> tag_history(std::span<const Turn> turns) {
  if (turns.empty()) throw InputError("tag_history: empty turn list");
  if (std::none_of(turns.begin(), turns.end(), [](const Turn& t) { return t.speaker == Speaker::User; })) {
    throw InputError("tag_history: history has no user turn");
  }
  std::vector<TaggedToken> out;
  int turn = 0;
  for (const auto& t : turns) {
    if (t.speaker == Speaker::User || turn == 0) ++turn;
    for (auto& word : tokenize(t.utterance)) out.push_back({std::move(word), turn, t.speaker});
  }
  out.push_back({std::string(kSentinel), turn, Speaker::Sys});
  return out;
}

CopyLabels make_copy_labels(std::span<const std::string> response, std::span<const TaggedToken> history,
                            std::span<const KBTriple> kb) {
  if (history.empty() || !history.back().is_sentinel()) {
    throw ContractError("make_copy_labels: history must end with the sentinel");
  }
  const std::size_t his_sentinel = history.size() - 1;
  CopyLabels labels;
  labels.history.reserve(response.size());
  labels.kb.reserve(response.size());
  for (const auto& word : response) {
    std::size_t his = his_sentinel;
    for (std::size_t i = his_sentinel; i-- > 0;) {
      if (history[i].token == word) {
        his = i;
        break;
      }
    }
    std::size_t kbl = kb.size();
    for (std::size_t i = kb.size(); i-- > 0;) {
      if (kb[i].object == word) {
        kbl = i;
        break;
      }
    }
    labels.history.push_back(his);
    labels.kb.push_back(kbl);
  }
  return labels;
}

std::vector<DialogueSample> make_samples(const Dialogue& dialogue) {
  std::vector<DialogueSample> out;
  bool seen_user = false;
  std::size_t exchange = 0;
  for (std::size_t i = 0; i < dialogue.turns.size(); ++i) {
    const Turn& t = dialogue.turns[i];
    if (t.speaker == Speaker::User) {
      seen_user = true;
      continue;
    }
    if (!seen_user) continue;
    DialogueSample s;
    s.history = tag_history(std::span(dialogue.turns).first(i));
    s.kb = dialogue.kb;
    s.response = tokenize(t.utterance);
    s.response.emplace_back(kEos);
    auto labels = make_copy_labels(s.response, s.history, s.kb);
    s.his_copy_labels = std::move(labels.history);
    s.kb_copy_labels = std::move(labels.kb);
    s.dialogue_id = dialogue.id;
    s.turn_id = exchange++;
    s.scenario = dialogue.scenario;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<DialogueSample> make_samples(std::span<const Dialogue> dialogues) {
  std::vector<DialogueSample> out;
  for (const auto& d : dialogues) {
    auto samples = make_samples(d);
    std::move(samples.begin(), samples.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace hmn::corpus
