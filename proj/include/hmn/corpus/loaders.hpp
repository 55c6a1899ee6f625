#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hmn/corpus/types.hpp"

namespace hmn::corpus {

// dialog-bAbI text layout, one dialogue per blank-line separated block:
//   <n> <user utterance>\t<system response>   an exchange
//   <n> <subject> <relation> <object>         a KB fact (no tab, three words)
// The leading line number is required and otherwise ignored.
std::vector<Dialogue> read_babi(const std::filesystem::path& path);
std::vector<Dialogue> parse_babi(std::istream& in, const std::string& source);
std::vector<DialogueSample> load_babi_dialogs(const std::filesystem::path& path);

// Normalized layout: UTF-8 JSON Lines, one dialogue per line:
//   {"id": "...", "scenario": "...",
//    "turns": [{"speaker": "user"|"sys", "utterance": "..."}, ...],
//    "kb": [["s", "r", "o"], ...],
//    "kb_columns": ["subject_col", "col1", ...],   optional
//    "kb_rows": 3}                                 optional
// Rows longer than three cells need kb_columns and expand to
// (row[0], kb_columns[i], row[i]) for i >= 1. "id" and "kb_rows" are optional.
std::vector<Dialogue> read_normalized(const std::filesystem::path& path);
std::vector<Dialogue> parse_normalized(std::istream& in, const std::string& source);
void write_normalized(const std::filesystem::path& path, std::span<const Dialogue> dialogues);
void write_normalized(std::ostream& out, std::span<const Dialogue> dialogues);
std::vector<DialogueSample> load_kvr_dialogs(const std::filesystem::path& path);

/// Dispatches on extension: .jsonl/.json are normalized, anything else bAbI.
std::vector<Dialogue> read_dialogues(const std::filesystem::path& path);

std::vector<std::string> read_entity_list(const std::filesystem::path& path);
void write_entity_list(const std::filesystem::path& path, std::span<const std::string> entities);

/// Three whitespace-separated words per line; blank lines and '#' comments skipped.
std::vector<KBTriple> read_kb_file(const std::filesystem::path& path);

struct CorpusStats {
  std::size_t dialogues = 0;
  std::size_t samples = 0;
  double avg_history_words = 0;
  double avg_kb_triples = 0;
  double avg_kb_rows = 0;
  double avg_response_length = 0;
  double avg_dialogue_turns = 0;
  std::size_t vocabulary_size = 0;
};

/// Averages over samples except dialogue turns (exchanges per dialogue).
/// History words exclude the sentinel; response length excludes EOS.
CorpusStats corpus_stats(std::span<const Dialogue> dialogues);

}  // namespace hmn::corpus
