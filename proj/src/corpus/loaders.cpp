#include "hmn/corpus/loaders.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hmn/corpus/tagging.hpp"
#include "hmn/corpus/vocabulary.hpp"
#include "hmn/errors.hpp"

namespace hmn::corpus {

namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

/// KB cells become single lowercase tokens.
std::string kb_word(std::string_view cell) {
  auto words = tokenize(cell);
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += '_';
    out += words[i];
  }
  return out;
}

}  // namespace

std::vector<Dialogue> parse_babi(std::istream& in, const std::string& source) {
  std::vector<Dialogue> out;
  Dialogue current;
  auto flush = [&]() {
    if (current.turns.empty() && current.kb.empty()) return;
    current.id = "babi-" + std::to_string(out.size());
    current.kb_rows = current.kb.size();
    out.push_back(std::move(current));
    current = Dialogue{};
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      flush();
      continue;
    }
    const std::string where = source + ":" + std::to_string(line_no);
    std::size_t pos = 0;
    while (pos < line.size() && line[pos] == ' ') ++pos;
    const std::size_t digits = pos;
    while (pos < line.size() && std::isdigit(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos == digits || pos >= line.size() || line[pos] != ' ') {
      throw ParseError(where, "expected a line number followed by a space");
    }
    const std::string rest = line.substr(pos + 1);
    const auto tab = rest.find('\t');
    if (tab != std::string::npos) {
      const std::string user = trim(rest.substr(0, tab));
      const std::string sys = trim(rest.substr(tab + 1));
      if (user.empty() || sys.empty()) throw ParseError(where, "exchange with an empty side");
      current.turns.push_back({Speaker::User, user});
      current.turns.push_back({Speaker::Sys, sys});
      continue;
    }
    auto words = tokenize(rest);
    if (words.size() != 3) {
      throw ParseError(where, "expected '<user>\\t<system>' or a three-word KB fact, got '" + rest + "'");
    }
    current.kb.push_back({words[0], words[1], words[2]});
  }
  flush();
  return out;
}

std::vector<Dialogue> read_babi(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_babi(in, path.string());
}

std::vector<DialogueSample> load_babi_dialogs(const std::filesystem::path& path) {
  return make_samples(read_babi(path));
}

std::vector<Dialogue> parse_normalized(std::istream& in, const std::string& source) {
  std::vector<Dialogue> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::size_t index = out.size();
    const std::string where = source + ": dialogue " + std::to_string(index) + " (line " + std::to_string(line_no) + ")";
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) throw ParseError(where, "record is not an object");
    for (const char* field : {"turns", "kb", "scenario"}) {
      if (!record.contains(field)) throw ParseError(where, std::string("missing required field '") + field + "'");
    }
    Dialogue d;
    try {
      d.id = record.value("id", "dlg-" + std::to_string(index));
      d.scenario = record.at("scenario").get<std::string>();
      for (const auto& t : record.at("turns")) {
        if (!t.contains("speaker")) throw ParseError(where, "missing required field 'turns[].speaker'");
        if (!t.contains("utterance")) throw ParseError(where, "missing required field 'turns[].utterance'");
        d.turns.push_back({parse_speaker(t.at("speaker").get<std::string>()), t.at("utterance").get<std::string>()});
      }
      std::vector<std::string> columns;
      if (record.contains("kb_columns")) columns = record.at("kb_columns").get<std::vector<std::string>>();
      for (const auto& row_json : record.at("kb")) {
        auto row = row_json.get<std::vector<std::string>>();
        for (auto& cell : row) cell = kb_word(cell);
        if (row.size() < 3) throw ParseError(where, "KB row needs at least three cells");
        if (row.size() == 3) {
          if (row[0].empty() || row[1].empty() || row[2].empty()) throw ParseError(where, "empty KB triple component");
          d.kb.push_back({row[0], row[1], row[2]});
          continue;
        }
        if (columns.size() != row.size()) {
          throw ParseError(where, "missing required field 'kb_columns' for a " + std::to_string(row.size()) +
                                      "-column KB row");
        }
        if (row[0].empty()) throw ParseError(where, "KB row with an empty subject");
        for (std::size_t c = 1; c < row.size(); ++c) {
          if (!row[c].empty()) d.kb.push_back({row[0], kb_word(columns[c]), row[c]});
        }
      }
      d.kb_rows = record.value("kb_rows", record.at("kb").size());
    } catch (const json::exception& e) {
      throw ParseError(where, std::string("bad field type: ") + e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw ParseError(where, e.what());
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Dialogue> read_normalized(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_normalized(in, path.string());
}

void write_normalized(std::ostream& out, std::span<const Dialogue> dialogues) {
  for (const auto& d : dialogues) {
    json record = json::object();
    record["id"] = d.id;
    record["scenario"] = d.scenario;
    json turns = json::array();
    for (const auto& t : d.turns) {
      turns.push_back({{"speaker", std::string(speaker_tag(t.speaker))}, {"utterance", t.utterance}});
    }
    record["turns"] = std::move(turns);
    json kb = json::array();
    for (const auto& k : d.kb) kb.push_back({k.subject, k.relation, k.object});
    record["kb"] = std::move(kb);
    record["kb_rows"] = d.kb_rows;
    out << record.dump() << '\n';
  }
}

void write_normalized(const std::filesystem::path& path, std::span<const Dialogue> dialogues) {
  auto out = open_output(path);
  write_normalized(out, dialogues);
  if (!out) throw InputError("failed writing " + path.string());
}

std::vector<DialogueSample> load_kvr_dialogs(const std::filesystem::path& path) {
  return make_samples(read_normalized(path));
}

std::vector<Dialogue> read_dialogues(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".json") return read_normalized(path);
  return read_babi(path);
}

std::vector<std::string> read_entity_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto word = kb_word(line);
    if (!word.empty()) out.push_back(std::move(word));
  }
  return out;
}

void write_entity_list(const std::filesystem::path& path, std::span<const std::string> entities) {
  auto out = open_output(path);
  for (const auto& e : entities) out << e << '\n';
  if (!out) throw InputError("failed writing " + path.string());
}

std::vector<KBTriple> read_kb_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<KBTriple> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto words = tokenize(t);
    if (words.size() != 3) {
      throw ParseError(path.string() + ":" + std::to_string(line_no), "expected three words, got '" + t + "'");
    }
    out.push_back({words[0], words[1], words[2]});
  }
  return out;
}

CorpusStats corpus_stats(std::span<const Dialogue> dialogues) {
  CorpusStats s;
  s.dialogues = dialogues.size();
  double history = 0, triples = 0, rows = 0, response = 0, turns = 0;
  for (const auto& d : dialogues) {
    auto samples = make_samples(d);
    turns += static_cast<double>(samples.size());
    for (const auto& sample : samples) {
      history += static_cast<double>(sample.history.size() - 1);
      triples += static_cast<double>(d.kb.size());
      rows += static_cast<double>(d.kb_rows);
      response += static_cast<double>(sample.response.size() - 1);
      ++s.samples;
    }
  }
  if (s.samples > 0) {
    const auto n = static_cast<double>(s.samples);
    s.avg_history_words = history / n;
    s.avg_kb_triples = triples / n;
    s.avg_kb_rows = rows / n;
    s.avg_response_length = response / n;
  }
  if (s.dialogues > 0) s.avg_dialogue_turns = turns / static_cast<double>(s.dialogues);
  s.vocabulary_size = Vocabulary::build(dialogues).size();
  return s;
}

}  // namespace hmn::corpus
