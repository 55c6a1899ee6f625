#include "hmn/cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "hmn/corpus/loaders.hpp"
#include "hmn/corpus/synthetic.hpp"
#include "hmn/corpus/tagging.hpp"
#include "hmn/errors.hpp"
#include "hmn/log.hpp"
#include "hmn/model/checkpoint.hpp"
#include "hmn/model/model.hpp"
#include "hmn/trainer/trainer.hpp"

namespace hmn::cli {

namespace fs = std::filesystem;

namespace {

/// Usage problems discovered after parsing (bad values, missing inputs).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GenDataArgs {
  std::string task = "lookup";
  std::size_t entities = 20;
  std::size_t dialogs = 600;
  double oov_frac = 0.5;
  std::uint64_t seed = 7;
  std::string out;
};

struct TrainArgs {
  std::string config;
  std::string data;
  std::string train_path;
  std::string dev_path;
  std::string out = "hmn.ckpt";
  std::string log;
  std::size_t dim = 0;
  std::size_t hops = 0;
  std::size_t history_hops = 0;
  std::size_t kb_hops = 0;
  double dropout = 0;
  double activation_dropout = 0;
  double lr = 0;
  std::size_t batch_size = 0;
  std::size_t epochs = 0;
  std::size_t patience = 0;
  double teacher_forcing = 0;
  std::uint64_t seed = 0;
  bool cfo = false;
  double clip_norm = 0;
  std::size_t workers = 0;
  std::size_t max_decode_len = 0;
};

struct EvalArgs {
  std::string ckpt;
  std::string data;
  std::string entities;
  std::string report;
  std::string config;
  std::size_t max_len = 30;
};

struct GenerateArgs {
  std::string ckpt;
  std::string data;
  std::string out;
  std::size_t max_len = 30;
};

struct ChatArgs {
  std::string ckpt;
  std::string kb;
  std::size_t max_len = 30;
};

/// A directory resolves to <dir>/<name>; a file is used as is.
fs::path resolve_split(const std::string& data, const std::string& name) {
  const fs::path p(data);
  if (fs::is_directory(p)) return p / name;
  return p;
}

std::string join(const std::vector<std::string>& words, char sep = ' ') {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

int gen_data(const GenDataArgs& a, std::ostream& out) {
  if (a.task != "lookup") throw UsageError("unknown task '" + a.task + "' (available: lookup)");
  corpus::SyntheticConfig config{a.entities, a.dialogs, a.oov_frac, a.seed};
  corpus::SyntheticTask task;
  try {
    task = corpus::generate_synthetic_task(config);
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create " + dir.string() + ": " + ec.message());
  corpus::write_normalized(dir / "train.jsonl", task.train);
  corpus::write_normalized(dir / "dev.jsonl", task.dev);
  corpus::write_normalized(dir / "test.jsonl", task.test);
  corpus::write_entity_list(dir / "entities.txt", task.entities);
  out << "train " << task.train.size() << " dialogues (" << corpus::make_samples(task.train).size()
      << " responses)\n";
  out << "dev " << task.dev.size() << " dialogues (" << corpus::make_samples(task.dev).size() << " responses)\n";
  out << "test " << task.test.size() << " dialogues (" << corpus::make_samples(task.test).size() << " responses)\n";
  out << "entities " << task.entities.size() << "\n";
  return kExitOk;
}

trainer::TrainConfig train_config(const TrainArgs& a, const CLI::App& app) {
  if (!fs::exists(a.config)) throw UsageError("config file not found: " + a.config);
  trainer::TrainConfig c;
  try {
    c = trainer::TrainConfig::from_file(a.config);
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--dim")) c.dim = a.dim;
  if (given("--hops")) c.history_hops = c.kb_hops = a.hops;
  if (given("--history-hops")) c.history_hops = a.history_hops;
  if (given("--kb-hops")) c.kb_hops = a.kb_hops;
  if (given("--dropout")) c.dropout = a.dropout;
  if (given("--activation-dropout")) c.activation_dropout = a.activation_dropout;
  if (given("--lr")) c.learning_rate = a.lr;
  if (given("--batch-size")) c.batch_size = a.batch_size;
  if (given("--epochs")) c.epochs = a.epochs;
  if (given("--patience")) c.patience = a.patience;
  if (given("--teacher-forcing")) c.teacher_forcing = a.teacher_forcing;
  if (given("--seed")) c.seed = a.seed;
  if (given("--cfo")) c.cfo = a.cfo;
  if (given("--clip-norm")) c.clip_norm = a.clip_norm;
  if (given("--workers")) c.workers = a.workers;
  if (given("--max-decode-len")) c.max_decode_len = a.max_decode_len;
  if (!a.data.empty()) {
    c.train_path = resolve_split(a.data, "train.jsonl").string();
    c.dev_path = resolve_split(a.data, "dev.jsonl").string();
  }
  if (given("--train")) c.train_path = a.train_path;
  if (given("--dev")) c.dev_path = a.dev_path;
  try {
    c.validate();
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  if (c.train_path.empty()) throw UsageError("no training data: set train_path in the config or pass --data");
  return c;
}

int train_cmd(const TrainArgs& a, const CLI::App& app, std::ostream& out, std::ostream& err) {
  const auto config = train_config(a, app);
  const auto train_set = corpus::read_dialogues(config.train_path);
  std::vector<corpus::Dialogue> dev_set;
  if (!config.dev_path.empty() && fs::exists(config.dev_path)) dev_set = corpus::read_dialogues(config.dev_path);

  const fs::path ckpt(a.out);
  const fs::path log = a.log.empty() ? fs::path(a.out + ".loss.csv") : fs::path(a.log);
  trainer::TrainHooks hooks;
  hooks.checkpoint_path = ckpt;
  trainer::TrainResult result;
  try {
    result = trainer::train(config, train_set, dev_set, hooks);
  } catch (const trainer::NonFiniteLoss& e) {
    const fs::path diag(a.out + ".diag.txt");
    std::ofstream(diag) << e.what() << '\n';
    err << "training aborted: non-finite loss; diagnostics written to " << diag.string() << '\n';
    return kExitFailure;
  }
  trainer::emit_loss_log(result.report, log);

  const auto& best = result.report.epochs[result.report.best_epoch - 1];
  out << std::fixed << std::setprecision(4);
  out << "epochs " << result.report.epochs.size() << (result.report.stopped_early ? " (early stop)" : "") << "\n";
  out << "best epoch " << result.report.best_epoch << "\n";
  out << "train loss " << best.train_loss << "\n";
  if (!dev_set.empty()) {
    out << "dev loss " << best.dev_loss << "\n";
    out << "dev bleu " << best.bleu << "\n";
    out << "dev entity_f1 " << best.entity_f1 << "\n";
    out << "dev per_response " << best.per_response << "\n";
    out << "dev per_dialog " << best.per_dialog << "\n";
  }
  out << "checkpoint " << ckpt.string() << "\n";
  out << "loss log " << log.string() << "\n";
  return kExitOk;
}

void check_config_matches(const model::ModelConfig& ckpt, const std::string& config_path) {
  const auto c = trainer::TrainConfig::from_file(config_path);
  std::vector<std::string> mismatches;
  if (c.dim != ckpt.dim) mismatches.push_back("dim (config " + std::to_string(c.dim) + ", checkpoint " + std::to_string(ckpt.dim) + ")");
  if (c.history_hops != ckpt.history_hops || c.kb_hops != ckpt.kb_hops) mismatches.push_back("hops");
  if (c.cfo != ckpt.cfo) mismatches.push_back("cfo");
  if (!mismatches.empty()) throw InputError("checkpoint/config mismatch: " + join(mismatches, ','));
}

int evaluate_cmd(const EvalArgs& a, std::ostream& out) {
  auto ckpt = model::load_checkpoint(a.ckpt);
  if (!a.config.empty()) check_config_matches(ckpt.params.config, a.config);
  const auto dialogues = corpus::read_dialogues(resolve_split(a.data, "test.jsonl"));
  const auto samples = corpus::make_samples(dialogues);
  metrics::EntitySet entities;
  if (!a.entities.empty()) {
    for (auto& e : corpus::read_entity_list(a.entities)) entities.insert(std::move(e));
  } else {
    entities = trainer::kb_entities(dialogues);
  }
  const auto eval = trainer::evaluate(ckpt.params, ckpt.vocab, samples, entities, a.max_len);
  out << std::fixed << std::setprecision(4);
  out << "responses " << eval.pairs.size() << "\n";
  out << "bleu " << eval.bleu << "\n";
  out << "entity_f1 " << eval.entity_f1.micro() << "\n";
  for (const auto& [name, counts] : eval.entity_f1.per_scenario) {
    out << "entity_f1[" << name << "] " << counts.f1() << "\n";
  }
  out << "per_response " << eval.accuracy.per_response << "\n";
  out << "per_dialog " << eval.accuracy.per_dialog << "\n";
  for (const auto& [name, acc] : eval.accuracy_by_scenario) {
    out << "accuracy[" << name << "] " << acc.per_response * 100 << "(" << acc.per_dialog * 100 << ")\n";
  }
  if (!a.report.empty()) {
    trainer::write_evaluation_report(a.report, eval);
    out << "report " << a.report << "\n";
  }
  return kExitOk;
}

std::string tagged_reply(const model::Generation& g) {
  std::string out;
  for (std::size_t i = 0; i < g.words.size(); ++i) {
    if (i) out += ' ';
    out += g.words[i] + "/" + std::string(model::source_tag(g.sources[i]));
  }
  return out;
}

int generate_cmd(const GenerateArgs& a, std::ostream& out) {
  const auto ckpt = model::load_checkpoint(a.ckpt);
  const auto samples = corpus::make_samples(corpus::read_dialogues(resolve_split(a.data, "test.jsonl")));
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out, std::ios::binary | std::ios::trunc);
    if (!file) throw InputError("cannot write " + a.out);
  }
  std::ostream& sink = a.out.empty() ? out : file;
  for (const auto& s : samples) {
    const auto g = model::generate(ckpt.params, ckpt.vocab, model::encode_sample(s, ckpt.vocab), a.max_len);
    sink << s.dialogue_id << '\t' << s.turn_id << '\t' << join(g.words) << '\t' << tagged_reply(g) << '\n';
  }
  return kExitOk;
}

int chat_cmd(const ChatArgs& a, std::istream& in, std::ostream& out) {
  const auto ckpt = model::load_checkpoint(a.ckpt);
  std::vector<corpus::KBTriple> kb;
  auto load_kb = [&](const std::string& path) {
    try {
      kb = corpus::read_kb_file(path);
      out << "loaded " << kb.size() << " KB triples\n";
    } catch (const InputError& e) {
      out << "could not load KB: " << e.what() << "\n";
    }
  };
  if (!a.kb.empty()) load_kb(a.kb);

  std::vector<corpus::Turn> turns;
  std::string line;
  out << "> " << std::flush;
  while (std::getline(in, line)) {
    const auto trimmed = join(corpus::tokenize(line));
    if (trimmed == ":quit") break;
    if (trimmed == ":reset") {
      turns.clear();
      out << "history cleared\n> " << std::flush;
      continue;
    }
    if (trimmed.rfind(":kb", 0) == 0) {
      const auto space = line.find_first_not_of(' ', line.find(":kb") + 3);
      if (space == std::string::npos) {
        out << "usage: :kb <file>\n";
      } else {
        load_kb(line.substr(space));
      }
      out << "> " << std::flush;
      continue;
    }
    if (trimmed.empty()) {
      out << "> " << std::flush;
      continue;
    }
    turns.push_back({corpus::Speaker::User, line});
    corpus::DialogueSample sample;
    sample.history = corpus::tag_history(turns);
    sample.kb = kb;
    sample.response = {std::string(corpus::kEos)};
    auto labels = corpus::make_copy_labels(sample.response, sample.history, sample.kb);
    sample.his_copy_labels = labels.history;
    sample.kb_copy_labels = labels.kb;
    const auto g = model::generate(ckpt.params, ckpt.vocab, model::encode_sample(sample, ckpt.vocab), a.max_len);
    const std::string reply = join(g.words);
    turns.push_back({corpus::Speaker::Sys, reply});
    out << "sys: " << reply << "\n";
    out << "     " << tagged_reply(g) << "\n> " << std::flush;
  }
  out << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heterogeneous memory network dialogue model", "hmn"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate the synthetic lookup task");
  gen_cmd->add_option("--task", gen.task, "Task family (lookup)");
  gen_cmd->add_option("--entities", gen.entities, "Number of in-vocabulary restaurants");
  gen_cmd->add_option("--dialogs", gen.dialogs, "Number of training dialogues");
  gen_cmd->add_option("--oov-frac", gen.oov_frac, "Share of test dialogues about unseen restaurants");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  TrainArgs tr;
  auto* train_app = app.add_subcommand("train", "Train a model");
  train_app->add_option("--config", tr.config, "JSON training config")->required();
  train_app->add_option("--data", tr.data, "Directory holding train.jsonl and dev.jsonl");
  train_app->add_option("--train", tr.train_path, "Training file (overrides --data)");
  train_app->add_option("--dev", tr.dev_path, "Dev file (overrides --data)");
  train_app->add_option("--out", tr.out, "Checkpoint path");
  train_app->add_option("--log", tr.log, "Loss log CSV (default <out>.loss.csv)");
  train_app->add_option("--dim", tr.dim);
  train_app->add_option("--hops", tr.hops, "Hops in both memories");
  train_app->add_option("--history-hops", tr.history_hops);
  train_app->add_option("--kb-hops", tr.kb_hops);
  train_app->add_option("--dropout", tr.dropout, "UNK masking rate");
  train_app->add_option("--activation-dropout", tr.activation_dropout);
  train_app->add_option("--lr", tr.lr);
  train_app->add_option("--batch-size", tr.batch_size);
  train_app->add_option("--epochs", tr.epochs);
  train_app->add_option("--patience", tr.patience);
  train_app->add_option("--teacher-forcing", tr.teacher_forcing);
  train_app->add_option("--seed", tr.seed);
  train_app->add_flag("--cfo", tr.cfo, "Context-free history memory ablation");
  train_app->add_option("--clip-norm", tr.clip_norm);
  train_app->add_option("--workers", tr.workers);
  train_app->add_option("--max-decode-len", tr.max_decode_len);

  EvalArgs ev;
  auto* eval_app = app.add_subcommand("evaluate", "Evaluate a checkpoint");
  eval_app->add_option("--ckpt", ev.ckpt, "Checkpoint")->required();
  eval_app->add_option("--data", ev.data, "Test file, or directory holding test.jsonl")->required();
  eval_app->add_option("--entities", ev.entities, "Entity list (default: KB subjects and objects)");
  eval_app->add_option("--report", ev.report, "Evaluation report path");
  eval_app->add_option("--config", ev.config, "Config to check against the checkpoint");
  eval_app->add_option("--max-len", ev.max_len, "Maximum generated words");

  GenerateArgs gn;
  auto* gen_app = app.add_subcommand("generate", "Generate responses for a dialogue file");
  gen_app->add_option("--ckpt", gn.ckpt, "Checkpoint")->required();
  gen_app->add_option("--data", gn.data, "Dialogue file, or directory holding test.jsonl")->required();
  gen_app->add_option("--out", gn.out, "Output path (default stdout)");
  gen_app->add_option("--max-len", gn.max_len, "Maximum generated words");

  ChatArgs ch;
  auto* chat_app = app.add_subcommand("chat", "Interactive session");
  chat_app->add_option("--ckpt", ch.ckpt, "Checkpoint")->required();
  chat_app->add_option("--kb", ch.kb, "KB file, one 'subject relation object' per line");
  chat_app->add_option("--max-len", ch.max_len, "Maximum generated words");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return gen_data(gen, out);
    if (train_app->parsed()) return train_cmd(tr, *train_app, out, err);
    if (eval_app->parsed()) return evaluate_cmd(ev, out);
    if (gen_app->parsed()) return generate_cmd(gn, out);
    if (chat_app->parsed()) return chat_cmd(ch, in, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace hmn::cli
