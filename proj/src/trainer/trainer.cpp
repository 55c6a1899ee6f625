#include "hmn/trainer/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "hmn/corpus/tagging.hpp"
#include "hmn/errors.hpp"
#include "hmn/log.hpp"
#include "hmn/model/checkpoint.hpp"

namespace hmn::trainer {

using corpus::Vocabulary;
using model::EncodedSample;
using model::HMNParameters;

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t epoch, std::size_t index) {
  return splitmix(splitmix(splitmix(seed) ^ epoch) ^ index);
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string parameter_norms(const HMNParameters<float>& params) {
  std::ostringstream out;
  for (std::size_t i = 0; i < params.store.size(); ++i) {
    const num::ParamId id{i};
    out << "  " << params.store.name(id) << " norm=" << params.store.value(id).vec().norm() << '\n';
  }
  return out.str();
}

struct WorkerResult {
  num::GradStore<float> grads;
  double loss = 0;
  std::vector<std::size_t> bad;
};

void run_worker(const HMNParameters<float>& params, const Vocabulary& vocab,
                std::span<const EncodedSample* const> batch, std::span<const std::uint64_t> seeds,
                const TrainConfig& config, std::size_t begin, std::size_t end, WorkerResult& out) {
  for (std::size_t i = begin; i < end; ++i) {
    std::mt19937_64 rng(seeds[i]);
    model::LossOptions options{config.teacher_forcing, config.dropout, config.activation_dropout, &rng};
    num::Tape<float> tape(params.store, &out.grads);
    const num::Var loss = model::joint_loss(tape, params, vocab, *batch[i], options);
    const double value = tape.value(loss)[0];
    if (!std::isfinite(value)) {
      out.bad.push_back(i);
      continue;
    }
    out.loss += value;
    tape.backward(loss);
  }
}

}  // namespace

double train_batch(HMNParameters<float>& params, Adam<float>& optimizer, const Vocabulary& vocab,
                   std::span<const EncodedSample* const> batch, std::span<const std::uint64_t> sample_seeds,
                   const TrainConfig& config) {
  if (batch.empty()) throw ContractError("train_batch: empty batch");
  if (batch.size() != sample_seeds.size()) throw ContractError("train_batch: one seed per sample required");
  const std::size_t workers = std::min(config.workers, batch.size());
  std::vector<WorkerResult> results;
  results.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) results.push_back({num::GradStore<float>(params.store), 0.0, {}});

  auto range = [&](std::size_t w) {
    return std::pair{batch.size() * w / workers, batch.size() * (w + 1) / workers};
  };
  if (workers == 1) {
    run_worker(params, vocab, batch, sample_seeds, config, 0, batch.size(), results[0]);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      auto [b, e] = range(w);
      threads.emplace_back(run_worker, std::cref(params), std::cref(vocab), batch, sample_seeds, std::cref(config), b,
                           e, std::ref(results[w]));
    }
    for (auto& t : threads) t.join();
  }

  std::vector<std::size_t> bad;
  double loss = 0;
  for (auto& r : results) {
    bad.insert(bad.end(), r.bad.begin(), r.bad.end());
    loss += r.loss;
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "non-finite loss at batch positions";
    for (auto i : bad) msg << ' ' << i;
    msg << "\nparameter norms:\n" << parameter_norms(params);
    throw NonFiniteLoss(msg.str());
  }

  num::GradStore<float>& grads = results[0].grads;
  for (std::size_t w = 1; w < workers; ++w) grads.add(results[w].grads);
  grads.scale(1.0f / static_cast<float>(batch.size()));
  clip_global_norm(grads, config.clip_norm);
  optimizer.step(params.store, grads);
  return loss / static_cast<double>(batch.size());
}

double mean_loss(const HMNParameters<float>& params, const Vocabulary& vocab,
                 std::span<const corpus::DialogueSample> samples) {
  if (samples.empty()) return 0.0;
  double total = 0;
  for (const auto& s : samples) {
    num::Tape<float> tape(params.store);
    total += tape.value(model::joint_loss(tape, params, vocab, model::encode_sample(s, vocab)))[0];
  }
  return total / static_cast<double>(samples.size());
}

metrics::EntitySet kb_entities(std::span<const corpus::Dialogue> dialogues) {
  metrics::EntitySet out;
  for (const auto& d : dialogues) {
    for (const auto& k : d.kb) {
      out.insert(k.subject);
      out.insert(k.object);
    }
  }
  return out;
}

Evaluation evaluate(const HMNParameters<float>& params, const Vocabulary& vocab,
                    std::span<const corpus::DialogueSample> samples, const metrics::EntitySet& entities,
                    std::size_t max_decode_len) {
  if (samples.empty()) throw InputError("evaluate: no samples");
  Evaluation out;
  for (const auto& s : samples) {
    const auto generation = model::generate(params, vocab, model::encode_sample(s, vocab), max_decode_len);
    metrics::EvalPair pair;
    pair.dialogue_id = s.dialogue_id;
    pair.turn_id = s.turn_id;
    pair.scenario = s.scenario;
    pair.generated = generation.words;
    pair.gold.assign(s.response.begin(), s.response.end() - 1);
    for (auto src : generation.sources) pair.sources.emplace_back(model::source_tag(src));
    out.truncated += generation.truncated ? 1 : 0;
    out.pairs.push_back(std::move(pair));
  }
  out.bleu = metrics::corpus_bleu(out.pairs);
  out.entity_f1 = entities.empty() ? metrics::EntityF1{} : metrics::entity_f1(out.pairs, entities);
  out.accuracy = metrics::response_accuracy(out.pairs);
  std::set<std::string> scenarios;
  for (const auto& p : out.pairs) scenarios.insert(p.scenario);
  for (const auto& sc : scenarios) {
    out.accuracy_by_scenario[sc] = metrics::response_accuracy(metrics::with_scenario(out.pairs, sc));
  }
  return out;
}

std::map<std::string, double> evaluate_dev(const HMNParameters<float>& params, const Vocabulary& vocab,
                                           std::span<const corpus::DialogueSample> dev,
                                           const metrics::EntitySet& entities, std::size_t max_decode_len) {
  const auto eval = evaluate(params, vocab, dev, entities, max_decode_len);
  return {{"bleu", eval.bleu},
          {"entity_f1", eval.entity_f1.micro()},
          {"per_response", eval.accuracy.per_response},
          {"per_dialog", eval.accuracy.per_dialog}};
}

TrainResult train(const TrainConfig& config, std::span<const corpus::Dialogue> train_set,
                  std::span<const corpus::Dialogue> dev_set, const TrainHooks& hooks) {
  config.validate();
  const auto samples = corpus::make_samples(train_set);
  if (samples.empty()) throw InputError("train: training corpus has no samples");
  const auto dev_samples = corpus::make_samples(dev_set);

  Vocabulary vocab = Vocabulary::build(train_set);
  std::vector<EncodedSample> encoded;
  encoded.reserve(samples.size());
  for (const auto& s : samples) encoded.push_back(model::encode_sample(s, vocab));

  metrics::EntitySet entities = kb_entities(train_set);
  entities.merge(kb_entities(dev_set));

  auto params = model::init_parameters<float>(config.model_config(vocab.size()), config.seed);
  Adam<float> optimizer(params.store, config.learning_rate);
  std::mt19937_64 shuffle_rng(splitmix(config.seed ^ 0x5bd1e995ULL));

  spdlog::info("training on {} samples ({} dev), vocabulary {}, {} parameters", samples.size(), dev_samples.size(),
               vocab.size(), params.store.total_elements());

  TrainResult result{TrainReport{}, params, params, vocab};
  result.report.has_dev = !dev_samples.empty();
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t e = std::min(order.size(), b + config.batch_size);
      std::vector<const EncodedSample*> batch;
      std::vector<std::uint64_t> seeds;
      for (std::size_t i = b; i < e; ++i) {
        batch.push_back(&encoded[order[i]]);
        seeds.push_back(sample_seed(config.seed, epoch, order[i]));
      }
      try {
        total += train_batch(params, optimizer, vocab, batch, seeds, config) * static_cast<double>(batch.size());
      } catch (const NonFiniteLoss& err) {
        std::ostringstream msg;
        msg << "epoch " << epoch << ", batch starting at " << b << "; samples:";
        for (std::size_t i = b; i < e; ++i) msg << ' ' << samples[order[i]].dialogue_id << '#' << samples[order[i]].turn_id;
        msg << '\n' << err.what();
        throw NonFiniteLoss(msg.str());
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = total / static_cast<double>(samples.size());
    if (!dev_samples.empty()) {
      rec.dev_loss = mean_loss(params, vocab, dev_samples);
      const auto eval = evaluate(params, vocab, dev_samples, entities, config.max_decode_len);
      rec.bleu = eval.bleu;
      rec.entity_f1 = eval.entity_f1.micro();
      rec.per_response = eval.accuracy.per_response;
      rec.per_dialog = eval.accuracy.per_dialog;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.report.epochs.push_back(rec);
    spdlog::info("epoch {:3d} loss {:.4f} dev loss {:.4f} acc {:.3f} ({:.3f}) bleu {:.2f} [{:.1f}s]", epoch,
                 rec.train_loss, rec.dev_loss, rec.per_response, rec.per_dialog, rec.bleu, rec.seconds);

    const bool improved = dev_samples.empty() || rec.per_response > result.report.best_per_response;
    if (improved) {
      result.report.best_epoch = epoch;
      result.report.best_per_response = rec.per_response;
      result.best = params;
      since_best = 0;
      if (!hooks.checkpoint_path.empty()) {
        model::save_checkpoint(hooks.checkpoint_path, params, vocab, config.to_json());
        result.report.best_checkpoint = hooks.checkpoint_path;
      }
    } else if (++since_best >= config.patience) {
      result.report.stopped_early = true;
    }
    if (hooks.on_epoch && !hooks.on_epoch(rec)) break;
    if (result.report.stopped_early) break;
  }
  result.last = std::move(params);
  return result;
}

std::string evaluation_report(const Evaluation& eval) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["bleu"] = eval.bleu;
  j["entity_f1"] = eval.entity_f1.micro();
  j["per_response"] = eval.accuracy.per_response;
  j["per_dialog"] = eval.accuracy.per_dialog;
  j["responses"] = eval.pairs.size();
  j["truncated"] = eval.truncated;
  ordered_json scenarios = ordered_json::object();
  for (const auto& [name, acc] : eval.accuracy_by_scenario) {
    ordered_json s;
    s["per_response"] = acc.per_response;
    s["per_dialog"] = acc.per_dialog;
    auto it = eval.entity_f1.per_scenario.find(name);
    s["entity_f1"] = it == eval.entity_f1.per_scenario.end() ? 1.0 : it->second.f1();
    scenarios[name] = std::move(s);
  }
  j["scenarios"] = std::move(scenarios);
  ordered_json pairs = ordered_json::array();
  for (const auto& p : eval.pairs) {
    ordered_json row;
    row["dialogue_id"] = p.dialogue_id;
    row["turn_id"] = p.turn_id;
    row["scenario"] = p.scenario;
    row["gold"] = p.gold;
    row["generated"] = p.generated;
    row["sources"] = p.sources;
    row["correct"] = p.generated == p.gold;
    pairs.push_back(std::move(row));
  }
  j["pairs"] = std::move(pairs);
  return j.dump(2) + "\n";
}

void write_evaluation_report(const std::filesystem::path& path, const Evaluation& eval) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write report " + path.string());
  out << evaluation_report(eval);
  if (!out) throw InputError("failed writing report " + path.string());
}

std::string loss_log_csv(const TrainReport& report) {
  std::string out = "epoch,split,loss,bleu,entity_f1,per_response,per_dialog\n";
  for (const auto& r : report.epochs) {
    out += std::to_string(r.epoch) + ",train," + format_number(r.train_loss) + ",,,,\n";
    if (!report.has_dev) continue;
    out += std::to_string(r.epoch) + ",dev," + format_number(r.dev_loss) + "," + format_number(r.bleu) + "," +
           format_number(r.entity_f1) + "," + format_number(r.per_response) + "," + format_number(r.per_dialog) + "\n";
  }
  return out;
}

void emit_loss_log(const TrainReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write loss log " + path.string());
  out << loss_log_csv(report);
  if (!out) throw InputError("failed writing loss log " + path.string());
}

}  // namespace hmn::trainer
