#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmn/corpus/types.hpp"
#include "hmn/corpus/vocabulary.hpp"
#include "hmn/metrics/metrics.hpp"
#include "hmn/model/model.hpp"
#include "hmn/model/parameters.hpp"
#include "hmn/trainer/adam.hpp"
#include "hmn/trainer/config.hpp"

namespace hmn::trainer {

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0;
  double dev_loss = 0;
  double bleu = 0;
  double entity_f1 = 0;
  double per_response = 0;
  double per_dialog = 0;
  double seconds = 0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_per_response = -1;
  bool stopped_early = false;
  /// False when training ran without a dev set; the loss log then has train rows only.
  bool has_dev = false;
  std::filesystem::path best_checkpoint;
};

struct TrainResult {
  TrainReport report;
  model::HMNParameters<float> best;
  model::HMNParameters<float> last;
  corpus::Vocabulary vocab;
};

/// Raised when a batch produces a non-finite loss; what() carries the dump.
class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainHooks {
  /// Called after every epoch; return false to stop.
  std::function<bool(const EpochRecord&)> on_epoch;
  /// Where to write the best checkpoint; empty skips writing.
  std::filesystem::path checkpoint_path;
};

/// Mini-batch training with per-timestep teacher-forcing coins, UNK input
/// masking, global-norm clipping and Adam. Keeps the parameters with the
/// best dev per-response accuracy and stops after `patience` epochs without
/// improvement. All randomness derives from config.seed; per-sample draws
/// depend only on (seed, epoch, sample index), never on worker assignment.
TrainResult train(const TrainConfig& config, std::span<const corpus::Dialogue> train_set,
                  std::span<const corpus::Dialogue> dev_set, const TrainHooks& hooks = {});

/// One optimizer step over `batch`; returns the mean loss before the step.
/// Exposed for tests.
double train_batch(model::HMNParameters<float>& params, Adam<float>& optimizer, const corpus::Vocabulary& vocab,
                   std::span<const model::EncodedSample* const> batch, std::span<const std::uint64_t> sample_seeds,
                   const TrainConfig& config);

struct Evaluation {
  std::vector<metrics::EvalPair> pairs;
  double bleu = 0;
  metrics::EntityF1 entity_f1;
  metrics::Accuracy accuracy;
  std::map<std::string, metrics::Accuracy> accuracy_by_scenario;
  std::size_t truncated = 0;
};

/// Greedy generation over every sample followed by the metric suite.
/// Parameters are only read.
Evaluation evaluate(const model::HMNParameters<float>& params, const corpus::Vocabulary& vocab,
                    std::span<const corpus::DialogueSample> samples, const metrics::EntitySet& entities,
                    std::size_t max_decode_len);

/// Metric map for model selection: bleu, entity_f1, per_response, per_dialog.
std::map<std::string, double> evaluate_dev(const model::HMNParameters<float>& params, const corpus::Vocabulary& vocab,
                                           std::span<const corpus::DialogueSample> dev,
                                           const metrics::EntitySet& entities, std::size_t max_decode_len);

/// Mean teacher-forced loss without masking.
double mean_loss(const model::HMNParameters<float>& params, const corpus::Vocabulary& vocab,
                 std::span<const corpus::DialogueSample> samples);

/// KB subjects and objects of the given dialogues.
metrics::EntitySet kb_entities(std::span<const corpus::Dialogue> dialogues);

/// JSON report: global metrics, per-scenario breakdown, per-pair diagnostics.
std::string evaluation_report(const Evaluation& eval);
void write_evaluation_report(const std::filesystem::path& path, const Evaluation& eval);

/// CSV with header epoch,split,loss,bleu,entity_f1,per_response,per_dialog;
/// one train row and one dev row per epoch.
std::string loss_log_csv(const TrainReport& report);
void emit_loss_log(const TrainReport& report, const std::filesystem::path& path);

}  // namespace hmn::trainer
