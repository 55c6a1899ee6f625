#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace hmn::metrics {

struct EvalPair {
  std::string dialogue_id;
  std::size_t turn_id = 0;
  std::vector<std::string> generated;
  std::vector<std::string> gold;
  std::string scenario;
  /// Per generated word: "his", "kb" or "vocab".
  std::vector<std::string> sources;
};

struct BleuBreakdown {
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;
  double brevity_penalty = 0;
  double score = 0;
};

/// Corpus BLEU in [0, 100] with clipped n-gram counts pooled over all pairs,
/// the brevity penalty on total lengths, and no smoothing (any zero
/// precision gives 0). Throws InputError on an empty corpus.
double corpus_bleu(std::span<const EvalPair> pairs, std::size_t max_n = 4);
BleuBreakdown corpus_bleu_breakdown(std::span<const EvalPair> pairs, std::size_t max_n = 4);

using EntitySet = std::unordered_set<std::string>;

/// Distinct tokens of `tokens` that are listed entities.
std::set<std::string> entities_in(std::span<const std::string> tokens, const EntitySet& entities);

struct F1Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  /// 2TP / (2TP + FP + FN); 1.0 when all three are zero.
  double f1() const;
};

struct EntityF1 {
  F1Counts overall;
  std::map<std::string, F1Counts> per_scenario;
  double micro() const { return overall.f1(); }
};

/// Micro-averaged entity F1, overall and per scenario.
EntityF1 entity_f1(std::span<const EvalPair> pairs, const EntitySet& entities);

struct Accuracy {
  double per_response = 0;
  double per_dialog = 0;
};

/// Exact-match rate over responses and over whole dialogues.
Accuracy response_accuracy(std::span<const EvalPair> pairs);

std::vector<EvalPair> with_scenario(std::span<const EvalPair> pairs, const std::string& scenario);

}  // namespace hmn::metrics
