#include "hmn/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "hmn/errors.hpp"

namespace hmn::metrics {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const std::vector<std::string>& words, std::size_t n) {
  NgramCounts out;
  if (words.size() < n) return out;
  for (std::size_t i = 0; i + n <= words.size(); ++i) {
    ++out[std::vector<std::string>(words.begin() + static_cast<std::ptrdiff_t>(i),
                                   words.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return out;
}

}  // namespace

BleuBreakdown corpus_bleu_breakdown(std::span<const EvalPair> pairs, std::size_t max_n) {
  if (pairs.empty()) throw InputError("corpus_bleu: empty corpus");
  if (max_n < 1 || max_n > 4) throw InputError("corpus_bleu: max_n must be in 1..4");
  BleuBreakdown b;
  for (const auto& p : pairs) {
    if (p.gold.empty()) throw InputError("corpus_bleu: empty reference for " + p.dialogue_id);
    b.hypothesis_length += p.generated.size();
    b.reference_length += p.gold.size();
    for (std::size_t n = 1; n <= max_n; ++n) {
      const auto hyp = ngrams(p.generated, n);
      const auto ref = ngrams(p.gold, n);
      for (const auto& [gram, count] : hyp) {
        auto it = ref.find(gram);
        if (it != ref.end()) b.matches[n - 1] += std::min(count, it->second);
        b.totals[n - 1] += count;
      }
    }
  }
  if (b.hypothesis_length == 0) return b;
  b.brevity_penalty = b.hypothesis_length >= b.reference_length
                          ? 1.0
                          : std::exp(1.0 - static_cast<double>(b.reference_length) /
                                               static_cast<double>(b.hypothesis_length));
  double log_sum = 0;
  for (std::size_t n = 0; n < max_n; ++n) {
    if (b.matches[n] == 0) return b;
    log_sum += std::log(static_cast<double>(b.matches[n]) / static_cast<double>(b.totals[n]));
  }
  b.score = 100.0 * b.brevity_penalty * std::exp(log_sum / static_cast<double>(max_n));
  return b;
}

double corpus_bleu(std::span<const EvalPair> pairs, std::size_t max_n) {
  return corpus_bleu_breakdown(pairs, max_n).score;
}

std::set<std::string> entities_in(std::span<const std::string> tokens, const EntitySet& entities) {
  std::set<std::string> out;
  for (const auto& t : tokens) {
    if (entities.contains(t)) out.insert(t);
  }
  return out;
}

double F1Counts::f1() const {
  const std::size_t denom = 2 * tp + fp + fn;
  if (denom == 0) return 1.0;
  return static_cast<double>(2 * tp) / static_cast<double>(denom);
}

EntityF1 entity_f1(std::span<const EvalPair> pairs, const EntitySet& entities) {
  if (entities.empty()) throw InputError("entity_f1: empty entity list");
  EntityF1 out;
  for (const auto& p : pairs) {
    const auto pred = entities_in(p.generated, entities);
    const auto gold = entities_in(p.gold, entities);
    F1Counts c;
    for (const auto& e : pred) (gold.contains(e) ? c.tp : c.fp) += 1;
    for (const auto& e : gold) {
      if (!pred.contains(e)) ++c.fn;
    }
    for (auto* target : {&out.overall, &out.per_scenario[p.scenario]}) {
      target->tp += c.tp;
      target->fp += c.fp;
      target->fn += c.fn;
    }
  }
  return out;
}

Accuracy response_accuracy(std::span<const EvalPair> pairs) {
  if (pairs.empty()) return {};
  std::map<std::string, bool> dialog_ok;
  std::size_t correct = 0;
  for (const auto& p : pairs) {
    const bool ok = p.generated == p.gold;
    correct += ok ? 1 : 0;
    auto [it, inserted] = dialog_ok.emplace(p.dialogue_id, ok);
    if (!inserted) it->second = it->second && ok;
  }
  const auto dialogs_ok = std::count_if(dialog_ok.begin(), dialog_ok.end(), [](const auto& kv) { return kv.second; });
  return {static_cast<double>(correct) / static_cast<double>(pairs.size()),
          static_cast<double>(dialogs_ok) / static_cast<double>(dialog_ok.size())};
}

std::vector<EvalPair> with_scenario(std::span<const EvalPair> pairs, const std::string& scenario) {
  std::vector<EvalPair> out;
  std::copy_if(pairs.begin(), pairs.end(), std::back_inserter(out),
               [&](const EvalPair& p) { return p.scenario == scenario; });
  return out;
}

}  // namespace hmn::metrics
