#include "hmn/corpus/kb_filter.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "hmn/corpus/tagging.hpp"
#include "hmn/errors.hpp"

namespace hmn::corpus {

DialogueSample kb_match_filter(const DialogueSample& sample, std::size_t max_triples) {
  if (max_triples < 1) throw InputError("kb_match_filter: max_triples must be at least 1");

  std::unordered_map<std::string, std::size_t> mentions;
  for (const auto& t : sample.history) {
    if (!t.is_sentinel()) ++mentions[t.token];
  }
  auto count = [&](const std::string& w) {
    auto it = mentions.find(w);
    return it == mentions.end() ? std::size_t{0} : it->second;
  };

  std::unordered_map<std::string, std::size_t> by_subject;
  for (const auto& k : sample.kb) {
    by_subject[k.subject] += count(k.object);
  }
  for (auto& [subject, total] : by_subject) total += count(subject);

  std::vector<std::size_t> order(sample.kb.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return by_subject[sample.kb[a].subject] > by_subject[sample.kb[b].subject];
  });
  if (order.size() > max_triples) order.resize(max_triples);

  DialogueSample out = sample;
  out.kb.clear();
  for (auto i : order) out.kb.push_back(sample.kb[i]);
  out.kb_copy_labels = make_copy_labels(out.response, out.history, out.kb).kb;
  return out;
}

}  // namespace hmn::corpus
