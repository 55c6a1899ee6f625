#pragma once

#include <cstddef>

#include "hmn/corpus/types.hpp"

namespace hmn::corpus {

/// Narrows the KB to the rows the history talks about.
///
/// A triple's overlap count is the number of history tokens equal to the
/// subject or object of any triple sharing its subject, so every fact of a
/// mentioned entity ranks together. Triples are stably sorted by descending
/// count, cut to max_triples, and the KB copy labels are recomputed.
DialogueSample kb_match_filter(const DialogueSample& sample, std::size_t max_triples);

}  // namespace hmn::corpus
