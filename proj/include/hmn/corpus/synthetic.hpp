#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmn/corpus/types.hpp"

namespace hmn::corpus {

inline constexpr const char* kLookupScenario = "lookup";
inline constexpr const char* kLookupOovScenario = "lookup_oov";

struct SyntheticConfig {
  std::size_t n_entities = 20;
  /// Training dialogues; dev gets n_dialogs/6 and test n_dialogs/3.
  std::size_t n_dialogs = 600;
  /// Share of the test split drawn from entities never seen in training.
  double oov_fraction = 0.5;
  std::uint64_t seed = 7;
};

struct SyntheticTask {
  std::vector<Dialogue> train;
  std::vector<Dialogue> dev;
  std::vector<Dialogue> test;
  /// Every entity name and KB value the generator can emit.
  std::vector<std::string> entities;
};

/// Restaurant lookup dialogues. Each dialogue greets, then asks for the
/// phone or address of one restaurant, optionally following up on the other
/// attribute. The KB holds that restaurant's facts; the gold answer quotes
/// the KB object.
SyntheticTask generate_synthetic_task(const SyntheticConfig& config);

}  // namespace hmn::corpus
