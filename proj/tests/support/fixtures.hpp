#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "hmn/corpus/tagging.hpp"
#include "hmn/corpus/vocabulary.hpp"
#include "hmn/model/model.hpp"
#include "oracles.hpp"

namespace fixture {

using namespace hmn;

/// Two exchanges about one restaurant. The second sample has six history
/// words (plus sentinel) and three KB triples.
inline corpus::Dialogue toy_dialogue() {
  corpus::Dialogue d;
  d.id = "toy-0";
  d.scenario = "lookup";
  d.turns = {{corpus::Speaker::User, "hi there"},
             {corpus::Speaker::Sys, "hello"},
             {corpus::Speaker::User, "phone of resto_a"},
             {corpus::Speaker::Sys, "resto_a_phone is the number"}};
  d.kb = {{"resto_a", "r_phone", "resto_a_phone"},
          {"resto_a", "r_address", "resto_a_address"},
          {"resto_a", "r_cuisine", "thai"}};
  d.kb_rows = 3;
  return d;
}

struct Toy {
  corpus::Vocabulary vocab;
  corpus::DialogueSample sample;
  model::EncodedSample encoded;
};

inline Toy toy() {
  const std::vector<corpus::Dialogue> dialogues{toy_dialogue()};
  Toy t;
  t.vocab = corpus::Vocabulary::build(dialogues);
  t.sample = corpus::make_samples(dialogues).back();
  t.encoded = model::encode_sample(t.sample, t.vocab);
  return t;
}

/// Redraws every parameter from N(0, scale) so no gate saturates and no
/// gradient is vanishingly small.
template <typename T>
void randomize(num::ParamStore<T>& store, std::uint64_t seed, double scale = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  for (std::size_t i = 0; i < store.size(); ++i) {
    for (auto& x : store.value(num::ParamId{i}).values()) x = static_cast<T>(normal(rng));
  }
}

inline std::vector<oracle::Token> tokens(const model::EncodedSample& s) {
  std::vector<oracle::Token> out;
  for (const auto& t : s.history) out.push_back({t.token, t.turn, t.speaker});
  return out;
}

inline std::vector<oracle::Triple> triples(const model::EncodedSample& s) {
  std::vector<oracle::Triple> out;
  for (const auto& t : s.kb) out.push_back({t.subject, t.relation, t.object});
  return out;
}

}  // namespace fixture
