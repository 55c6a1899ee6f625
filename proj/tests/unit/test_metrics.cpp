#include <doctest.h>

#include <algorithm>
#include <random>

#include "hmn/errors.hpp"
#include "hmn/metrics/metrics.hpp"
#include "oracles.hpp"

using namespace hmn::metrics;

namespace {

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

EvalPair pair(const std::string& id, std::size_t turn, const std::string& gen, const std::string& gold,
              const std::string& scenario = "s") {
  return {id, turn, words(gen), words(gold), scenario, {}};
}

std::vector<EvalPair> toy_corpus() {
  return {pair("a", 0, "the cat sat on the mat", "the cat is on the mat"), pair("b", 0, "a b c d e", "a b c d e f g"),
          pair("c", 0, "x y z w", "x y z w")};
}

}  // namespace

TEST_CASE("bleu on the three-pair toy") {
  const auto corpus = toy_corpus();
  const auto b = corpus_bleu_breakdown(corpus);
  CHECK(b.matches == std::array<std::size_t, 4>{14, 10, 6, 3});
  CHECK(b.totals == std::array<std::size_t, 4>{15, 12, 9, 6});
  CHECK(b.hypothesis_length == 15);
  CHECK(b.reference_length == 17);
  CHECK(std::abs(b.score - 62.44930910984927) <= 1e-9);

  std::vector<oracle::Sentence> hyps, refs;
  for (const auto& p : corpus) {
    hyps.push_back(p.generated);
    refs.push_back(p.gold);
  }
  CHECK(std::abs(corpus_bleu(corpus) - oracle::bleu(hyps, refs)) <= 1e-9);
}

TEST_CASE("bleu edge cases") {
  CHECK(corpus_bleu(std::vector<EvalPair>{pair("a", 0, "one two three four five", "one two three four five")}) ==
        doctest::Approx(100.0));
  CHECK(corpus_bleu(std::vector<EvalPair>{pair("a", 0, "one two three x five", "one two three four five")}) == 0.0);
  CHECK(corpus_bleu(std::vector<EvalPair>{pair("a", 0, "", "one two")}) == 0.0);
  CHECK_THROWS_AS(corpus_bleu(std::vector<EvalPair>{}), hmn::InputError);
  CHECK_THROWS_AS(corpus_bleu(std::vector<EvalPair>{pair("a", 0, "x", "")}), hmn::InputError);
}

TEST_CASE("bleu against random corpora matches the oracle and ignores pair order (100 trials)") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> len(1, 9), word(0, 5), count(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EvalPair> corpus;
    std::vector<oracle::Sentence> hyps, refs;
    for (int i = count(rng); i > 0; --i) {
      EvalPair p;
      p.dialogue_id = std::to_string(i);
      for (int k = len(rng); k > 0; --k) p.generated.push_back("w" + std::to_string(word(rng)));
      for (int k = len(rng); k > 0; --k) p.gold.push_back("w" + std::to_string(word(rng)));
      hyps.push_back(p.generated);
      refs.push_back(p.gold);
      corpus.push_back(p);
    }
    const double score = corpus_bleu(corpus);
    CHECK(std::abs(score - oracle::bleu(hyps, refs)) <= 1e-9);
    CHECK(score <= 100.0 + 1e-12);
    std::shuffle(corpus.begin(), corpus.end(), rng);
    CHECK(corpus_bleu(corpus) == score);
  }
}

TEST_CASE("entity f1") {
  const EntitySet ents{"a", "b", "c", "d"};
  const std::vector<EvalPair> one{pair("x", 0, "a b c", "a b")};
  const auto f = entity_f1(one, ents);
  CHECK(f.overall.tp == 2);
  CHECK(f.overall.fp == 1);
  CHECK(f.overall.fn == 0);
  CHECK(f.micro() == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(entity_f1(std::vector<EvalPair>{pair("x", 0, "hello", "bye")}, ents).micro() == 1.0);
  CHECK(entity_f1(std::vector<EvalPair>{pair("x", 0, "a a d", "a d")}, ents).micro() == 1.0);

  const std::vector<EvalPair> mixed{pair("x", 0, "a", "a", "nav"), pair("y", 0, "b", "c", "weather")};
  const auto m = entity_f1(mixed, ents);
  CHECK(m.per_scenario.at("nav").f1() == 1.0);
  CHECK(m.per_scenario.at("weather").f1() == 0.0);
  CHECK(m.micro() == doctest::Approx(0.5));
  CHECK_THROWS_AS(entity_f1(mixed, EntitySet{}), hmn::InputError);
  CHECK(entities_in(words("a z b a"), ents) == std::set<std::string>{"a", "b"});
}

TEST_CASE("response and dialogue accuracy") {
  const std::vector<EvalPair> pairs{pair("d1", 0, "x y", "x y"), pair("d1", 1, "x", "y"), pair("d2", 0, "z", "z")};
  const auto a = response_accuracy(pairs);
  CHECK(a.per_response == doctest::Approx(2.0 / 3));
  CHECK(a.per_dialog == doctest::Approx(0.5));
  const std::vector<EvalPair> right{pair("d1", 0, "x", "x")};
  CHECK(response_accuracy(right).per_response == 1.0);
  CHECK(response_accuracy(right).per_dialog == 1.0);
  CHECK(with_scenario(pairs, "s").size() == 3);
  CHECK(with_scenario(pairs, "other").empty());
}

TEST_CASE("fixing one wrong prediction never lowers f1 or accuracy (200 trials)") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> len(1, 5), word(0, 7), n(1, 8), dialog(0, 3);
  const EntitySet ents{"w0", "w1", "w2", "w3"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EvalPair> pairs;
    for (int i = n(rng); i > 0; --i) {
      EvalPair p;
      p.dialogue_id = "d" + std::to_string(dialog(rng));
      p.turn_id = static_cast<std::size_t>(i);
      p.scenario = "s";
      for (int k = len(rng); k > 0; --k) p.generated.push_back("w" + std::to_string(word(rng)));
      for (int k = len(rng); k > 0; --k) p.gold.push_back("w" + std::to_string(word(rng)));
      pairs.push_back(p);
    }
    const double f1 = entity_f1(pairs, ents).micro();
    const auto acc = response_accuracy(pairs);
    auto fixed = pairs;
    auto& target = fixed[std::uniform_int_distribution<std::size_t>(0, fixed.size() - 1)(rng)];
    target.generated = target.gold;
    CHECK(entity_f1(fixed, ents).micro() >= f1);
    CHECK(response_accuracy(fixed).per_response >= acc.per_response);
    CHECK(response_accuracy(fixed).per_dialog >= acc.per_dialog);
  }
}
