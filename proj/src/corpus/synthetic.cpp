#include "hmn/corpus/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "hmn/errors.hpp"

namespace hmn::corpus {

namespace {

constexpr const char* kGreetings[] = {"hello", "hi", "good morning"};
constexpr const char* kSystemGreeting = "hello what can i help you with today";
constexpr const char* kCuisines[] = {"italian", "french", "indian", "spanish", "british", "thai"};
constexpr const char* kLocations[] = {"rome", "paris", "london", "madrid", "bombay", "tokyo"};
constexpr const char* kAttributes[] = {"phone", "address"};

struct Restaurant {
  std::string name;
  std::string cuisine;
  std::string location;

  std::string value(const std::string& attribute) const { return name + "_" + attribute; }
};

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin() { return pick(2) == 1; }

  Restaurant restaurant(std::size_t id) {
    return {"resto_" + std::to_string(id), kCuisines[pick(std::size(kCuisines))],
            kLocations[pick(std::size(kLocations))]};
  }

  Dialogue dialogue(const Restaurant& r, std::string id, std::string scenario) {
    Dialogue d;
    d.id = std::move(id);
    d.scenario = std::move(scenario);
    d.kb = {{r.name, "r_cuisine", r.cuisine},
            {r.name, "r_location", r.location},
            {r.name, "r_phone", r.value("phone")},
            {r.name, "r_address", r.value("address")}};
    d.kb_rows = d.kb.size();

    const std::string first = kAttributes[pick(2)];
    d.turns.push_back({Speaker::User, kGreetings[pick(std::size(kGreetings))]});
    d.turns.push_back({Speaker::Sys, kSystemGreeting});
    d.turns.push_back({Speaker::User, "what is the " + first + " of " + r.name});
    d.turns.push_back({Speaker::Sys, "the " + first + " of " + r.name + " is " + r.value(first)});
    if (coin()) {
      const std::string second = first == "phone" ? "address" : "phone";
      d.turns.push_back({Speaker::User, "what about the " + second});
      d.turns.push_back({Speaker::Sys, "the " + second + " of " + r.name + " is " + r.value(second)});
    }
    return d;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

SyntheticTask generate_synthetic_task(const SyntheticConfig& config) {
  if (config.n_entities < 4) throw InputError("synthetic task needs at least 4 entities");
  if (config.n_dialogs < 1) throw InputError("synthetic task needs at least 1 dialogue");
  if (!(config.oov_fraction >= 0.0 && config.oov_fraction < 1.0)) {
    throw InputError("oov fraction must lie in [0, 1)");
  }

  Generator gen(config.seed);
  std::vector<Restaurant> known;
  std::vector<Restaurant> unseen;
  for (std::size_t i = 0; i < config.n_entities; ++i) known.push_back(gen.restaurant(i));
  for (std::size_t i = 0; i < config.n_entities; ++i) unseen.push_back(gen.restaurant(config.n_entities + i));

  SyntheticTask task;
  std::set<std::size_t> used;
  for (std::size_t i = 0; i < config.n_dialogs; ++i) {
    const std::size_t e = i < config.n_entities ? i : gen.pick(config.n_entities);
    used.insert(e);
    task.train.push_back(gen.dialogue(known[e], "train-" + std::to_string(i), kLookupScenario));
  }
  const std::vector<std::size_t> seen(used.begin(), used.end());

  const std::size_t n_dev = std::max<std::size_t>(1, config.n_dialogs / 6);
  for (std::size_t i = 0; i < n_dev; ++i) {
    task.dev.push_back(gen.dialogue(known[seen[gen.pick(seen.size())]], "dev-" + std::to_string(i), kLookupScenario));
  }

  const std::size_t n_test = std::max<std::size_t>(2, config.n_dialogs / 3);
  const auto n_oov = static_cast<std::size_t>(std::llround(config.oov_fraction * static_cast<double>(n_test)));
  for (std::size_t i = 0; i < n_test; ++i) {
    const std::string id = "test-" + std::to_string(i);
    if (i < n_test - n_oov) {
      task.test.push_back(gen.dialogue(known[seen[gen.pick(seen.size())]], id, kLookupScenario));
    } else {
      task.test.push_back(gen.dialogue(unseen[gen.pick(unseen.size())], id, kLookupOovScenario));
    }
  }

  std::set<std::string> entities;
  for (const auto* pool : {&known, &unseen}) {
    for (const auto& r : *pool) {
      entities.insert(r.name);
      entities.insert(r.value("phone"));
      entities.insert(r.value("address"));
      entities.insert(r.cuisine);
      entities.insert(r.location);
    }
  }
  task.entities.assign(entities.begin(), entities.end());
  return task;
}

}  // namespace hmn::corpus
