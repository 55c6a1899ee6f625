#include "hmn/model/parameters.hpp"

#include <random>
#include <string>
#include <vector>

#include "hmn/errors.hpp"

namespace hmn::model {

void ModelConfig::validate() const {
  if (dim == 0 || dim % 2 != 0) throw InputError("model dimension must be a positive even number");
  if (history_hops < 1 || kb_hops < 1) throw InputError("hop counts must be at least 1");
  if (vocab_size < 5) throw InputError("vocabulary is missing its reserved tokens");
}

namespace {

struct Entry {
  std::string name;
  num::Shape shape;
  bool bias;
};

/// Parameter layout in registration order. Shapes follow the config.
std::vector<Entry> layout(const ModelConfig& c) {
  std::vector<Entry> out;
  const std::size_t d = c.dim, h = c.dim / 2, v = c.vocab_size;
  auto gate = [&](const std::string& prefix, std::size_t in, std::size_t hidden) {
    for (const char* w : {"W1", "W3", "W5"}) out.push_back({prefix + "." + w, {hidden, in}, false});
    for (const char* w : {"W2", "W4", "W6"}) out.push_back({prefix + "." + w, {hidden, hidden}, false});
    for (const char* b : {"b1", "b2", "b3"}) out.push_back({prefix + "." + b, {hidden}, true});
  };
  for (std::size_t k = 1; k <= c.history_hops + 1; ++k) {
    out.push_back({"mem.C" + std::to_string(k), {v, d}, false});
    if (!c.cfo) {
      gate("mem.fwd" + std::to_string(k), d, h);
      gate("mem.bwd" + std::to_string(k), d, h);
    }
  }
  for (std::size_t k = 1; k <= c.kb_hops + 1; ++k) out.push_back({"mem.Ckb" + std::to_string(k), {v, d}, false});
  out.push_back({"enc.query", {d}, false});
  gate("ctrl", d, d);
  out.push_back({"out.W7", {v, 2 * d}, false});
  return out;
}

template <typename Store>
memory::GateParams gate_ids(const Store& store, const std::string& prefix) {
  memory::GateParams g;
  g.w1 = store.find(prefix + ".W1");
  g.w2 = store.find(prefix + ".W2");
  g.w3 = store.find(prefix + ".W3");
  g.w4 = store.find(prefix + ".W4");
  g.w5 = store.find(prefix + ".W5");
  g.w6 = store.find(prefix + ".W6");
  g.b1 = store.find(prefix + ".b1");
  g.b2 = store.find(prefix + ".b2");
  g.b3 = store.find(prefix + ".b3");
  return g;
}

}  // namespace

template <typename T>
HMNParameters<T> init_parameters(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-0.1, 0.1);
  ParamStore<T> store;
  for (const auto& entry : layout(config)) {
    num::Array<T> value(entry.shape);
    if (!entry.bias) {
      for (auto& x : value.values()) x = static_cast<T>(uniform(rng));
    }
    store.add(entry.name, std::move(value));
  }
  return bind_parameters<T>(config, std::move(store));
}

template <typename T>
HMNParameters<T> bind_parameters(const ModelConfig& config, ParamStore<T> store) {
  config.validate();
  const auto entries = layout(config);
  if (entries.size() != store.size()) {
    throw InputError("parameter count " + std::to_string(store.size()) + " does not match the model layout (" +
                     std::to_string(entries.size()) + ")");
  }
  for (const auto& entry : entries) {
    if (!store.contains(entry.name)) throw InputError("missing parameter " + entry.name);
    const auto& shape = store.value(store.find(entry.name)).shape();
    if (shape != entry.shape) {
      throw InputError("parameter " + entry.name + " has shape " + num::shape_string(shape) + ", expected " +
                       num::shape_string(entry.shape));
    }
  }

  HMNParameters<T> p;
  p.config = config;
  p.store = std::move(store);
  for (std::size_t k = 1; k <= config.history_hops + 1; ++k) {
    const auto level = std::to_string(k);
    p.memory.history_embeddings.push_back(p.store.find("mem.C" + level));
    if (!config.cfo) {
      p.memory.forward.push_back(gate_ids(p.store, "mem.fwd" + level));
      p.memory.backward.push_back(gate_ids(p.store, "mem.bwd" + level));
    }
  }
  for (std::size_t k = 1; k <= config.kb_hops + 1; ++k) {
    p.memory.kb_embeddings.push_back(p.store.find("mem.Ckb" + std::to_string(k)));
  }
  p.memory.context_free_history = config.cfo;
  p.query = p.store.find("enc.query");
  p.controller = gate_ids(p.store, "ctrl");
  p.w7 = p.store.find("out.W7");
  return p;
}

template HMNParameters<float> init_parameters<float>(const ModelConfig&, std::uint64_t);
template HMNParameters<double> init_parameters<double>(const ModelConfig&, std::uint64_t);
template HMNParameters<long double> init_parameters<long double>(const ModelConfig&, std::uint64_t);
template HMNParameters<float> bind_parameters<float>(const ModelConfig&, ParamStore<float>);
template HMNParameters<double> bind_parameters<double>(const ModelConfig&, ParamStore<double>);
template HMNParameters<long double> bind_parameters<long double>(const ModelConfig&, ParamStore<long double>);

}  // namespace hmn::model
