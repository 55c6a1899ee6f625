#pragma once

#include <cstddef>
#include <cstdint>

#include "hmn/memory/memory.hpp"
#include "hmn/numerics/params.hpp"

namespace hmn::model {

using num::ParamId;
using num::ParamStore;

struct ModelConfig {
  std::size_t vocab_size = 0;
  /// Embedding, slot and controller width; must be even.
  std::size_t dim = 128;
  std::size_t history_hops = 1;
  std::size_t kb_hops = 1;
  /// Ablation: ungated, context-free history memory.
  bool cfo = false;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Every trainable array of the encoder-decoder, addressed by id into `store`.
///
/// Names: "mem.C<k>", "mem.fwd<k>.W1".."b3", "mem.bwd<k>...", "mem.Ckb<k>",
/// "enc.query", "ctrl.W1".."ctrl.b3", "out.W7". The decoder input embedding
/// is mem.C1.
template <typename T>
struct HMNParameters {
  ModelConfig config;
  ParamStore<T> store;
  memory::MemoryParams memory;
  ParamId query;
  memory::GateParams controller;
  ParamId w7;

  ParamId decoder_embedding() const { return memory.history_embeddings.front(); }
};

/// Fresh parameters: uniform(-0.1, 0.1) weights and embeddings, zero biases.
template <typename T>
HMNParameters<T> init_parameters(const ModelConfig& config, std::uint64_t seed);

/// Resolves the ids of a store that already holds every named array, checking shapes.
template <typename T>
HMNParameters<T> bind_parameters(const ModelConfig& config, ParamStore<T> store);

template <typename To, typename From>
HMNParameters<To> cast_parameters(const HMNParameters<From>& params) {
  return bind_parameters<To>(params.config, params.store.template cast<To>());
}

extern template HMNParameters<float> init_parameters<float>(const ModelConfig&, std::uint64_t);
extern template HMNParameters<double> init_parameters<double>(const ModelConfig&, std::uint64_t);
extern template HMNParameters<long double> init_parameters<long double>(const ModelConfig&, std::uint64_t);
extern template HMNParameters<float> bind_parameters<float>(const ModelConfig&, ParamStore<float>);
extern template HMNParameters<double> bind_parameters<double>(const ModelConfig&, ParamStore<double>);
extern template HMNParameters<long double> bind_parameters<long double>(const ModelConfig&, ParamStore<long double>);

}  // namespace hmn::model
