#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hmn/numerics/params.hpp"
#include "hmn/numerics/tape.hpp"

namespace hmn::memory {

using num::ParamId;
using num::Tape;
using num::Var;

/// Vocabulary indices of one tagged history position.
struct TokenIds {
  std::size_t token = 0;
  std::size_t turn = 0;
  std::size_t speaker = 0;
};

/// Vocabulary indices of one KB triple.
struct TripleIds {
  std::size_t subject = 0;
  std::size_t relation = 0;
  std::size_t object = 0;
};

/// Weights of one gated recurrence direction:
///   r = sigmoid(W1 v + W2 n + b1)
///   z = sigmoid(W3 v + W4 n + b2)
///   e = tanh(W5 v + r * (W6 n + b3))
///   n' = (1 - z) e + z n
struct GateParams {
  ParamId w1, w2, w3, w4, w5, w6;
  ParamId b1, b2, b3;
};

struct MemoryParams {
  /// C^1..C^{K_h+1}; level k+1 is hop k's output memory and hop k+1's input.
  std::vector<ParamId> history_embeddings;
  /// Per-level forward/backward recurrences; empty when context_free_history.
  std::vector<GateParams> forward;
  std::vector<GateParams> backward;
  /// C'^1..C'^{K_k+1}.
  std::vector<ParamId> kb_embeddings;
  /// Ablation: history memory built like the KB memory, without gating.
  bool context_free_history = false;

  std::size_t history_hops() const { return history_embeddings.size() - 1; }
  std::size_t kb_hops() const { return kb_embeddings.size() - 1; }
};

/// Slot matrices per level: levels[k] is [slots x d] for level k+1.
struct BuiltMemory {
  std::vector<Var> levels;
  std::size_t slots = 0;

  std::size_t hops() const { return levels.size() - 1; }
};

struct Hop {
  Var logits;
  Var attention;
  Var readout;
  Var output;
};

/// One recurrence step from `state` on input `v`.
template <typename T>
Var gate_step(Tape<T>& tape, const GateParams& gate, Var v, Var state);

/// Runs one recurrence direction over `inputs` and returns the per-position
/// states (in input order). `reverse` walks right to left.
template <typename T>
std::vector<Var> run_gate(Tape<T>& tape, const GateParams& gate, std::span<const Var> inputs, std::size_t hidden,
                          bool reverse);

/// Gated bidirectional memory over the tagged history.
template <typename T>
BuiltMemory build_context_aware(Tape<T>& tape, const MemoryParams& params, std::span<const TokenIds> history);

/// Summed-triple memory over the KB plus a final sentinel slot.
template <typename T>
BuiltMemory build_context_free(Tape<T>& tape, const MemoryParams& params, std::span<const TripleIds> kb,
                               std::size_t sentinel_index);

/// History memory for the context-free ablation: summed tag embeddings, no gating.
template <typename T>
BuiltMemory build_cfo_history(Tape<T>& tape, const MemoryParams& params, std::span<const TokenIds> history);

/// Dispatches on params.context_free_history.
template <typename T>
BuiltMemory build_history(Tape<T>& tape, const MemoryParams& params, std::span<const TokenIds> history);

/// Hop k (1-based): p = softmax(slots^k . q), u = sum_i p_i slots^{k+1}_i, o = q + u.
template <typename T>
Hop hop(Tape<T>& tape, const BuiltMemory& memory, std::size_t k, Var query);

/// Chains every hop of `memory`, feeding each output as the next query.
template <typename T>
std::vector<Hop> run_hops(Tape<T>& tape, const BuiltMemory& memory, Var query);

struct HmnResult {
  std::vector<Hop> history_hops;
  std::vector<Hop> kb_hops;

  Var output() const { return kb_hops.back().output; }
  Var history_output() const { return history_hops.back().output; }
  const Hop& his() const { return history_hops.back(); }
  const Hop& kb() const { return kb_hops.back(); }
  Var first_history_output() const { return history_hops.front().output; }
};

/// Walks the history memory from `query`, then queries the KB memory with the
/// final history output.
template <typename T>
HmnResult query_hmn(Tape<T>& tape, const BuiltMemory& history, const BuiltMemory& kb, Var query);

}  // namespace hmn::memory
