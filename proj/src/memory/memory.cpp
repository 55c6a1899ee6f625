#include "hmn/memory/memory.hpp"

#include "hmn/errors.hpp"

namespace hmn::memory {

namespace {

template <typename T>
std::vector<Var> tagged_inputs(Tape<T>& tape, ParamId embedding, std::span<const TokenIds> history) {
  const Var table = tape.param(embedding);
  std::vector<Var> out;
  out.reserve(history.size());
  for (const auto& ids : history) {
    const Var parts[] = {tape.row_select(table, ids.token), tape.row_select(table, ids.turn),
                         tape.row_select(table, ids.speaker)};
    out.push_back(tape.sum(parts));
  }
  return out;
}

}  // namespace

template <typename T>
Var gate_step(Tape<T>& tape, const GateParams& gate, Var v, Var state) {
  const Var w1 = tape.param(gate.w1), w2 = tape.param(gate.w2), w3 = tape.param(gate.w3);
  const Var w4 = tape.param(gate.w4), w5 = tape.param(gate.w5), w6 = tape.param(gate.w6);
  const Var b1 = tape.param(gate.b1), b2 = tape.param(gate.b2), b3 = tape.param(gate.b3);
  const Var r = tape.sigmoid(tape.add(tape.add(tape.matvec(w1, v), tape.matvec(w2, state)), b1));
  const Var z = tape.sigmoid(tape.add(tape.add(tape.matvec(w3, v), tape.matvec(w4, state)), b2));
  const Var e = tape.tanh(tape.add(tape.matvec(w5, v), tape.mul(r, tape.add(tape.matvec(w6, state), b3))));
  // (1 - z) e + z n  ==  e + z (n - e)
  return tape.add(e, tape.mul(z, tape.sub(state, e)));
}

template <typename T>
std::vector<Var> run_gate(Tape<T>& tape, const GateParams& gate, std::span<const Var> inputs, std::size_t hidden,
                          bool reverse) {
  std::vector<Var> states(inputs.size());
  Var state = tape.constant(num::Array<T>({hidden}));
  for (std::size_t step = 0; step < inputs.size(); ++step) {
    const std::size_t t = reverse ? inputs.size() - 1 - step : step;
    state = gate_step(tape, gate, inputs[t], state);
    states[t] = state;
  }
  return states;
}

template <typename T>
BuiltMemory build_context_aware(Tape<T>& tape, const MemoryParams& params, std::span<const TokenIds> history) {
  if (history.empty()) throw ContractError("context-aware memory needs a non-empty history");
  if (params.forward.size() != params.history_embeddings.size() ||
      params.backward.size() != params.history_embeddings.size()) {
    throw ContractError("context-aware memory needs gating weights for every level");
  }
  BuiltMemory mem;
  mem.slots = history.size();
  for (std::size_t level = 0; level < params.history_embeddings.size(); ++level) {
    const auto inputs = tagged_inputs(tape, params.history_embeddings[level], history);
    const std::size_t hidden = tape.value(tape.param(params.forward[level].b1)).size();
    const auto fwd = run_gate(tape, params.forward[level], std::span<const Var>(inputs), hidden, false);
    const auto bwd = run_gate(tape, params.backward[level], std::span<const Var>(inputs), hidden, true);
    std::vector<Var> slots;
    slots.reserve(history.size());
    for (std::size_t t = 0; t < history.size(); ++t) slots.push_back(tape.concat(fwd[t], bwd[t]));
    mem.levels.push_back(tape.stack_rows(slots));
  }
  return mem;
}

template <typename T>
BuiltMemory build_context_free(Tape<T>& tape, const MemoryParams& params, std::span<const TripleIds> kb,
                               std::size_t sentinel_index) {
  BuiltMemory mem;
  mem.slots = kb.size() + 1;
  for (const auto embedding : params.kb_embeddings) {
    const Var table = tape.param(embedding);
    std::vector<Var> slots;
    slots.reserve(kb.size() + 1);
    for (const auto& triple : kb) {
      const Var parts[] = {tape.row_select(table, triple.subject), tape.row_select(table, triple.relation),
                           tape.row_select(table, triple.object)};
      slots.push_back(tape.sum(parts));
    }
    slots.push_back(tape.row_select(table, sentinel_index));
    mem.levels.push_back(tape.stack_rows(slots));
  }
  return mem;
}

template <typename T>
BuiltMemory build_cfo_history(Tape<T>& tape, const MemoryParams& params, std::span<const TokenIds> history) {
  if (history.empty()) throw ContractError("history memory needs a non-empty history");
  BuiltMemory mem;
  mem.slots = history.size();
  for (const auto embedding : params.history_embeddings) {
    const auto inputs = tagged_inputs(tape, embedding, history);
    mem.levels.push_back(tape.stack_rows(inputs));
  }
  return mem;
}

template <typename T>
BuiltMemory build_history(Tape<T>& tape, const MemoryParams& params, std::span<const TokenIds> history) {
  return params.context_free_history ? build_cfo_history(tape, params, history)
                                     : build_context_aware(tape, params, history);
}

template <typename T>
Hop hop(Tape<T>& tape, const BuiltMemory& memory, std::size_t k, Var query) {
  if (k < 1 || k > memory.hops()) {
    throw ContractError("hop index " + std::to_string(k) + " outside 1.." + std::to_string(memory.hops()));
  }
  Hop h;
  h.logits = tape.matvec(memory.levels[k - 1], query);
  h.attention = tape.softmax(h.logits);
  h.readout = tape.matvec_t(memory.levels[k], h.attention);
  h.output = tape.add(query, h.readout);
  return h;
}

template <typename T>
std::vector<Hop> run_hops(Tape<T>& tape, const BuiltMemory& memory, Var query) {
  std::vector<Hop> hops;
  hops.reserve(memory.hops());
  for (std::size_t k = 1; k <= memory.hops(); ++k) {
    hops.push_back(hop(tape, memory, k, query));
    query = hops.back().output;
  }
  return hops;
}

template <typename T>
HmnResult query_hmn(Tape<T>& tape, const BuiltMemory& history, const BuiltMemory& kb, Var query) {
  HmnResult r;
  r.history_hops = run_hops(tape, history, query);
  r.kb_hops = run_hops(tape, kb, r.history_output());
  return r;
}

#define HMN_INSTANTIATE(T)                                                                                  \
  template Var gate_step<T>(Tape<T>&, const GateParams&, Var, Var);                                          \
  template std::vector<Var> run_gate<T>(Tape<T>&, const GateParams&, std::span<const Var>, std::size_t, bool); \
  template BuiltMemory build_context_aware<T>(Tape<T>&, const MemoryParams&, std::span<const TokenIds>);     \
  template BuiltMemory build_context_free<T>(Tape<T>&, const MemoryParams&, std::span<const TripleIds>,      \
                                             std::size_t);                                                  \
  template BuiltMemory build_cfo_history<T>(Tape<T>&, const MemoryParams&, std::span<const TokenIds>);       \
  template BuiltMemory build_history<T>(Tape<T>&, const MemoryParams&, std::span<const TokenIds>);           \
  template Hop hop<T>(Tape<T>&, const BuiltMemory&, std::size_t, Var);                                      \
  template std::vector<Hop> run_hops<T>(Tape<T>&, const BuiltMemory&, Var);                                 \
  template HmnResult query_hmn<T>(Tape<T>&, const BuiltMemory&, const BuiltMemory&, Var);

HMN_INSTANTIATE(float)
HMN_INSTANTIATE(double)
HMN_INSTANTIATE(long double)

#undef HMN_INSTANTIATE

}  // namespace hmn::memory
