#include "hmn/model/model.hpp"

#include <algorithm>
#include <cmath>

#include "hmn/errors.hpp"

namespace hmn::model {

using corpus::Vocabulary;

std::string_view source_tag(Source s) {
  switch (s) {
    case Source::History: return "his";
    case Source::KB: return "kb";
    case Source::Vocab: return "vocab";
  }
  return "vocab";
}

EncodedSample encode_sample(const corpus::DialogueSample& sample, const Vocabulary& vocab) {
  if (sample.history.empty() || !sample.history.back().is_sentinel()) {
    throw ContractError("encode_sample: history must end with the sentinel");
  }
  if (sample.response.empty()) throw ContractError("encode_sample: empty response");
  if (sample.his_copy_labels.size() != sample.response.size() ||
      sample.kb_copy_labels.size() != sample.response.size()) {
    throw ContractError("encode_sample: copy labels do not cover the response");
  }
  EncodedSample out;
  for (const auto& t : sample.history) {
    const std::size_t token = t.is_sentinel() ? Vocabulary::kSentinelIndex : vocab.index(t.token);
    out.history.push_back({token, vocab.index(corpus::turn_tag(t.turn)), vocab.index(corpus::speaker_tag(t.speaker))});
    out.history_words.push_back(t.token);
  }
  for (const auto& k : sample.kb) {
    out.kb.push_back({vocab.index(k.subject), vocab.index(k.relation), vocab.index(k.object)});
    out.kb_objects.push_back(k.object);
  }
  for (const auto& w : sample.response) out.response.push_back(vocab.index(w));
  out.response_words = sample.response;
  out.his_labels = sample.his_copy_labels;
  out.kb_labels = sample.kb_copy_labels;
  return out;
}

namespace {

template <typename T>
std::size_t argmax(std::span<const T> p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

}  // namespace

template <typename T>
Selection select_word(std::span<const T> p_vocab, std::span<const T> p_his, std::span<const T> p_kb,
                      const Vocabulary& vocab, std::span<const std::string> history_words,
                      std::span<const std::string> kb_objects) {
  if (p_his.size() != history_words.size() || p_kb.size() != kb_objects.size() + 1 || p_vocab.empty()) {
    throw ContractError("select_word: distribution sizes do not match the memories");
  }
  const std::size_t a = argmax(p_his);
  const std::size_t b = argmax(p_kb);
  const bool his_real = a + 1 < p_his.size();
  const bool kb_real = b + 1 < p_kb.size();
  if (his_real && (!kb_real || p_his[a] >= p_kb[b])) return {history_words[a], Source::History, a};
  if (kb_real) return {kb_objects[b], Source::KB, b};
  const std::size_t v = argmax(p_vocab);
  return {vocab.word(v), Source::Vocab, v};
}

template <typename T>
EncoderState encode(Tape<T>& tape, const HMNParameters<T>& params, const EncodedSample& sample) {
  EncoderState out;
  out.history = memory::build_history(tape, params.memory, std::span(sample.history));
  out.kb = memory::build_context_free(tape, params.memory, std::span(sample.kb), Vocabulary::kSentinelIndex);
  out.hops = memory::run_hops(tape, out.history, tape.param(params.query));
  out.context = out.hops.back().output;
  return out;
}

template <typename T>
StepGraph decode_step(Tape<T>& tape, const HMNParameters<T>& params, const EncoderState& encoded, Var prev_hidden,
                      std::size_t prev_word, ActivationDropout dropout) {
  if (prev_word >= params.config.vocab_size) throw ContractError("decode_step: previous word outside vocabulary");
  Var input = tape.row_select(tape.param(params.decoder_embedding()), prev_word);
  if (dropout.rate > 0.0) {
    if (!dropout.rng) throw ContractError("decode_step: activation dropout needs a random source");
    Array<T> mask({params.config.dim});
    std::bernoulli_distribution keep(1.0 - dropout.rate);
    for (auto& m : mask.values()) m = keep(*dropout.rng) ? static_cast<T>(1.0 / (1.0 - dropout.rate)) : T(0);
    input = tape.mul(input, tape.constant(std::move(mask)));
  }
  StepGraph step;
  step.hidden = memory::gate_step(tape, params.controller, input, prev_hidden);
  step.hmn = memory::query_hmn(tape, encoded.history, encoded.kb, step.hidden);
  step.vocab_logits = tape.matvec(tape.param(params.w7), tape.concat(step.hidden, step.oc1()));
  step.p_vocab = tape.softmax(step.vocab_logits);
  return step;
}

template <typename T>
OutputDistributions<T> distributions(const Tape<T>& tape, const StepGraph& step) {
  return {tape.value(step.p_vocab), tape.value(step.p_his()), tape.value(step.p_kb()), tape.value(step.oc1())};
}

EncodedSample mask_inputs(const EncodedSample& sample, double unk_rate, std::mt19937_64& rng) {
  EncodedSample out = sample;
  if (unk_rate <= 0.0) return out;
  std::bernoulli_distribution drop(unk_rate);
  for (auto& t : out.history) {
    if (t.token != Vocabulary::kSentinelIndex && drop(rng)) t.token = Vocabulary::kUnkIndex;
  }
  for (auto& k : out.kb) {
    if (drop(rng)) k.subject = Vocabulary::kUnkIndex;
    if (drop(rng)) k.object = Vocabulary::kUnkIndex;
  }
  return out;
}

template <typename T>
Var joint_loss(Tape<T>& tape, const HMNParameters<T>& params, const Vocabulary& vocab, const EncodedSample& sample,
               const LossOptions& options) {
  const std::size_t steps = sample.response.size();
  if (steps == 0) throw ContractError("joint_loss: empty response");
  const bool random = options.teacher_forcing < 1.0 || options.unk_rate > 0.0 || options.activation_dropout > 0.0;
  if (random && !options.rng) throw ContractError("joint_loss: random options need a random source");
  for (auto id : sample.response) {
    if (id >= params.config.vocab_size) throw ContractError("joint_loss: gold word outside vocabulary");
  }

  const EncodedSample input = options.unk_rate > 0.0 ? mask_inputs(sample, options.unk_rate, *options.rng) : sample;
  const EncoderState encoded = encode(tape, params, input);
  std::bernoulli_distribution use_gold(std::clamp(options.teacher_forcing, 0.0, 1.0));
  std::bernoulli_distribution mask_word(std::clamp(options.unk_rate, 0.0, 1.0));

  std::vector<Var> terms;
  terms.reserve(3 * steps);
  Var hidden = encoded.context;
  std::size_t prev = Vocabulary::kSosIndex;
  for (std::size_t t = 0; t < steps; ++t) {
    const StepGraph step =
        decode_step(tape, params, encoded, hidden, prev, ActivationDropout{options.activation_dropout, options.rng});
    terms.push_back(tape.pick(tape.log_softmax(step.vocab_logits), sample.response[t]));
    terms.push_back(tape.pick(tape.log_softmax(step.hmn.his().logits), sample.his_labels[t]));
    terms.push_back(tape.pick(tape.log_softmax(step.hmn.kb().logits), sample.kb_labels[t]));
    hidden = step.hidden;

    const bool gold = options.teacher_forcing >= 1.0 || use_gold(*options.rng);
    if (gold) {
      prev = sample.response[t];
      if (options.unk_rate > 0.0 && mask_word(*options.rng)) prev = Vocabulary::kUnkIndex;
    } else {
      const auto sel = select_word<T>(tape.value(step.p_vocab).values(), tape.value(step.p_his()).values(),
                                      tape.value(step.p_kb()).values(), vocab, input.history_words, input.kb_objects);
      prev = vocab.index(sel.word);
    }
  }
  return tape.scale(tape.sum(terms), T(-1) / static_cast<T>(steps));
}

template <typename T>
Generation generate(const HMNParameters<T>& params, const Vocabulary& vocab, const EncodedSample& sample,
                    std::size_t max_len) {
  if (max_len < 1) throw ContractError("generate: max_len must be at least 1");
  Tape<T> tape(params.store);
  const EncoderState encoded = encode(tape, params, sample);
  Generation out;
  out.truncated = true;
  Var hidden = encoded.context;
  std::size_t prev = Vocabulary::kSosIndex;
  for (std::size_t t = 0; t < max_len; ++t) {
    const StepGraph step = decode_step(tape, params, encoded, hidden, prev);
    const auto sel = select_word<T>(tape.value(step.p_vocab).values(), tape.value(step.p_his()).values(),
                                    tape.value(step.p_kb()).values(), vocab, sample.history_words, sample.kb_objects);
    if (sel.source == Source::Vocab && sel.position == Vocabulary::kEosIndex) {
      out.truncated = false;
      break;
    }
    out.words.push_back(sel.word);
    out.sources.push_back(sel.source);
    hidden = step.hidden;
    prev = vocab.index(sel.word);
  }
  return out;
}

#define HMN_INSTANTIATE(T)                                                                                     \
  template Selection select_word<T>(std::span<const T>, std::span<const T>, std::span<const T>,               \
                                    const Vocabulary&, std::span<const std::string>,                           \
                                    std::span<const std::string>);                                             \
  template EncoderState encode<T>(Tape<T>&, const HMNParameters<T>&, const EncodedSample&);                    \
  template StepGraph decode_step<T>(Tape<T>&, const HMNParameters<T>&, const EncoderState&, Var, std::size_t, \
                                    ActivationDropout);                                                        \
  template OutputDistributions<T> distributions<T>(const Tape<T>&, const StepGraph&);                          \
  template Var joint_loss<T>(Tape<T>&, const HMNParameters<T>&, const Vocabulary&, const EncodedSample&,       \
                             const LossOptions&);                                                              \
  template Generation generate<T>(const HMNParameters<T>&, const Vocabulary&, const EncodedSample&, std::size_t);

HMN_INSTANTIATE(float)
HMN_INSTANTIATE(double)
HMN_INSTANTIATE(long double)

#undef HMN_INSTANTIATE

}  // namespace hmn::model
