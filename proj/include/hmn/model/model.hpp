#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hmn/corpus/types.hpp"
#include "hmn/corpus/vocabulary.hpp"
#include "hmn/memory/memory.hpp"
#include "hmn/model/parameters.hpp"
#include "hmn/numerics/tape.hpp"

namespace hmn::model {

using num::Array;
using num::Tape;
using num::Var;

/// A DialogueSample mapped to vocabulary indices (unknown words -> UNK),
/// keeping the surface words that copying can emit.
struct EncodedSample {
  std::vector<memory::TokenIds> history;
  std::vector<memory::TripleIds> kb;
  std::vector<std::size_t> response;
  std::vector<std::size_t> his_labels;
  std::vector<std::size_t> kb_labels;
  std::vector<std::string> history_words;
  std::vector<std::string> kb_objects;
  std::vector<std::string> response_words;
};

EncodedSample encode_sample(const corpus::DialogueSample& sample, const corpus::Vocabulary& vocab);

enum class Source { History, KB, Vocab };
std::string_view source_tag(Source s);

struct Selection {
  std::string word;
  Source source = Source::Vocab;
  /// Index into the distribution the word came from.
  std::size_t position = 0;
};

/// Chooses between the three distributions. With a = argmax P_his and
/// b = argmax P_kb (last position = sentinel): both real -> the larger
/// probability wins (history on ties); one real -> that one; neither ->
/// argmax P_vocab. KB picks surface the triple's object. Argmax ties go to
/// the lowest index.
template <typename T>
Selection select_word(std::span<const T> p_vocab, std::span<const T> p_his, std::span<const T> p_kb,
                      const corpus::Vocabulary& vocab, std::span<const std::string> history_words,
                      std::span<const std::string> kb_objects);

template <typename T>
struct OutputDistributions {
  Array<T> vocab;
  Array<T> history;
  Array<T> kb;
  Array<T> oc1;
};

struct EncoderState {
  memory::BuiltMemory history;
  memory::BuiltMemory kb;
  std::vector<memory::Hop> hops;
  Var context;
};

/// Builds both memories once and queries the history memory with the
/// trainable encoder vector; the final hop output is the context c.
template <typename T>
EncoderState encode(Tape<T>& tape, const HMNParameters<T>& params, const EncodedSample& sample);

struct StepGraph {
  Var hidden;
  memory::HmnResult hmn;
  Var vocab_logits;
  Var p_vocab;

  Var p_his() const { return hmn.his().attention; }
  Var p_kb() const { return hmn.kb().attention; }
  Var oc1() const { return hmn.first_history_output(); }
};

/// Optional inverted dropout on the controller input; off when rate is 0.
struct ActivationDropout {
  double rate = 0.0;
  std::mt19937_64* rng = nullptr;
};

/// h_t = GRU(E(g_{t-1}), h_{t-1}); query the memories with h_t;
/// P_vocab = softmax(W7 [h_t, oc1]).
template <typename T>
StepGraph decode_step(Tape<T>& tape, const HMNParameters<T>& params, const EncoderState& encoded, Var prev_hidden,
                      std::size_t prev_word, ActivationDropout dropout = {});

template <typename T>
OutputDistributions<T> distributions(const Tape<T>& tape, const StepGraph& step);

struct LossOptions {
  /// Probability of feeding the gold previous word rather than the model's pick.
  double teacher_forcing = 1.0;
  /// Probability of replacing each input word with UNK.
  double unk_rate = 0.0;
  double activation_dropout = 0.0;
  /// Required whenever any of the draws above can be random.
  std::mt19937_64* rng = nullptr;
};

/// Applies UNK masking to history words, KB subjects and objects.
EncodedSample mask_inputs(const EncodedSample& sample, double unk_rate, std::mt19937_64& rng);

/// -(1/T) sum_t [log P_vocab(gold) + log P_his(his label) + log P_kb(kb label)].
template <typename T>
Var joint_loss(Tape<T>& tape, const HMNParameters<T>& params, const corpus::Vocabulary& vocab,
               const EncodedSample& sample, const LossOptions& options = {});

struct Generation {
  std::vector<std::string> words;
  std::vector<Source> sources;
  bool truncated = false;
};

/// Greedy decoding until EOS or max_len words; EOS is not included.
template <typename T>
Generation generate(const HMNParameters<T>& params, const corpus::Vocabulary& vocab, const EncodedSample& sample,
                    std::size_t max_len);

}  // namespace hmn::model
