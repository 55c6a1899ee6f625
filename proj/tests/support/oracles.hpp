#pragma once

// Straight-line reference evaluations used to cross-check the tape.
// Deliberately naive: nested loops over std::vector, no shared code with src/.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "hmn/model/parameters.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline Mat to_mat(const hmn::num::Array<double>& a) {
  Mat m(a.rows(), Vec(a.cols()));
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) m[r][c] = a.values()[r * a.cols() + c];
  return m;
}

inline Vec to_vec(const hmn::num::Array<double>& a) { return Vec(a.values().begin(), a.values().end()); }

inline Vec matvec(const Mat& m, const Vec& x) {
  Vec out(m.size(), 0.0);
  for (std::size_t r = 0; r < m.size(); ++r)
    for (std::size_t c = 0; c < x.size(); ++c) out[r] += m[r][c] * x[c];
  return out;
}

inline Vec add(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec softmax(const Vec& z) {
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  double s = 0;
  Vec out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) s += out[i] = std::exp(z[i] - m);
  for (double& v : out) v /= s;
  return out;
}

struct Gate {
  Mat w1, w2, w3, w4, w5, w6;
  Vec b1, b2, b3;
};

inline Gate gate(const hmn::model::ParamStore<double>& s, const std::string& prefix) {
  auto m = [&](const char* n) { return to_mat(s.value(s.find(prefix + "." + n))); };
  auto v = [&](const char* n) { return to_vec(s.value(s.find(prefix + "." + n))); };
  return {m("W1"), m("W2"), m("W3"), m("W4"), m("W5"), m("W6"), v("b1"), v("b2"), v("b3")};
}

/// One GRU step written out gate by gate.
inline Vec gru(const Gate& g, const Vec& v, const Vec& n) {
  const Vec a1 = matvec(g.w1, v), a2 = matvec(g.w2, n);
  const Vec a3 = matvec(g.w3, v), a4 = matvec(g.w4, n);
  const Vec a5 = matvec(g.w5, v), a6 = matvec(g.w6, n);
  Vec out(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double r = sigmoid(a1[i] + a2[i] + g.b1[i]);
    const double z = sigmoid(a3[i] + a4[i] + g.b2[i]);
    const double e = std::tanh(a5[i] + r * (a6[i] + g.b3[i]));
    out[i] = (1.0 - z) * e + z * n[i];
  }
  return out;
}

struct Token {
  std::size_t token, turn, speaker;
};
struct Triple {
  std::size_t s, r, o;
};

/// Context-aware slots at level k (1-based): [forward state, backward state].
inline Mat history_slots(const hmn::model::ParamStore<double>& s, std::size_t k, const std::vector<Token>& h) {
  const Mat c = to_mat(s.value(s.find("mem.C" + std::to_string(k))));
  const Gate fwd = gate(s, "mem.fwd" + std::to_string(k));
  const Gate bwd = gate(s, "mem.bwd" + std::to_string(k));
  const std::size_t half = fwd.b1.size();
  std::vector<Vec> inputs;
  for (const auto& t : h) inputs.push_back(add(add(c[t.token], c[t.turn]), c[t.speaker]));
  std::vector<Vec> f(h.size()), b(h.size());
  Vec state(half, 0.0);
  for (std::size_t i = 0; i < h.size(); ++i) f[i] = state = gru(fwd, inputs[i], state);
  state.assign(half, 0.0);
  for (std::size_t i = h.size(); i-- > 0;) b[i] = state = gru(bwd, inputs[i], state);
  Mat out;
  for (std::size_t i = 0; i < h.size(); ++i) {
    Vec slot = f[i];
    slot.insert(slot.end(), b[i].begin(), b[i].end());
    out.push_back(slot);
  }
  return out;
}

/// Ungated summed-embedding history slots (the context-free ablation).
inline Mat cfo_slots(const hmn::model::ParamStore<double>& s, std::size_t k, const std::vector<Token>& h) {
  const Mat c = to_mat(s.value(s.find("mem.C" + std::to_string(k))));
  Mat out;
  for (const auto& t : h) out.push_back(add(add(c[t.token], c[t.turn]), c[t.speaker]));
  return out;
}

inline Mat kb_slots(const hmn::model::ParamStore<double>& s, std::size_t k, const std::vector<Triple>& kb,
                    std::size_t sentinel) {
  const Mat c = to_mat(s.value(s.find("mem.Ckb" + std::to_string(k))));
  Mat out;
  for (const auto& t : kb) out.push_back(add(add(c[t.s], c[t.r]), c[t.o]));
  out.push_back(c[sentinel]);
  return out;
}

struct HopResult {
  Vec attention;
  Vec output;
};

/// Standard memory-network hop: attention over `keys`, readout from `values`.
inline HopResult hop(const Mat& keys, const Mat& values, const Vec& q) {
  Vec logits(keys.size(), 0.0);
  for (std::size_t i = 0; i < keys.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) logits[i] += keys[i][j] * q[j];
  HopResult r{softmax(logits), q};
  for (std::size_t i = 0; i < keys.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) r.output[j] += r.attention[i] * values[i][j];
  return r;
}

struct Step {
  Vec hidden;
  Vec p_vocab, p_his, p_kb;
  Vec oc1;
};

/// Full encoder context plus one decoder step, composed from the pieces above.
struct Model {
  const hmn::model::HMNParameters<double>& p;
  std::vector<Mat> his;  // levels 1..K_h+1
  std::vector<Mat> kb;   // levels 1..K_kb+1

  Model(const hmn::model::HMNParameters<double>& params, const std::vector<Token>& h, const std::vector<Triple>& k,
        std::size_t sentinel)
      : p(params) {
    for (std::size_t l = 1; l <= p.config.history_hops + 1; ++l)
      his.push_back(p.config.cfo ? cfo_slots(p.store, l, h) : history_slots(p.store, l, h));
    for (std::size_t l = 1; l <= p.config.kb_hops + 1; ++l) kb.push_back(kb_slots(p.store, l, k, sentinel));
  }

  Vec context() const {
    Vec q = to_vec(p.store.value(p.store.find("enc.query")));
    for (std::size_t l = 0; l + 1 < his.size(); ++l) q = hop(his[l], his[l + 1], q).output;
    return q;
  }

  Step step(const Vec& prev_hidden, std::size_t prev_word) const {
    const Mat e = to_mat(p.store.value(p.store.find("mem.C1")));
    Step s;
    s.hidden = gru(gate(p.store, "ctrl"), e[prev_word], prev_hidden);
    Vec q = s.hidden;
    for (std::size_t l = 0; l + 1 < his.size(); ++l) {
      const auto r = hop(his[l], his[l + 1], q);
      if (l == 0) s.oc1 = r.output;
      s.p_his = r.attention;
      q = r.output;
    }
    for (std::size_t l = 0; l + 1 < kb.size(); ++l) {
      const auto r = hop(kb[l], kb[l + 1], q);
      s.p_kb = r.attention;
      q = r.output;
    }
    Vec joined = s.hidden;
    joined.insert(joined.end(), s.oc1.begin(), s.oc1.end());
    s.p_vocab = softmax(matvec(to_mat(p.store.value(p.store.find("out.W7"))), joined));
    return s;
  }

  /// Teacher-forced joint negative log-likelihood.
  double loss(const std::vector<std::size_t>& response, const std::vector<std::size_t>& his_labels,
              const std::vector<std::size_t>& kb_labels, std::size_t sos) const {
    Vec h = context();
    std::size_t prev = sos;
    double total = 0;
    for (std::size_t t = 0; t < response.size(); ++t) {
      const Step s = step(h, prev);
      total += std::log(s.p_vocab[response[t]]) + std::log(s.p_his[his_labels[t]]) + std::log(s.p_kb[kb_labels[t]]);
      h = s.hidden;
      prev = response[t];
    }
    return -total / static_cast<double>(response.size());
  }
};

using Sentence = std::vector<std::string>;

/// Textbook corpus BLEU: clipped n-gram precisions pooled over the corpus,
/// geometric mean, brevity penalty exp(1 - r/c) when c < r. Scaled to 100.
inline double bleu(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs, std::size_t max_n = 4) {
  std::vector<double> match(max_n, 0), total(max_n, 0);
  double c = 0, r = 0;
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    c += static_cast<double>(hyps[k].size());
    r += static_cast<double>(refs[k].size());
    for (std::size_t n = 1; n <= max_n; ++n) {
      std::map<Sentence, int> hc, rc;
      for (std::size_t i = 0; i + n <= hyps[k].size(); ++i) ++hc[Sentence(hyps[k].begin() + i, hyps[k].begin() + i + n)];
      for (std::size_t i = 0; i + n <= refs[k].size(); ++i) ++rc[Sentence(refs[k].begin() + i, refs[k].begin() + i + n)];
      for (const auto& [gram, count] : hc) {
        total[n - 1] += count;
        match[n - 1] += std::min(count, rc.count(gram) ? rc[gram] : 0);
      }
    }
  }
  double log_sum = 0;
  for (std::size_t n = 0; n < max_n; ++n) {
    if (match[n] == 0) return 0.0;
    log_sum += std::log(match[n] / total[n]);
  }
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return 100.0 * bp * std::exp(log_sum / static_cast<double>(max_n));
}

}  // namespace oracle
