#include "hmn/model/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hmn/errors.hpp"

namespace hmn::model {

namespace {

template <typename U>
void put(std::ostream& out, U value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(U));
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename U>
U get(std::istream& in) {
  U value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(U))) throw InputError("checkpoint: truncated file");
  return value;
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint64_t>(in);
  if (n > (1ULL << 32)) throw InputError("checkpoint: implausible string length");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) throw InputError("checkpoint: truncated file");
  return s;
}

}  // namespace

std::string config_to_json(const ModelConfig& c) {
  nlohmann::json j = {{"vocab_size", c.vocab_size},
                      {"dim", c.dim},
                      {"history_hops", c.history_hops},
                      {"kb_hops", c.kb_hops},
                      {"cfo", c.cfo}};
  return j.dump();
}

ModelConfig config_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ModelConfig c;
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.dim = j.at("dim").get<std::size_t>();
    c.history_hops = j.at("history_hops").get<std::size_t>();
    c.kb_hops = j.at("kb_hops").get<std::size_t>();
    c.cfo = j.at("cfo").get<bool>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("checkpoint: bad model config: ") + e.what());
  }
}

void save_checkpoint(std::ostream& out, const HMNParameters<float>& params, const corpus::Vocabulary& vocab,
                     const std::string& snapshot) {
  if (params.config.vocab_size != vocab.size()) throw ContractError("checkpoint: vocabulary size mismatch");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put_string(out, config_to_json(params.config));
  put_string(out, snapshot);
  put<std::uint64_t>(out, vocab.size());
  for (const auto& w : vocab.words()) put_string(out, w);
  put<std::uint64_t>(out, vocab.hash());
  put<std::uint64_t>(out, params.store.size());
  for (std::size_t i = 0; i < params.store.size(); ++i) {
    const num::ParamId id{i};
    const auto& value = params.store.value(id);
    put_string(out, params.store.name(id));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(value.rank()));
    for (auto d : value.shape()) put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(value.data()), static_cast<std::streamsize>(value.size() * sizeof(float)));
  }
}

void save_checkpoint(const std::filesystem::path& path, const HMNParameters<float>& params,
                     const corpus::Vocabulary& vocab, const std::string& snapshot) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write checkpoint " + path.string());
  save_checkpoint(out, params, vocab, snapshot);
  if (!out) throw InputError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw InputError("checkpoint: bad magic (expected HMN1)");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw InputError("checkpoint: unsupported version " + std::to_string(version));
  const ModelConfig config = config_from_json(get_string(in));
  std::string snapshot = get_string(in);

  const auto n_words = get<std::uint64_t>(in);
  std::vector<std::string> words;
  words.reserve(n_words);
  for (std::uint64_t i = 0; i < n_words; ++i) words.push_back(get_string(in));
  corpus::Vocabulary vocab(std::move(words));
  const auto stored_hash = get<std::uint64_t>(in);
  if (stored_hash != vocab.hash()) throw InputError("checkpoint: vocabulary hash mismatch");
  if (vocab.size() != config.vocab_size) throw InputError("checkpoint: vocabulary size does not match config");

  ParamStore<float> store;
  const auto n_params = get<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < n_params; ++i) {
    std::string name = get_string(in);
    const auto rank = get<std::uint32_t>(in);
    if (rank < 1 || rank > 2) throw InputError("checkpoint: parameter " + name + " has bad rank");
    num::Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(get<std::uint64_t>(in));
    num::Array<float> value(shape);
    if (!in.read(reinterpret_cast<char*>(value.data()), static_cast<std::streamsize>(value.size() * sizeof(float)))) {
      throw InputError("checkpoint: truncated values for " + name);
    }
    store.add(std::move(name), std::move(value));
  }
  return Checkpoint{bind_parameters<float>(config, std::move(store)), std::move(vocab), std::move(snapshot)};
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  return load_checkpoint(in);
}

}  // namespace hmn::model
