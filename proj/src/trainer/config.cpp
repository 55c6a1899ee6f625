#include "hmn/trainer/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hmn/errors.hpp"

namespace hmn::trainer {

using nlohmann::json;

void TrainConfig::validate() const {
  if (dim == 0 || dim % 2 != 0) throw InputError("dim must be a positive even number");
  if (history_hops < 1 || kb_hops < 1) throw InputError("hops must be at least 1");
  for (auto [name, rate] : {std::pair{"dropout", dropout}, std::pair{"activation_dropout", activation_dropout},
                            std::pair{"learning_rate", learning_rate}}) {
    if (!(rate >= 0.0 && rate < 1.0)) throw InputError(std::string(name) + " must lie in [0, 1)");
  }
  if (!(teacher_forcing >= 0.0 && teacher_forcing <= 1.0)) throw InputError("teacher_forcing must lie in [0, 1]");
  if (batch_size < 1) throw InputError("batch_size must be at least 1");
  if (epochs < 1) throw InputError("epochs must be at least 1");
  if (!(clip_norm > 0.0)) throw InputError("clip_norm must be positive");
  if (workers < 1) throw InputError("workers must be at least 1");
  if (max_decode_len < 1) throw InputError("max_decode_len must be at least 1");
}

model::ModelConfig TrainConfig::model_config(std::size_t vocab_size) const {
  return model::ModelConfig{vocab_size, dim, history_hops, kb_hops, cfo};
}

std::string TrainConfig::to_json() const {
  json j = {{"dim", dim},
            {"history_hops", history_hops},
            {"kb_hops", kb_hops},
            {"dropout", dropout},
            {"activation_dropout", activation_dropout},
            {"learning_rate", learning_rate},
            {"batch_size", batch_size},
            {"epochs", epochs},
            {"patience", patience},
            {"teacher_forcing", teacher_forcing},
            {"seed", seed},
            {"cfo", cfo},
            {"clip_norm", clip_norm},
            {"workers", workers},
            {"max_decode_len", max_decode_len},
            {"train_path", train_path},
            {"dev_path", dev_path}};
  return j.dump(2);
}

void TrainConfig::merge_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("config: top level must be an object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& key = it.key();
      const auto& v = it.value();
      if (key == "dim") dim = v.get<std::size_t>();
      else if (key == "hops") history_hops = kb_hops = v.get<std::size_t>();
      else if (key == "history_hops") history_hops = v.get<std::size_t>();
      else if (key == "kb_hops") kb_hops = v.get<std::size_t>();
      else if (key == "dropout") dropout = v.get<double>();
      else if (key == "activation_dropout") activation_dropout = v.get<double>();
      else if (key == "learning_rate" || key == "lr") learning_rate = v.get<double>();
      else if (key == "batch_size") batch_size = v.get<std::size_t>();
      else if (key == "epochs") epochs = v.get<std::size_t>();
      else if (key == "patience") patience = v.get<std::size_t>();
      else if (key == "teacher_forcing") teacher_forcing = v.get<double>();
      else if (key == "seed") seed = v.get<std::uint64_t>();
      else if (key == "cfo") cfo = v.get<bool>();
      else if (key == "clip_norm") clip_norm = v.get<double>();
      else if (key == "workers") workers = v.get<std::size_t>();
      else if (key == "max_decode_len") max_decode_len = v.get<std::size_t>();
      else if (key == "train_path") train_path = v.get<std::string>();
      else if (key == "dev_path") dev_path = v.get<std::string>();
      else throw InputError("config: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("config: bad value type: ") + e.what());
  }
}

TrainConfig TrainConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  TrainConfig c;
  c.merge_json(buffer.str());
  return c;
}

}  // namespace hmn::trainer
