#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "hmn/model/parameters.hpp"

namespace hmn::trainer {

struct TrainConfig {
  std::size_t dim = 128;
  std::size_t history_hops = 1;
  std::size_t kb_hops = 1;
  /// Rate at which input words are replaced by UNK during training.
  double dropout = 0.1;
  /// Inverted dropout on the controller input; off by default.
  double activation_dropout = 0.0;
  double learning_rate = 0.001;
  std::size_t batch_size = 64;
  std::size_t epochs = 100;
  /// Epochs without a dev per-response accuracy gain before stopping.
  std::size_t patience = 10;
  double teacher_forcing = 0.5;
  std::uint64_t seed = 7;
  bool cfo = false;
  double clip_norm = 10.0;
  std::size_t workers = 1;
  std::size_t max_decode_len = 30;
  std::string train_path;
  std::string dev_path;

  void validate() const;
  model::ModelConfig model_config(std::size_t vocab_size) const;

  std::string to_json() const;
  /// Keys absent from the text keep their current values; unknown keys throw.
  void merge_json(const std::string& text);
  static TrainConfig from_file(const std::filesystem::path& path);

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

}  // namespace hmn::trainer
