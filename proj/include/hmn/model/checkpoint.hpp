#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "hmn/corpus/vocabulary.hpp"
#include "hmn/model/parameters.hpp"

namespace hmn::model {

// Binary layout (little-endian):
//   "HMN1" | u32 version
//   u64 len | model config JSON
//   u64 len | free-form snapshot JSON (training config)
//   u64 n_words | n x (u64 len | bytes) | u64 vocabulary hash
//   u64 n_params | n x (u64 len | name | u32 rank | rank x u64 dim | f32 values)
inline constexpr char kCheckpointMagic[4] = {'H', 'M', 'N', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  HMNParameters<float> params;
  corpus::Vocabulary vocab;
  std::string snapshot;
};

void save_checkpoint(std::ostream& out, const HMNParameters<float>& params, const corpus::Vocabulary& vocab,
                     const std::string& snapshot = "{}");
void save_checkpoint(const std::filesystem::path& path, const HMNParameters<float>& params,
                     const corpus::Vocabulary& vocab, const std::string& snapshot = "{}");

/// Throws InputError on a bad magic, version, vocabulary hash or layout.
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const std::string& text);

}  // namespace hmn::model
