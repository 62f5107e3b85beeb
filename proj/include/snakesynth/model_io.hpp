#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "snakesynth/audio.hpp"
#include "snakesynth/gan.hpp"
#include "snakesynth/record_file.hpp"

namespace snakesynth {

inline constexpr std::array<char, 4> kModelMagic{'S', 'S', 'Y', 'N'};
inline constexpr std::uint16_t kModelVersion = 1;

/// Wrong magic, version, config hash, or a record set that does not match the architecture.
class ModelFormatError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Hash of the audio settings and of every tensor name and shape of both networks.
std::uint64_t model_config_hash(const AudioConfig& audio = {});

struct LoadedModel {
  TrainState state;
  /// True when optimizer moments, step counts, epoch, seed and loss history were stored.
  bool has_training_state = false;
};

/// Network weights and batch-norm statistics are always written. With
/// `include_training` the optimizer state and loss history come along so
/// training can resume exactly.
RecordFile model_records(const TrainState& state, const AudioConfig& audio = {}, bool include_training = true);
LoadedModel model_from_records(const RecordFile& file, const AudioConfig& audio = {});

void save_model(const std::filesystem::path& path, const TrainState& state, const AudioConfig& audio = {},
                bool include_training = true);
LoadedModel load_model(const std::filesystem::path& path, const AudioConfig& audio = {});

}  // namespace snakesynth
