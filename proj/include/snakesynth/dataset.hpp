#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "snakesynth/audio.hpp"
#include "snakesynth/spectral_image.hpp"

namespace snakesynth {

struct ManifestEntry {
  std::size_t index = 0;
  std::string file;
  int source_rate = 0;
  int source_channels = 0;
  std::size_t source_samples = 0;
  ImageMeta meta;
};

struct Dataset {
  AudioConfig config;
  std::vector<SpectralImage> images;
  std::vector<ManifestEntry> manifest;
  std::vector<std::string> warnings;
};

/// Resample, crop/pad to one clip and convert to a Mel image.
SpectralImage image_from_audio(const AudioBuffer& audio, const AudioConfig& config, const MelFilterbank& fb);

/// Every *.wav in `dir` (sorted by name). Unreadable files are skipped with a
/// warning; throws if none is usable.
Dataset build_dataset(const std::filesystem::path& dir, const AudioConfig& config = {});

/// One JSON object per line.
std::string manifest_text(const Dataset& dataset);
void write_manifest(const std::filesystem::path& path, const Dataset& dataset);

void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
/// Refuses files written under a different audio configuration.
Dataset load_dataset(const std::filesystem::path& path, const AudioConfig& config = {});

/// Writes the eight synthetic tones used as the desk-scale corpus.
std::vector<std::filesystem::path> write_synthetic_tones(const std::filesystem::path& dir, std::size_t count,
                                                         const AudioConfig& config = {});

}  // namespace snakesynth
