#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "snakesynth/audio.hpp"

namespace snakesynth {

class WavError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class WavEncoding { pcm16, float32 };

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  WavEncoding encoding = WavEncoding::pcm16;
};

/// Reads RIFF/WAVE with 16-bit PCM or 32-bit float samples. Multi-channel input
/// is averaged to mono.
AudioBuffer read_wav(const std::filesystem::path& path, WavInfo* info = nullptr);
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes, WavInfo* info = nullptr);

std::vector<std::uint8_t> encode_wav(const AudioBuffer& audio, WavEncoding encoding);
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio, WavEncoding encoding = WavEncoding::float32);

/// Sample -> 16-bit PCM: clamp to [-1,1], scale by 32767, round to nearest.
std::int16_t to_pcm16(double sample);

}  // namespace snakesynth
