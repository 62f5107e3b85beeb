#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "snakesynth/spectral_image.hpp"

namespace snakesynth {

/// Mono audio in [-1,1].
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = 16000;
};

class AudioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Analysis settings shared by feature extraction and inversion.
struct AudioConfig {
  int sample_rate = 16000;
  std::size_t n_fft = 512;
  std::size_t hop = 256;
  std::size_t n_mels = 64;
  std::size_t n_frames = 64;
  double fmin = 40.0;
  double fmax = 7600.0;
  double floor_db = -80.0;
  double ceiling_db = 0.0;

  /// Samples per clip: (n_frames - 1) * hop + n_fft.
  std::size_t clip_length() const { return (n_frames - 1) * hop + n_fft; }
  std::size_t bins() const { return n_fft / 2 + 1; }
  std::string canonical() const;
  std::uint64_t hash() const;
};

using ComplexMatrix = Eigen::MatrixXcd;

/// Periodic Hann window, 0.5 * (1 - cos(2 pi n / size)).
std::vector<double> analysis_window(std::size_t size);

/// Hann-windowed short-time Fourier transform without padding.
/// Result is [frames x (n_fft/2+1)], frames = 1 + (len - n_fft) / hop.
ComplexMatrix stft(std::span<const double> samples, std::size_t n_fft, std::size_t hop);
ComplexMatrix stft(std::span<const float> samples, std::size_t n_fft, std::size_t hop);

/// Least-squares inverse of stft(): windowed overlap-add divided by the summed
/// squared window. Samples no frame covers with non-zero weight are 0.
std::vector<double> istft(const ComplexMatrix& spectrum, std::size_t n_fft, std::size_t hop);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

struct MelFilterbank {
  /// [n_mels x (n_fft/2+1)], non-negative.
  Eigen::MatrixXd weights;
  std::vector<double> centers_hz;
  double fmin = 0.0;
  double fmax = 0.0;
  std::size_t n_fft = 0;
  int sample_rate = 0;
};

/// Triangular filters on the Mel axis with centers equally spaced in Mel between fmin and fmax.
MelFilterbank build_filterbank(std::size_t n_mels, std::size_t n_fft, int sample_rate, double fmin, double fmax);
MelFilterbank build_filterbank(const AudioConfig& config);

/// Mel power spectrogram [n_mels x frames].
Eigen::MatrixXd mel_power(std::span<const float> samples, const AudioConfig& config, const MelFilterbank& fb);

/// dB relative to max, floored, mapped affinely [floor_db, ceiling_db] -> [-1, 1].
SpectralImage encode_mel_power(const Eigen::MatrixXd& mel, const AudioConfig& config);

/// Audio whose length yields exactly n_frames frames -> 64 x 64 image.
/// All-zero input yields an all -1 image flagged as silent.
SpectralImage mel_image(const AudioBuffer& audio, const AudioConfig& config, const MelFilterbank& fb);

/// Center-crops longer input, zero-pads shorter input symmetrically.
std::vector<float> fit_to_length(std::span<const float> samples, std::size_t length);

/// Windowed-sinc sample-rate conversion.
std::vector<float> resample(std::span<const float> samples, int from_rate, int to_rate);

/// A deterministic harmonic tone used as a stand-in training corpus.
/// Tone `index` has fundamental 110 * 2^(index/4) Hz, so consecutive tones are a minor third apart.
AudioBuffer synthetic_tone(std::size_t index, const AudioConfig& config);
double synthetic_tone_frequency(std::size_t index);

}  // namespace snakesynth
