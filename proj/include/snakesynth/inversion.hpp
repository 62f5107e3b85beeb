#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "snakesynth/audio.hpp"
#include "snakesynth/cell.hpp"
#include "snakesynth/spectral_image.hpp"

namespace snakesynth {

inline constexpr std::size_t kGriffinLimIterations = 60;

/// Fixed-length sound for one grid cell.
struct AudioClip {
  std::vector<float> samples;
  bool window_applied = false;
  std::optional<Cell> source_cell;
};

/// Undoes the pixel mapping: [64 bands x 64 frames] of Mel power, all >= 0.
/// Throws if the image carries no normalization meta.
Eigen::MatrixXd image_to_mel_power(const SpectralImage& img);

/// Minimum-norm least-squares inverse of the filterbank, negatives clamped to 0.
class MelInverter {
 public:
  explicit MelInverter(const MelFilterbank& fb);
  /// [bands x frames] Mel power -> [frames x bins] linear power.
  Eigen::MatrixXd to_linear(const Eigen::MatrixXd& mel_power) const;

 private:
  Eigen::MatrixXd pinv_;  // [bins x bands]
};

Eigen::MatrixXd mel_to_linear(const Eigen::MatrixXd& mel_power, const MelFilterbank& fb);

/// ||(|STFT(x)| - magnitude)||_F / ||magnitude||_F, or 0 for an all-zero magnitude.
double spectral_convergence(std::span<const double> samples, const Eigen::MatrixXd& magnitude, std::size_t n_fft,
                            std::size_t hop);

struct GriffinLimResult {
  std::vector<double> samples;
  /// Spectral convergence of the estimate after 0, 1, ..., iterations projections.
  std::vector<double> errors;
};

/// Phase retrieval from zero phase. The returned samples are scaled to peak 1
/// (unless silent); `errors` refer to the unscaled iterates.
GriffinLimResult griffin_lim(const Eigen::MatrixXd& magnitude, std::size_t n_fft, std::size_t hop,
                             std::size_t iterations = kGriffinLimIterations);

/// Symmetric Hann over the whole clip: 0.5 * (1 - cos(2 pi n / (L - 1))).
std::vector<double> clip_window(std::size_t length);

/// Applies clip_window; throws unless `samples` has exactly `length` samples.
AudioClip window_clip(std::span<const double> samples, std::size_t length);

/// image -> Mel power -> linear power -> magnitude -> Griffin-Lim -> window -> peak 1.
class CellInverter {
 public:
  explicit CellInverter(const AudioConfig& config = {}, std::size_t iterations = kGriffinLimIterations);

  AudioClip invert(const SpectralImage& img) const;
  const AudioConfig& config() const { return config_; }
  std::size_t iterations() const { return iterations_; }

 private:
  AudioConfig config_;
  std::size_t iterations_;
  MelInverter mel_;
};

AudioClip invert_cell(const SpectralImage& img, const AudioConfig& config = {},
                      std::size_t iterations = kGriffinLimIterations);

}  // namespace snakesynth
