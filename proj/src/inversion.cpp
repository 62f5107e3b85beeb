#include "snakesynth/inversion.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace snakesynth {

Eigen::MatrixXd image_to_mel_power(const SpectralImage& img) {
  if (!img.meta) throw std::invalid_argument("image carries no normalization meta; cannot invert it");
  if (img.pixels.size() != SpectralImage::kPixels) throw std::invalid_argument("image must be 64 x 64");
  const ImageMeta& meta = *img.meta;
  const auto side = static_cast<Eigen::Index>(SpectralImage::kSide);
  Eigen::MatrixXd mel(side, side);
  const double span = meta.ceiling_db - meta.floor_db;
  for (std::size_t r = 0; r < SpectralImage::kSide; ++r) {
    for (std::size_t c = 0; c < SpectralImage::kSide; ++c) {
      const double pixel = std::clamp(static_cast<double>(img.at(r, c)), -1.0, 1.0);
      const double db = meta.floor_db + (pixel + 1.0) * 0.5 * span;
      mel(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = meta.ref_power * std::pow(10.0, db / 10.0);
    }
  }
  return mel;
}

MelInverter::MelInverter(const MelFilterbank& fb)
    : pinv_(fb.weights.completeOrthogonalDecomposition().pseudoInverse()) {}

Eigen::MatrixXd MelInverter::to_linear(const Eigen::MatrixXd& mel_power) const {
  if (mel_power.rows() != pinv_.cols()) {
    throw std::invalid_argument("Mel power has " + std::to_string(mel_power.rows()) + " bands, filterbank has " +
                                std::to_string(pinv_.cols()));
  }
  Eigen::MatrixXd linear = (pinv_ * mel_power).transpose();
  return linear.cwiseMax(0.0);
}

Eigen::MatrixXd mel_to_linear(const Eigen::MatrixXd& mel_power, const MelFilterbank& fb) {
  return MelInverter(fb).to_linear(mel_power);
}

namespace {

double convergence_from_spectrum(const ComplexMatrix& spec, const Eigen::MatrixXd& magnitude, double mag_norm) {
  if (mag_norm == 0.0) return 0.0;
  return (spec.cwiseAbs() - magnitude).norm() / mag_norm;
}

void check_magnitude(const Eigen::MatrixXd& magnitude, std::size_t n_fft) {
  if (static_cast<std::size_t>(magnitude.cols()) != n_fft / 2 + 1) {
    throw std::invalid_argument("magnitude has " + std::to_string(magnitude.cols()) + " bins, expected " +
                                std::to_string(n_fft / 2 + 1));
  }
  if ((magnitude.array() < 0.0).any()) throw std::invalid_argument("magnitude must be non-negative");
}

}  // namespace

double spectral_convergence(std::span<const double> samples, const Eigen::MatrixXd& magnitude, std::size_t n_fft,
                            std::size_t hop) {
  check_magnitude(magnitude, n_fft);
  const ComplexMatrix spec = stft(samples, n_fft, hop);
  if (spec.rows() != magnitude.rows()) throw std::invalid_argument("frame count mismatch");
  return convergence_from_spectrum(spec, magnitude, magnitude.norm());
}

GriffinLimResult griffin_lim(const Eigen::MatrixXd& magnitude, std::size_t n_fft, std::size_t hop,
                             std::size_t iterations) {
  check_magnitude(magnitude, n_fft);
  const double mag_norm = magnitude.norm();
  GriffinLimResult result;
  ComplexMatrix target = magnitude.cast<std::complex<double>>();
  std::vector<double> x = istft(target, n_fft, hop);
  for (std::size_t it = 0; it < iterations; ++it) {
    const ComplexMatrix spec = stft(std::span<const double>(x), n_fft, hop);
    result.errors.push_back(convergence_from_spectrum(spec, magnitude, mag_norm));
    for (Eigen::Index f = 0; f < spec.rows(); ++f) {
      for (Eigen::Index k = 0; k < spec.cols(); ++k) {
        const std::complex<double> s = spec(f, k);
        const double a = std::abs(s);
        const std::complex<double> phase = a > 0.0 ? s / a : std::complex<double>(1.0, 0.0);
        target(f, k) = magnitude(f, k) * phase;
      }
    }
    x = istft(target, n_fft, hop);
  }
  result.errors.push_back(
      convergence_from_spectrum(stft(std::span<const double>(x), n_fft, hop), magnitude, mag_norm));

  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : x) v /= peak;
  }
  result.samples = std::move(x);
  return result;
}

std::vector<double> clip_window(std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (length < 2) return w;
  const double denom = static_cast<double>(length - 1);
  for (std::size_t n = 0; n < length; ++n) {
    w[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / denom));
  }
  w.front() = 0.0;
  w.back() = 0.0;
  return w;
}

AudioClip window_clip(std::span<const double> samples, std::size_t length) {
  if (samples.size() != length) {
    throw std::invalid_argument("clip has " + std::to_string(samples.size()) + " samples, expected " +
                                std::to_string(length));
  }
  const auto w = clip_window(length);
  AudioClip clip;
  clip.samples.resize(length);
  for (std::size_t n = 0; n < length; ++n) clip.samples[n] = static_cast<float>(samples[n] * w[n]);
  clip.window_applied = true;
  return clip;
}

CellInverter::CellInverter(const AudioConfig& config, std::size_t iterations)
    : config_(config), iterations_(iterations), mel_(build_filterbank(config)) {}

AudioClip CellInverter::invert(const SpectralImage& img) const {
  Eigen::MatrixXd mel = image_to_mel_power(img);
  // Pixels at the floor carry no information beyond "at most floor_db"; they are treated as silence.
  const double floor_power = img.meta->ref_power * std::pow(10.0, img.meta->floor_db / 10.0);
  for (Eigen::Index r = 0; r < mel.rows(); ++r) {
    for (Eigen::Index c = 0; c < mel.cols(); ++c) {
      if (mel(r, c) <= floor_power) mel(r, c) = 0.0;
    }
  }
  const Eigen::MatrixXd magnitude = mel_.to_linear(mel).cwiseSqrt();
  const GriffinLimResult gl = griffin_lim(magnitude, config_.n_fft, config_.hop, iterations_);
  AudioClip clip = window_clip(gl.samples, config_.clip_length());
  // The least-squares inverse can spike on the first and last few samples, which only a
  // window tail covers. Those spikes set the Griffin-Lim peak, so level the windowed clip again.
  float peak = 0.0f;
  for (float v : clip.samples) peak = std::max(peak, std::abs(v));
  if (peak > 0.0f) {
    for (float& v : clip.samples) v /= peak;
  }
  return clip;
}

AudioClip invert_cell(const SpectralImage& img, const AudioConfig& config, std::size_t iterations) {
  return CellInverter(config, iterations).invert(img);
}

}  // namespace snakesynth
