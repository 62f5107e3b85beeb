#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <complex>
#include <random>

#include "snakesynth/inversion.hpp"

using namespace snakesynth;

namespace {

std::vector<double> windowed_tone(double hz, std::size_t length, int rate) {
  const auto w = clip_window(length);
  std::vector<double> x(length);
  for (std::size_t n = 0; n < length; ++n) x[n] = w[n] * std::sin(2 * std::numbers::pi * hz * n / rate);
  return x;
}

Eigen::MatrixXd magnitude_of(const std::vector<double>& x, std::size_t n_fft, std::size_t hop) {
  return stft(std::span<const double>(x), n_fft, hop).cwiseAbs();
}

}  // namespace

TEST(ImageToMelPower, InvertsTheEncoder) {
  const AudioConfig cfg;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> db(-75, 0);
  Eigen::MatrixXd mel(64, 64);
  for (Eigen::Index i = 0; i < mel.size(); ++i) mel(i) = 3.7 * std::pow(10.0, db(rng) / 10);
  mel(5, 5) = 3.7;  // the reference
  const SpectralImage img = encode_mel_power(mel, cfg);
  const Eigen::MatrixXd back = image_to_mel_power(img);
  for (Eigen::Index i = 0; i < mel.size(); ++i) EXPECT_NEAR(back(i) / mel(i), 1.0, 1e-4);
  SpectralImage bare = img;
  bare.meta.reset();
  EXPECT_THROW(image_to_mel_power(bare), std::invalid_argument);
}

// p = W^T c with c >= 0 lies in the row space of W and is non-negative, so the
// minimum-norm inverse must return it exactly.
TEST(MelToLinear, RecoversRowSpaceSpectra) {
  const MelFilterbank fb = build_filterbank(AudioConfig{});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 2);
  Eigen::MatrixXd c(64, 5);
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = u(rng);
  const Eigen::MatrixXd p = fb.weights.transpose() * c;  // bins x frames
  const Eigen::MatrixXd linear = mel_to_linear(fb.weights * p, fb);
  ASSERT_EQ(linear.rows(), 5);
  ASSERT_EQ(linear.cols(), 257);
  EXPECT_LT((linear.transpose() - p).cwiseAbs().maxCoeff(), 1e-9 * p.maxCoeff());
}

TEST(MelToLinear, NeverNegative) {
  const MelFilterbank fb = build_filterbank(AudioConfig{});
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd mel(64, 7);
  for (Eigen::Index i = 0; i < mel.size(); ++i) mel(i) = u(rng);
  EXPECT_GE(mel_to_linear(mel, fb).minCoeff(), 0.0);
  EXPECT_THROW(mel_to_linear(Eigen::MatrixXd::Ones(10, 3), fb), std::invalid_argument);
}

TEST(GriffinLim, ErrorNonIncreasingAndPeakNormalized) {
  const auto x = windowed_tone(440, 16640, 16000);
  const Eigen::MatrixXd mag = magnitude_of(x, 512, 256);
  const GriffinLimResult r = griffin_lim(mag, 512, 256, 60);
  ASSERT_EQ(r.errors.size(), 61u);
  for (std::size_t k = 1; k < r.errors.size(); ++k) EXPECT_LE(r.errors[k], r.errors[k - 1] + 1e-6) << k;
  EXPECT_LT(r.errors.back(), 0.1);
  double peak = 0;
  for (double s : r.samples) peak = std::max(peak, std::abs(s));
  EXPECT_DOUBLE_EQ(peak, 1.0);
  EXPECT_EQ(griffin_lim(mag, 512, 256, 60).samples, r.samples);
}

TEST(GriffinLim, SilenceStaysSilent) {
  const GriffinLimResult r = griffin_lim(Eigen::MatrixXd::Zero(64, 257), 512, 256, 5);
  for (double s : r.samples) EXPECT_EQ(s, 0.0);
  for (double e : r.errors) EXPECT_EQ(e, 0.0);
}

TEST(SpectralConvergence, ZeroForTheTrueSignal) {
  const auto x = windowed_tone(1000, 4096, 16000);
  EXPECT_LT(spectral_convergence(x, magnitude_of(x, 512, 256), 512, 256), 1e-12);
  std::vector<double> y(x.size(), 0.0);
  EXPECT_NEAR(spectral_convergence(y, magnitude_of(x, 512, 256), 512, 256), 1.0, 1e-12);
}

TEST(ClipWindow, SymmetricHannWithZeroEnds) {
  const auto w = clip_window(16640);
  EXPECT_EQ(w.front(), 0.0);
  EXPECT_EQ(w.back(), 0.0);
  for (std::size_t n = 0; n < w.size(); ++n) EXPECT_NEAR(w[n], w[w.size() - 1 - n], 1e-12);
  EXPECT_NEAR(*std::max_element(w.begin(), w.end()), 1.0, 1e-7);
  EXPECT_THROW(window_clip(std::vector<double>(10), 11), std::invalid_argument);
}

TEST(CellInverter, FixedLengthWindowedAndDeterministic) {
  const AudioConfig cfg;
  const MelFilterbank fb = build_filterbank(cfg);
  AudioBuffer tone{std::vector<float>(cfg.clip_length()), 16000};
  const auto x = windowed_tone(660, cfg.clip_length(), 16000);
  std::copy(x.begin(), x.end(), tone.samples.begin());
  const SpectralImage img = mel_image(tone, cfg, fb);
  const CellInverter inv(cfg, 20);
  const AudioClip a = inv.invert(img), b = inv.invert(img);
  EXPECT_EQ(a.samples.size(), cfg.clip_length());
  EXPECT_TRUE(a.window_applied);
  EXPECT_EQ(a.samples.front(), 0.0f);
  EXPECT_EQ(a.samples.back(), 0.0f);
  EXPECT_EQ(a.samples, b.samples);
  float peak = 0;
  for (float s : a.samples) peak = std::max(peak, std::abs(s));
  EXPECT_GT(peak, 0.5f);
  EXPECT_LE(peak, 1.0f);
}

TEST(CellInverter, FloorImageIsSilent) {
  SpectralImage img;
  img.meta = ImageMeta{};
  const AudioClip clip = invert_cell(img, AudioConfig{}, 5);
  for (float s : clip.samples) EXPECT_EQ(s, 0.0f);
}

TEST(ImageToMelPower, EndpointsAndDatasetRoundTrip) {
  const AudioConfig cfg;
  SpectralImage img;
  img.meta = ImageMeta{-80, 0, 2.5, false};
  img.at(0, 0) = 1.0f;
  const Eigen::MatrixXd mel = image_to_mel_power(img);
  EXPECT_DOUBLE_EQ(mel(0, 0), 2.5);
  EXPECT_NEAR(mel(1, 0), 2.5e-8, 1e-20);
  EXPECT_GE(mel.minCoeff(), 0.0);

  const SpectralImage tone = mel_image(synthetic_tone(3, cfg), cfg, build_filterbank(cfg));
  const SpectralImage again = encode_mel_power(image_to_mel_power(tone), cfg);
  double worst = 0;
  for (std::size_t i = 0; i < tone.pixels.size(); ++i) worst = std::max<double>(worst, std::abs(again.pixels[i] - tone.pixels[i]));
  EXPECT_LT(worst, 1e-5);
}

TEST(MelToLinear, ZeroInZeroOut) {
  const MelFilterbank fb = build_filterbank(AudioConfig{});
  EXPECT_EQ(mel_to_linear(Eigen::MatrixXd::Zero(64, 64), fb).cwiseAbs().maxCoeff(), 0.0);
}

TEST(WindowClip, ConstantSignalAndNoiseEnergy) {
  const AudioClip c = window_clip(std::vector<double>(4097, 1.0), 4097);
  const auto w = clip_window(4097);
  for (std::size_t n = 0; n < w.size(); ++n) EXPECT_FLOAT_EQ(c.samples[n], static_cast<float>(w[n]));
  EXPECT_DOUBLE_EQ(w[2048], 1.0);

  std::mt19937_64 rng(12);
  std::normal_distribution<double> d(0, 0.2);
  for (std::size_t len : {4096u, 16640u}) {
    std::vector<double> x(len);
    double in = 0, out = 0;
    for (double& v : x) v = d(rng), in += v * v;
    for (float v : window_clip(x, len).samples) out += double(v) * v;
    EXPECT_NEAR(out / in, 0.375, 0.375 * 0.05);
  }
}

// Dominant frequency of each inverted synthetic tone, against the Mel band spacing around the tone.
TEST(CellInverter, SyntheticTonesKeepTheirPitch) {
  const AudioConfig cfg;
  const MelFilterbank fb = build_filterbank(cfg);
  const CellInverter inv(cfg);
  for (std::size_t i : {0u, 3u, 7u}) {
    const double f0 = synthetic_tone_frequency(i);
    const AudioClip clip = inv.invert(mel_image(synthetic_tone(i, cfg), cfg, fb));
    double best_f = 0, best = -1;
    for (double f = 50; f < 2000; f += 0.5) {
      std::complex<double> acc;
      for (std::size_t n = 0; n < clip.samples.size(); n += 1)
        acc += double(clip.samples[n]) * std::polar(1.0, -2 * std::numbers::pi * f * n / cfg.sample_rate);
      if (std::abs(acc) > best) best = std::abs(acc), best_f = f;
    }
    auto band = std::upper_bound(fb.centers_hz.begin(), fb.centers_hz.end(), f0);
    const double width = *band - *(band - 1);
    EXPECT_NEAR(best_f, f0, width) << "tone " << i;
  }
}
