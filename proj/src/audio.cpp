#include "snakesynth/audio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "snakesynth/fft.hpp"
#include "snakesynth/hash.hpp"

namespace snakesynth {

std::string AudioConfig::canonical() const {
  std::ostringstream os;
  os.precision(17);
  os << "sr=" << sample_rate << ";n_fft=" << n_fft << ";hop=" << hop << ";n_mels=" << n_mels
     << ";n_frames=" << n_frames << ";fmin=" << fmin << ";fmax=" << fmax << ";floor_db=" << floor_db
     << ";ceiling_db=" << ceiling_db << ";window=hann;mel=2595*log10(1+f/700)";
  return os.str();
}

std::uint64_t AudioConfig::hash() const { return Fnv1a().update(canonical()).digest(); }

std::vector<double> analysis_window(std::size_t size) {
  std::vector<double> w(size);
  for (std::size_t n = 0; n < size; ++n) {
    w[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(size)));
  }
  return w;
}

namespace {

void check_frame_params(std::size_t n_fft, std::size_t hop) {
  if (n_fft < 2 || (n_fft & (n_fft - 1)) != 0) {
    throw AudioError("n_fft must be a power of two, got " + std::to_string(n_fft));
  }
  if (hop == 0 || hop > n_fft) throw AudioError("hop must be in [1, n_fft], got " + std::to_string(hop));
}

}  // namespace

ComplexMatrix stft(std::span<const double> samples, std::size_t n_fft, std::size_t hop) {
  check_frame_params(n_fft, hop);
  if (samples.size() < n_fft) {
    throw AudioError("audio of " + std::to_string(samples.size()) + " samples is shorter than n_fft=" +
                     std::to_string(n_fft));
  }
  const std::size_t frames = 1 + (samples.size() - n_fft) / hop;
  const auto window = analysis_window(n_fft);
  RealFft fft(n_fft);
  ComplexMatrix out(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(fft.bins()));
  std::vector<double> frame(n_fft);
  std::vector<std::complex<double>> spectrum(fft.bins());
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t n = 0; n < n_fft; ++n) frame[n] = samples[f * hop + n] * window[n];
    fft.forward(frame, spectrum);
    for (std::size_t k = 0; k < spectrum.size(); ++k) out(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(k)) = spectrum[k];
  }
  return out;
}

ComplexMatrix stft(std::span<const float> samples, std::size_t n_fft, std::size_t hop) {
  std::vector<double> wide(samples.begin(), samples.end());
  return stft(std::span<const double>(wide), n_fft, hop);
}

std::vector<double> istft(const ComplexMatrix& spectrum, std::size_t n_fft, std::size_t hop) {
  check_frame_params(n_fft, hop);
  RealFft fft(n_fft);
  if (static_cast<std::size_t>(spectrum.cols()) != fft.bins()) {
    throw AudioError("istft: spectrum has " + std::to_string(spectrum.cols()) + " bins, expected " +
                     std::to_string(fft.bins()));
  }
  const std::size_t frames = static_cast<std::size_t>(spectrum.rows());
  if (frames == 0) return {};
  const std::size_t length = (frames - 1) * hop + n_fft;
  const auto window = analysis_window(n_fft);
  std::vector<double> out(length, 0.0), weight(length, 0.0), frame(n_fft);
  std::vector<std::complex<double>> bins(fft.bins());
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t k = 0; k < bins.size(); ++k) bins[k] = spectrum(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(k));
    fft.inverse(bins, frame);
    for (std::size_t n = 0; n < n_fft; ++n) {
      out[f * hop + n] += window[n] * frame[n];
      weight[f * hop + n] += window[n] * window[n];
    }
  }
  for (std::size_t i = 0; i < length; ++i) out[i] = weight[i] > 1e-12 ? out[i] / weight[i] : 0.0;
  return out;
}

double hz_to_mel(double hz) {
  if (!(hz >= 0.0)) throw AudioError("frequency must be non-negative, got " + std::to_string(hz));
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank build_filterbank(std::size_t n_mels, std::size_t n_fft, int sample_rate, double fmin, double fmax) {
  const double nyquist = sample_rate / 2.0;
  if (fmax > nyquist) {
    throw AudioError("fmax " + std::to_string(fmax) + " Hz exceeds the Nyquist frequency " + std::to_string(nyquist));
  }
  if (!(fmin >= 0.0 && fmin < fmax)) throw AudioError("filterbank needs 0 <= fmin < fmax");
  if (n_mels == 0) throw AudioError("filterbank needs at least one band");
  check_frame_params(n_fft, 1);

  const std::size_t bins = n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> points(n_mels + 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i] = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1);
  }

  MelFilterbank fb;
  fb.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_mels), static_cast<Eigen::Index>(bins));
  fb.fmin = fmin;
  fb.fmax = fmax;
  fb.n_fft = n_fft;
  fb.sample_rate = sample_rate;
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = points[m], center = points[m + 1], hi = points[m + 2];
    fb.centers_hz.push_back(mel_to_hz(center));
    bool any = false;
    for (std::size_t k = 0; k < bins; ++k) {
      const double mel = hz_to_mel(static_cast<double>(k) * sample_rate / static_cast<double>(n_fft));
      const double w = std::max(0.0, std::min((mel - lo) / (center - lo), (hi - mel) / (hi - center)));
      fb.weights(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = w;
      any = any || w > 0.0;
    }
    if (!any) {
      throw AudioError("Mel band " + std::to_string(m) + " covers no FFT bin; use fewer bands or a larger n_fft");
    }
  }
  return fb;
}

MelFilterbank build_filterbank(const AudioConfig& config) {
  return build_filterbank(config.n_mels, config.n_fft, config.sample_rate, config.fmin, config.fmax);
}

Eigen::MatrixXd mel_power(std::span<const float> samples, const AudioConfig& config, const MelFilterbank& fb) {
  const ComplexMatrix spec = stft(samples, config.n_fft, config.hop);
  const Eigen::MatrixXd power = spec.cwiseAbs2();
  return fb.weights * power.transpose();
}

SpectralImage encode_mel_power(const Eigen::MatrixXd& mel, const AudioConfig& config) {
  if (static_cast<std::size_t>(mel.rows()) != SpectralImage::kSide ||
      static_cast<std::size_t>(mel.cols()) != SpectralImage::kSide) {
    throw AudioError("Mel power must be 64 x 64, got " + std::to_string(mel.rows()) + " x " +
                     std::to_string(mel.cols()));
  }
  SpectralImage img;
  ImageMeta meta;
  meta.floor_db = config.floor_db;
  meta.ceiling_db = config.ceiling_db;
  const double ref = mel.maxCoeff();
  if (!(ref > 0.0)) {
    meta.ref_power = 0.0;
    meta.silent = true;
    img.meta = meta;
    return img;
  }
  // Stored at float precision so the value survives the float32 dataset format unchanged.
  meta.ref_power = static_cast<float>(ref);
  const double span = config.ceiling_db - config.floor_db;
  for (std::size_t r = 0; r < SpectralImage::kSide; ++r) {
    for (std::size_t c = 0; c < SpectralImage::kSide; ++c) {
      const double p = mel(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      double db = p > 0.0 ? 10.0 * std::log10(p / ref) : config.floor_db;
      db = std::clamp(db, config.floor_db, config.ceiling_db);
      img.at(r, c) = static_cast<float>(2.0 * (db - config.floor_db) / span - 1.0);
    }
  }
  img.meta = meta;
  return img;
}

SpectralImage mel_image(const AudioBuffer& audio, const AudioConfig& config, const MelFilterbank& fb) {
  if (config.n_mels != SpectralImage::kSide || config.n_frames != SpectralImage::kSide) {
    throw AudioError("image extraction needs 64 Mel bands and 64 frames");
  }
  const std::size_t len = audio.samples.size();
  const std::size_t frames = len < config.n_fft ? 0 : 1 + (len - config.n_fft) / config.hop;
  if (frames != config.n_frames) {
    throw AudioError("audio of " + std::to_string(len) + " samples gives " + std::to_string(frames) +
                     " frames, expected " + std::to_string(config.n_frames));
  }
  return encode_mel_power(mel_power(audio.samples, config, fb), config);
}

std::vector<float> fit_to_length(std::span<const float> samples, std::size_t length) {
  std::vector<float> out(length, 0.0f);
  if (samples.size() >= length) {
    const std::size_t start = (samples.size() - length) / 2;
    std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(start), length, out.begin());
  } else {
    const std::size_t offset = (length - samples.size()) / 2;
    std::copy(samples.begin(), samples.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
  }
  return out;
}

std::vector<float> resample(std::span<const float> samples, int from_rate, int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) throw AudioError("sample rates must be positive");
  if (from_rate == to_rate) return {samples.begin(), samples.end()};
  constexpr int kZeroCrossings = 16;
  const double ratio = static_cast<double>(to_rate) / from_rate;
  const double cutoff = std::min(1.0, ratio);  // relative to the input Nyquist
  const double half_width = kZeroCrossings / cutoff;
  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(samples.size()) * ratio));
  std::vector<float> out(out_len);
  const auto n_in = static_cast<std::ptrdiff_t>(samples.size());
  for (std::size_t i = 0; i < out_len; ++i) {
    const double center = static_cast<double>(i) / ratio;
    const auto first = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(center - half_width)));
    const auto last = std::min<std::ptrdiff_t>(n_in - 1, static_cast<std::ptrdiff_t>(std::floor(center + half_width)));
    double acc = 0.0;
    for (std::ptrdiff_t k = first; k <= last; ++k) {
      const double d = static_cast<double>(k) - center;
      const double arg = cutoff * d;
      const double sinc = arg == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
      // Hann taper over [-half_width, half_width].
      const double taper = 0.5 * (1.0 + std::cos(std::numbers::pi * d / half_width));
      acc += samples[static_cast<std::size_t>(k)] * cutoff * sinc * taper;
    }
    out[i] = static_cast<float>(acc);
  }
  return out;
}

double synthetic_tone_frequency(std::size_t index) { return 110.0 * std::pow(2.0, static_cast<double>(index) / 4.0); }

AudioBuffer synthetic_tone(std::size_t index, const AudioConfig& config) {
  AudioBuffer audio;
  audio.sample_rate = config.sample_rate;
  const std::size_t len = config.clip_length();
  audio.samples.resize(len);
  const double f0 = synthetic_tone_frequency(index);
  const double sr = config.sample_rate;
  double peak = 0.0;
  std::vector<double> wave(len);
  for (std::size_t n = 0; n < len; ++n) {
    const double t = static_cast<double>(n) / sr;
    const double attack = std::min(1.0, t / 0.05);
    const double envelope = attack * std::exp(-t * (1.0 + 0.25 * static_cast<double>(index)));
    double v = 0.0;
    for (int h = 1; h <= 4; ++h) {
      const double f = f0 * h;
      if (f >= sr / 2) break;
      v += std::sin(2.0 * std::numbers::pi * f * t) / h;
    }
    wave[n] = envelope * v;
    peak = std::max(peak, std::abs(wave[n]));
  }
  for (std::size_t n = 0; n < len; ++n) audio.samples[n] = static_cast<float>(0.8 * wave[n] / peak);
  return audio;
}

}  // namespace snakesynth
