#include "snakesynth/latent_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "snakesynth/hash.hpp"
#include "snakesynth/wav.hpp"

namespace snakesynth {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inverse_normal_cdf needs 0 < p < 1, got " + std::to_string(p));
  // Rational approximation (relative error ~1e-9) followed by one Newton step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  auto lower_tail = [&](double pl) {
    const double q = std::sqrt(-2.0 * std::log(pl));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  };

  double z;
  if (p < p_low) {
    z = lower_tail(p);
  } else if (p > 1.0 - p_low) {
    z = -lower_tail(1.0 - p);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  if (density > 0.0) z -= (normal_cdf(z) - p) / density;
  return z;
}

void GridSpec::validate() const {
  if (n < 1) throw std::invalid_argument("grid needs at least one cell per side");
  if (!(coverage > 0.0 && coverage < 1.0)) throw std::invalid_argument("grid coverage must be in (0,1)");
}

double GridSpec::quantile_level(std::size_t index) const {
  if (n == 1) return 0.5;
  return (1.0 - coverage) / 2.0 + coverage * static_cast<double>(index) / static_cast<double>(n - 1);
}

Cell GridSpec::cell_at(double x, double y) const {
  auto axis = [this](double v) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    return std::min(n - 1, static_cast<std::size_t>(clamped * static_cast<double>(n)));
  };
  return {axis(x), axis(y)};
}

std::string GridSpec::canonical() const {
  std::ostringstream os;
  os.precision(17);
  os << "n=" << n << ";coverage=" << coverage;
  return os.str();
}

namespace {

// Mirrored indices use the same quantile with flipped sign, so the grid is
// exactly antisymmetric about its center.
double axis_latent(std::size_t index, const GridSpec& spec) {
  const std::size_t mirror = spec.n - 1 - index;
  if (mirror < index) return -inverse_normal_cdf(spec.quantile_level(mirror));
  if (mirror == index) return 0.0;
  return inverse_normal_cdf(spec.quantile_level(index));
}

}  // namespace

LatentPoint cell_to_latent(Cell cell, const GridSpec& spec) {
  spec.validate();
  if (cell.i >= spec.n || cell.j >= spec.n) {
    throw std::out_of_range("cell (" + std::to_string(cell.i) + "," + std::to_string(cell.j) + ") is outside a " +
                            std::to_string(spec.n) + "x" + std::to_string(spec.n) + " grid");
  }
  return {axis_latent(cell.i, spec), axis_latent(cell.j, spec)};
}

std::uint8_t to_gray(float value) {
  const double v = std::clamp(static_cast<double>(value), -1.0, 1.0);
  return static_cast<std::uint8_t>(std::lround((v + 1.0) * 0.5 * 255.0));
}

GrayImage render_mosaic(const Generator& gen, const GridSpec& spec) {
  return render_mosaic(gen, spec, gen.default_mode());
}

GrayImage render_mosaic(const Generator& gen, const GridSpec& spec, BatchNormMode mode) {
  spec.validate();
  constexpr std::size_t side = SpectralImage::kSide;
  GrayImage out;
  out.width = spec.n * side;
  out.height = spec.n * side;
  out.pixels.assign(out.width * out.height, 0);
  for (std::size_t j = 0; j < spec.n; ++j) {
    for (std::size_t i = 0; i < spec.n; ++i) {
      const SpectralImage tile = generator_forward(gen, cell_to_latent({i, j}, spec), mode);
      for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
          out.pixels[(j * side + r) * out.width + i * side + c] = to_gray(tile.at(r, c));
        }
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  const std::string header = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  const auto bytes = encode_pgm(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ClipBank::ClipBank(std::size_t n, std::vector<AudioClip> clips) : n_(n), clips_(std::move(clips)) {
  if (clips_.size() != n_ * n_) throw std::invalid_argument("clip bank needs N*N clips");
  for (const AudioClip& c : clips_) {
    if (c.samples.size() != clips_.front().samples.size()) throw std::invalid_argument("clips must share one length");
  }
}

std::size_t ClipBank::clip_length() const { return clips_.empty() ? 0 : clips_.front().samples.size(); }

const AudioClip& ClipBank::at(Cell cell) const {
  if (cell.i >= n_ || cell.j >= n_) throw std::out_of_range("cell outside the clip bank");
  return clips_[cell.j * n_ + cell.i];
}

std::uint64_t generator_fingerprint(const Generator& gen) {
  Fnv1a h;
  for (const Parameter<float>* p : gen.parameters()) {
    h.update(p->name);
    h.update_values<float>(p->value.data());
  }
  for (const BatchNormStats<float>* s : {&gen.bn1_stats, &gen.bn2_stats}) {
    h.update_values<float>(s->mean.data());
    h.update_values<float>(s->var.data());
    const std::uint64_t updates = s->updates > 0 ? 1 : 0;
    h.update_values(std::span<const std::uint64_t>(&updates, 1));
  }
  return h.digest();
}

namespace {

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string clip_file_name(Cell c) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "cell_%02zu_%02zu.wav", c.i, c.j);
  return buf;
}

std::uint64_t clip_hash(const AudioClip& clip) { return Fnv1a().update_values<float>(clip.samples).digest(); }

std::string cache_key(const GridSpec& spec, const CellInverter& inverter) {
  return spec.canonical() + ";" + inverter.config().canonical() + ";gl_iters=" + std::to_string(inverter.iterations());
}

std::optional<ClipBank> load_cache(const std::filesystem::path& dir, const GridSpec& spec, const std::string& model,
                                   const std::string& config) {
  std::ifstream in(dir / "index.json");
  if (!in) return std::nullopt;
  nlohmann::json index;
  try {
    in >> index;
    if (index.at("model_hash") != model || index.at("config_hash") != config || index.at("n") != spec.n) {
      return std::nullopt;
    }
    std::vector<AudioClip> clips(spec.n * spec.n);
    for (const auto& entry : index.at("clips")) {
      const Cell cell{entry.at("i").get<std::size_t>(), entry.at("j").get<std::size_t>()};
      if (cell.i >= spec.n || cell.j >= spec.n) return std::nullopt;
      AudioClip clip;
      clip.samples = read_wav(dir / entry.at("file").get<std::string>()).samples;
      clip.window_applied = true;
      clip.source_cell = cell;
      if (hex(clip_hash(clip)) != entry.at("hash").get<std::string>()) return std::nullopt;
      clips[cell.j * spec.n + cell.i] = std::move(clip);
    }
    for (const AudioClip& c : clips) {
      if (!c.source_cell) return std::nullopt;
    }
    ClipBank bank(spec.n, std::move(clips));
    bank.loaded_from_cache = true;
    return bank;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void store_cache(const std::filesystem::path& dir, const ClipBank& bank, int sample_rate, const std::string& model,
                 const std::string& config) {
  std::filesystem::create_directories(dir);
  nlohmann::json index{{"model_hash", model}, {"config_hash", config}, {"n", bank.n()}, {"clips", nlohmann::json::array()}};
  for (const AudioClip& clip : bank.clips()) {
    const std::string file = clip_file_name(*clip.source_cell);
    write_wav(dir / file, AudioBuffer{clip.samples, sample_rate}, WavEncoding::float32);
    index["clips"].push_back(
        {{"i", clip.source_cell->i}, {"j", clip.source_cell->j}, {"file", file}, {"hash", hex(clip_hash(clip))}});
  }
  const auto tmp = dir / "index.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << index.dump(1) << '\n';
  }
  std::filesystem::rename(tmp, dir / "index.json");
}

}  // namespace

ClipBank build_grid_sounds(const Generator& gen, const GridSpec& spec, const CellInverter& inverter,
                           const std::filesystem::path& cache_dir) {
  spec.validate();
  const std::string model = hex(generator_fingerprint(gen));
  const std::string config = hex(Fnv1a().update(cache_key(spec, inverter)).digest());
  if (!cache_dir.empty()) {
    if (auto cached = load_cache(cache_dir, spec, model, config)) return std::move(*cached);
  }
  const BatchNormMode mode = gen.default_mode();
  std::vector<AudioClip> clips;
  clips.reserve(spec.n * spec.n);
  for (std::size_t j = 0; j < spec.n; ++j) {
    for (std::size_t i = 0; i < spec.n; ++i) {
      AudioClip clip = inverter.invert(generator_forward(gen, cell_to_latent({i, j}, spec), mode));
      clip.source_cell = Cell{i, j};
      clips.push_back(std::move(clip));
    }
  }
  ClipBank bank(spec.n, std::move(clips));
  if (!cache_dir.empty()) store_cache(cache_dir, bank, inverter.config().sample_rate, model, config);
  return bank;
}

}  // namespace snakesynth
