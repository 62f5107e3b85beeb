#include "snakesynth/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "snakesynth/record_file.hpp"
#include "snakesynth/wav.hpp"

namespace snakesynth {

namespace {

constexpr std::array<char, 4> kDatasetMagic{'S', 'S', 'D', 'S'};
constexpr std::uint16_t kDatasetVersion = 1;

std::string indexed(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s/%04zu", prefix, i);
  return buf;
}

}  // namespace

SpectralImage image_from_audio(const AudioBuffer& audio, const AudioConfig& config, const MelFilterbank& fb) {
  AudioBuffer prepared;
  prepared.sample_rate = config.sample_rate;
  const auto resampled = resample(audio.samples, audio.sample_rate, config.sample_rate);
  prepared.samples = fit_to_length(resampled, config.clip_length());
  return mel_image(prepared, config, fb);
}

Dataset build_dataset(const std::filesystem::path& dir, const AudioConfig& config) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  Dataset ds;
  ds.config = config;
  const MelFilterbank fb = build_filterbank(config);
  for (const auto& path : files) {
    WavInfo info;
    AudioBuffer audio;
    try {
      audio = read_wav(path, &info);
    } catch (const std::exception& e) {
      ds.warnings.push_back("skipped " + path.filename().string() + ": " + e.what());
      continue;
    }
    SpectralImage img = image_from_audio(audio, config, fb);
    if (img.meta->silent) ds.warnings.push_back(path.filename().string() + " is silent");
    ManifestEntry entry;
    entry.index = ds.images.size();
    entry.file = path.filename().string();
    entry.source_rate = info.sample_rate;
    entry.source_channels = info.channels;
    entry.source_samples = audio.samples.size();
    entry.meta = *img.meta;
    ds.images.push_back(std::move(img));
    ds.manifest.push_back(std::move(entry));
  }
  if (ds.images.empty()) throw std::runtime_error("no usable WAV files in " + dir.string());
  return ds;
}

std::string manifest_text(const Dataset& dataset) {
  std::string out;
  for (const ManifestEntry& e : dataset.manifest) {
    nlohmann::json j{{"index", e.index},
                     {"file", e.file},
                     {"source_rate", e.source_rate},
                     {"source_channels", e.source_channels},
                     {"source_samples", e.source_samples},
                     {"floor_db", e.meta.floor_db},
                     {"ceiling_db", e.meta.ceiling_db},
                     {"ref_power", e.meta.ref_power},
                     {"silent", e.meta.silent},
                     {"config", dataset.config.canonical()}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << manifest_text(dataset);
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  RecordFile file;
  file.magic = kDatasetMagic;
  file.version = kDatasetVersion;
  file.config_hash = dataset.config.hash();
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    const SpectralImage& img = dataset.images[i];
    const ImageMeta meta = img.meta.value_or(ImageMeta{});
    file.records.push_back({indexed("image", i), {SpectralImage::kSide, SpectralImage::kSide}, img.pixels});
    file.records.push_back({indexed("meta", i),
                            {4},
                            {static_cast<float>(meta.floor_db), static_cast<float>(meta.ceiling_db),
                             static_cast<float>(meta.ref_power), meta.silent ? 1.0f : 0.0f}});
  }
  write_records(path, file);
}

Dataset load_dataset(const std::filesystem::path& path, const AudioConfig& config) {
  const RecordFile file = read_records(path);
  if (file.magic != kDatasetMagic) throw FormatError(path.string() + " is not a dataset file");
  if (file.version != kDatasetVersion) {
    throw FormatError("dataset version " + std::to_string(file.version) + " is not supported (expected " +
                      std::to_string(kDatasetVersion) + ")");
  }
  if (file.config_hash != config.hash()) {
    throw FormatError("dataset was built with a different audio configuration");
  }
  Dataset ds;
  ds.config = config;
  for (std::size_t i = 0;; ++i) {
    const Record* image = file.find(indexed("image", i));
    if (!image) break;
    const Record& meta = file.at(indexed("meta", i));
    if (image->values.size() != SpectralImage::kPixels || meta.values.size() != 4) {
      throw FormatError("dataset entry " + std::to_string(i) + " has the wrong size");
    }
    SpectralImage img;
    img.pixels = image->values;
    img.meta = ImageMeta{meta.values[0], meta.values[1], meta.values[2], meta.values[3] != 0.0f};
    ManifestEntry entry;
    entry.index = i;
    entry.meta = *img.meta;
    ds.manifest.push_back(entry);
    ds.images.push_back(std::move(img));
  }
  if (ds.images.empty()) throw FormatError(path.string() + " holds no images");
  return ds;
}

std::vector<std::filesystem::path> write_synthetic_tones(const std::filesystem::path& dir, std::size_t count,
                                                         const AudioConfig& config) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "tone_%02zu.wav", i);
    paths.push_back(dir / name);
    write_wav(paths.back(), synthetic_tone(i, config), WavEncoding::float32);
  }
  return paths;
}

}  // namespace snakesynth
