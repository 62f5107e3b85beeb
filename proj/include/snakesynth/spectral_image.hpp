#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace snakesynth {

/// How pixels map back to Mel power: pixel -1 is floor_db, +1 is ceiling_db,
/// both relative to ref_power.
struct ImageMeta {
  double floor_db = -80.0;
  double ceiling_db = 0.0;
  double ref_power = 1.0;
  bool silent = false;

  friend bool operator==(const ImageMeta&, const ImageMeta&) = default;
};

/// 64 x 64 Mel image in [-1,1]; row = Mel band (0 lowest), column = frame.
struct SpectralImage {
  static constexpr std::size_t kSide = 64;
  static constexpr std::size_t kPixels = kSide * kSide;

  std::vector<float> pixels = std::vector<float>(kPixels, -1.0f);
  std::optional<ImageMeta> meta;

  float at(std::size_t row, std::size_t col) const { return pixels[row * kSide + col]; }
  float& at(std::size_t row, std::size_t col) { return pixels[row * kSide + col]; }
  bool in_range() const;
};

}  // namespace snakesynth
