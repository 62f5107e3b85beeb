#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "snakesynth/cell.hpp"
#include "snakesynth/gan.hpp"
#include "snakesynth/inversion.hpp"

namespace snakesynth {

/// Standard normal quantile, |error| < 1e-9 on (0,1). Throws outside (0,1).
double inverse_normal_cdf(double p);
/// Standard normal CDF.
double normal_cdf(double z);

/// N x N interaction grid whose cells cover the central `coverage` of N(0,1) on each axis.
struct GridSpec {
  std::size_t n = 5;
  double coverage = 0.95;

  void validate() const;
  /// Probability assigned to index i: (1-coverage)/2 + coverage * i/(N-1); 0.5 when N == 1.
  double quantile_level(std::size_t index) const;
  /// Cell containing normalized controller coordinates in [0,1]^2 (clamped).
  Cell cell_at(double x, double y) const;
  std::string canonical() const;
};

LatentPoint cell_to_latent(Cell cell, const GridSpec& spec);

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

/// [-1,1] -> [0,255], rounded.
std::uint8_t to_gray(float value);

/// Tile (i,j) is G(cell_to_latent(i,j)) placed at columns i*64.., rows j*64...
GrayImage render_mosaic(const Generator& gen, const GridSpec& spec);
GrayImage render_mosaic(const Generator& gen, const GridSpec& spec, BatchNormMode mode);

/// Binary PGM (P5).
std::vector<std::uint8_t> encode_pgm(const GrayImage& image);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

/// One equal-length clip per grid cell.
class ClipBank {
 public:
  ClipBank() = default;
  ClipBank(std::size_t n, std::vector<AudioClip> clips);

  std::size_t n() const { return n_; }
  std::size_t clip_length() const;
  const AudioClip& at(Cell cell) const;
  const std::vector<AudioClip>& clips() const { return clips_; }

  bool loaded_from_cache = false;

 private:
  std::size_t n_ = 0;
  std::vector<AudioClip> clips_;  // index j * n + i
};

/// Inverts every cell of the grid. With a cache directory, a cache whose
/// index matches (model fingerprint, grid, audio/inversion settings) and whose
/// clips pass their hash check is returned without recomputation; otherwise
/// the clips are recomputed and the cache rewritten.
ClipBank build_grid_sounds(const Generator& gen, const GridSpec& spec, const CellInverter& inverter,
                           const std::filesystem::path& cache_dir = {});

/// Content hash of every value that influences generator output.
std::uint64_t generator_fingerprint(const Generator& gen);

}  // namespace snakesynth
