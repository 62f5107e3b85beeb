#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "snakesynth/graph.hpp"
#include "snakesynth/latent_grid.hpp"
#include "snakesynth/layers.hpp"

namespace snakesynth::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("snakesynth_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Cell (i,j) holds a Hann-windowed sine whose frequency depends on both indices.
inline ClipBank tone_bank(std::size_t n, std::size_t length, int sample_rate = 16000) {
  std::vector<AudioClip> clips;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      AudioClip c;
      const double f = 200.0 + 97.0 * static_cast<double>(i) + 31.0 * static_cast<double>(j);
      for (std::size_t k = 0; k < length; ++k) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * k / static_cast<double>(length - 1));
        c.samples.push_back(static_cast<float>(0.3 * w * std::sin(2.0 * std::numbers::pi * f * k / sample_rate)));
      }
      c.window_applied = true;
      c.source_cell = Cell{i, j};
      clips.push_back(std::move(c));
    }
  }
  return ClipBank(n, std::move(clips));
}

inline Tensor<double> random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<double> t(std::move(shape));
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : t.data()) v = u(rng);
  return t;
}

/// Builds a scalar loss from the leaves (recorded as graph inputs, in order).
using LossBuilder = std::function<Var(Graph<double>&, const std::vector<Var>&)>;

inline double loss_value(const std::vector<Tensor<double>>& leaves, const LossBuilder& build) {
  Graph<double> g;
  std::vector<Var> vars;
  for (const auto& t : leaves) vars.push_back(g.input(t));
  return g.value(build(g, vars))[0];
}

/// Largest |analytic - numeric| / max(|analytic|, |numeric|, floor) over every
/// leaf element, with central differences of step h.
inline double gradient_check(std::vector<Tensor<double>> leaves, const LossBuilder& build, double h = 1e-4,
                             double floor = 1e-3) {
  Graph<double> g;
  std::vector<Var> vars;
  for (const auto& t : leaves) vars.push_back(g.input(t));
  g.backward(build(g, vars));
  double worst = 0.0;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    const Tensor<double> analytic = g.grad(vars[k]);
    for (std::size_t i = 0; i < leaves[k].size(); ++i) {
      const double saved = leaves[k][i];
      leaves[k][i] = saved + h;
      const double up = loss_value(leaves, build);
      leaves[k][i] = saved - h;
      const double down = loss_value(leaves, build);
      leaves[k][i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

/// Random linear functional of `out`, so every output element gets a distinct upstream gradient.
inline Var project(Graph<double>& g, Var out, std::uint64_t seed) {
  const Shape& s = g.value(out).shape();
  Var flat = s.size() == 2 ? out : s.size() == 1 ? ops::reshape(g, out, {1, s[0]}) : ops::flatten(g, out);
  std::mt19937_64 rng(seed);
  Var r = g.constant(random_tensor({g.value(flat).dim(1), 1}, rng));
  return ops::sum(g, ops::dense(g, flat, r));
}

}  // namespace snakesynth::testing
