#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "snakesynth/adam.hpp"
#include "snakesynth/graph.hpp"
#include "snakesynth/layers.hpp"
#include "snakesynth/spectral_image.hpp"

namespace snakesynth {

/// Point z in the two-dimensional generator input space.
struct LatentPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const LatentPoint&, const LatentPoint&) = default;
};

/// dense(2 -> 8*8*256) -> reshape -> leaky ReLU
/// -> [tconv 5x5 s2 -> batch norm -> leaky ReLU] x 2 -> tconv 5x5 s2 (bias) -> tanh.
class Generator {
 public:
  static constexpr std::size_t kLatentDim = 2;
  static constexpr std::size_t kSeedSide = 8;
  static constexpr std::size_t kSeedChannels = 256;

  Generator();

  void initialize(std::uint64_t seed);

  std::vector<Parameter<float>*> parameters();
  std::vector<const Parameter<float>*> parameters() const;
  std::size_t param_count() const;

  /// Records the network on `g`. `z` must be [B,2]; the result is [B,64,64,1].
  /// Train mode updates the running batch-norm statistics.
  Var forward(Graph<float>& g, Var z, BatchNormMode mode);

  /// Inference mode when running statistics exist, otherwise per-image statistics.
  BatchNormMode default_mode() const;

  Parameter<float> dense_w;
  Parameter<float> dense_b;
  Parameter<float> tconv1_k;
  Parameter<float> bn1_gamma;
  Parameter<float> bn1_beta;
  Parameter<float> tconv2_k;
  Parameter<float> bn2_gamma;
  Parameter<float> bn2_beta;
  Parameter<float> head_k;
  Parameter<float> head_b;
  BatchNormStats<float> bn1_stats;
  BatchNormStats<float> bn2_stats;
};

/// conv 5x5 s2 (1->64) -> leaky ReLU -> conv 5x5 s2 (64->128) -> leaky ReLU -> flatten -> dense(32768 -> 1).
/// The output is an unbounded logit.
class Discriminator {
 public:
  Discriminator();

  void initialize(std::uint64_t seed);

  std::vector<Parameter<float>*> parameters();
  std::vector<const Parameter<float>*> parameters() const;
  std::size_t param_count() const;

  /// `x` must be [B,64,64,1]; the result is [B,1]. With `trainable` false the
  /// weights are used without gradient tracking.
  Var forward(Graph<float>& g, Var x, bool trainable = true);

  Parameter<float> conv1_k;
  Parameter<float> conv1_b;
  Parameter<float> conv2_k;
  Parameter<float> conv2_b;
  Parameter<float> dense_w;
  Parameter<float> dense_b;
};

Tensor<float> latent_tensor(std::span<const LatentPoint> z);
Tensor<float> image_tensor(std::span<const SpectralImage> images);
/// Image number `index` of a [B,64,64,1] tensor, tagged with the canonical generator meta.
SpectralImage image_from_tensor(const Tensor<float>& t, std::size_t index = 0);

/// Read-only forward pass; batch-norm statistics of `gen` are not modified.
SpectralImage generator_forward(const Generator& gen, LatentPoint z, BatchNormMode mode);
std::vector<SpectralImage> generator_forward(const Generator& gen, std::span<const LatentPoint> z, BatchNormMode mode);

float discriminator_forward(const Discriminator& disc, const SpectralImage& x);
std::vector<float> discriminator_forward(const Discriminator& disc, std::span<const SpectralImage> x);

enum class GeneratorLossForm {
  /// -ln sigma(D(G(z)))
  non_saturating,
  /// ln(1 - sigma(D(G(z)))), the literal minimax term
  minimax,
};

double discriminator_loss(double real_logit, double fake_logit);
double generator_loss(double fake_logit, GeneratorLossForm form = GeneratorLossForm::non_saturating);

struct StepLosses {
  double g_loss = 0.0;
  double d_loss = 0.0;

  friend bool operator==(const StepLosses&, const StepLosses&) = default;
};

struct TrainOptions {
  AdamConfig adam;
  GeneratorLossForm loss_form = GeneratorLossForm::non_saturating;
};

struct TrainState {
  Generator generator;
  Discriminator discriminator;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  std::vector<StepLosses> loss_history;

  /// Fresh networks initialized from `seed`.
  static TrainState fresh(std::uint64_t seed);
};

/// Instrumentation points inside train_step.
struct StepHooks {
  /// Generator output of this step, before the generator update.
  std::function<void(const Tensor<float>&)> on_generated;
  /// The fake image the discriminator is trained against.
  std::function<void(const Tensor<float>&)> on_discriminator_fake;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One lockstep update with batch size 1: the generator first, then the
/// discriminator on the real image and the generator output of this step.
StepLosses train_step(TrainState& state, const SpectralImage& real, LatentPoint z, const TrainOptions& options,
                      const StepHooks* hooks = nullptr);
/// Same, with z drawn from N(0, I).
StepLosses train_step(TrainState& state, const SpectralImage& real, std::mt19937_64& rng, const TrainOptions& options,
                      const StepHooks* hooks = nullptr);

/// Visiting order of one epoch: a seeded permutation of [0, n).
std::vector<std::size_t> epoch_order(std::uint64_t seed, std::size_t epoch, std::size_t n);

struct EpochSummary {
  std::size_t epoch = 0;  // 1-based count of completed epochs
  double mean_g_loss = 0.0;
  double mean_d_loss = 0.0;
};

/// Trains until `state.epoch == epochs`, resuming from the current epoch.
/// Each epoch reshuffles and visits every image exactly once.
void train(TrainState& state, std::span<const SpectralImage> dataset, std::size_t epochs, const TrainOptions& options,
           const std::function<void(const EpochSummary&)>& on_epoch = {});

}  // namespace snakesynth
