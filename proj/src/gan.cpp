#include "snakesynth/gan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace snakesynth {

bool SpectralImage::in_range() const {
  return pixels.size() == kPixels &&
         std::all_of(pixels.begin(), pixels.end(), [](float p) { return p >= -1.0f && p <= 1.0f; });
}

namespace {

constexpr std::size_t kKernel = 5;
constexpr std::size_t kStride = 2;
constexpr double kConvInitStd = 0.02;

std::size_t count(const std::vector<const Parameter<float>*>& params) {
  std::size_t n = 0;
  for (const auto* p : params) n += p->size();
  return n;
}

void init_truncated_normal(Tensor<float>& t, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  for (float& v : t.data()) {
    double s;
    do {
      s = normal(rng);
    } while (std::abs(s) > 2.0 * stddev);
    v = static_cast<float>(s);
  }
}

void init_uniform(Tensor<float>& t, double limit, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(-limit, limit);
  for (float& v : t.data()) v = static_cast<float>(uniform(rng));
}

template <typename Gen, typename Bind>
Var generator_graph(Graph<float>& g, Var z, Gen& gen, BatchNormMode mode, Bind bind, BatchNormStats<float>& stats1,
                    BatchNormStats<float>& stats2) {
  const std::size_t batch = g.value(z).dim(0);
  Var h = ops::dense(g, z, bind(gen.dense_w), bind(gen.dense_b));
  h = ops::reshape(g, h, Shape{batch, Generator::kSeedSide, Generator::kSeedSide, Generator::kSeedChannels});
  h = ops::leaky_relu(g, h);
  h = ops::tconv2d(g, h, bind(gen.tconv1_k), std::nullopt, kStride);
  h = ops::batch_norm(g, h, bind(gen.bn1_gamma), bind(gen.bn1_beta), stats1, mode);
  h = ops::leaky_relu(g, h);
  h = ops::tconv2d(g, h, bind(gen.tconv2_k), std::nullopt, kStride);
  h = ops::batch_norm(g, h, bind(gen.bn2_gamma), bind(gen.bn2_beta), stats2, mode);
  h = ops::leaky_relu(g, h);
  h = ops::tconv2d(g, h, bind(gen.head_k), bind(gen.head_b), kStride);
  return ops::tanh(g, h);
}

template <typename Disc, typename Bind>
Var discriminator_graph(Graph<float>& g, Var x, Disc& disc, Bind bind) {
  const Shape& s = g.value(x).shape();
  if (s.size() != 4 || s[1] != SpectralImage::kSide || s[2] != SpectralImage::kSide || s[3] != 1) {
    throw ShapeError("discriminator expects [B,64,64,1] images, got " + shape_string(s));
  }
  Var h = ops::conv2d(g, x, bind(disc.conv1_k), bind(disc.conv1_b), kStride);
  h = ops::leaky_relu(g, h);
  h = ops::conv2d(g, h, bind(disc.conv2_k), bind(disc.conv2_b), kStride);
  h = ops::leaky_relu(g, h);
  h = ops::flatten(g, h);
  return ops::dense(g, h, bind(disc.dense_w), bind(disc.dense_b));
}

void check_loss(double loss, const char* which, const TrainState& state) {
  if (!std::isfinite(loss)) {
    throw TrainingDiverged(std::string(which) + " loss became non-finite in epoch " + std::to_string(state.epoch + 1) +
                           " after " + std::to_string(state.loss_history.size()) + " steps");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(epoch) + 1));
}

}  // namespace

Generator::Generator()
    : dense_w("g.dense.w", {kLatentDim, kSeedSide * kSeedSide * kSeedChannels}),
      dense_b("g.dense.b", {kSeedSide * kSeedSide * kSeedChannels}),
      tconv1_k("g.tconv1.k", {kKernel, kKernel, 128, kSeedChannels}),
      bn1_gamma("g.bn1.gamma", {128}),
      bn1_beta("g.bn1.beta", {128}),
      tconv2_k("g.tconv2.k", {kKernel, kKernel, 64, 128}),
      bn2_gamma("g.bn2.gamma", {64}),
      bn2_beta("g.bn2.beta", {64}),
      head_k("g.head.k", {kKernel, kKernel, 1, 64}),
      head_b("g.head.b", {1}),
      bn1_stats(128),
      bn2_stats(64) {
  bn1_gamma.value.fill(1.0f);
  bn2_gamma.value.fill(1.0f);
}

void Generator::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double dense_limit = 1.0 / std::sqrt(static_cast<double>(kLatentDim));
  init_uniform(dense_w.value, dense_limit, rng);
  init_uniform(dense_b.value, dense_limit, rng);
  init_truncated_normal(tconv1_k.value, kConvInitStd, rng);
  init_truncated_normal(tconv2_k.value, kConvInitStd, rng);
  init_truncated_normal(head_k.value, kConvInitStd, rng);
  head_b.value.fill(0.0f);
  bn1_gamma.value.fill(1.0f);
  bn1_beta.value.fill(0.0f);
  bn2_gamma.value.fill(1.0f);
  bn2_beta.value.fill(0.0f);
  bn1_stats = BatchNormStats<float>(128);
  bn2_stats = BatchNormStats<float>(64);
  for (Parameter<float>* p : parameters()) {
    p->grad.fill(0.0f);
    p->adam_m.fill(0.0f);
    p->adam_v.fill(0.0f);
    p->step_count = 0;
  }
}

std::vector<Parameter<float>*> Generator::parameters() {
  return {&dense_w, &dense_b, &tconv1_k, &bn1_gamma, &bn1_beta, &tconv2_k, &bn2_gamma, &bn2_beta, &head_k, &head_b};
}

std::vector<const Parameter<float>*> Generator::parameters() const {
  return {&dense_w, &dense_b, &tconv1_k, &bn1_gamma, &bn1_beta, &tconv2_k, &bn2_gamma, &bn2_beta, &head_k, &head_b};
}

std::size_t Generator::param_count() const { return count(parameters()); }

Var Generator::forward(Graph<float>& g, Var z, BatchNormMode mode) {
  return generator_graph(g, z, *this, mode, [&g](Parameter<float>& p) { return g.parameter(p); }, bn1_stats,
                         bn2_stats);
}

BatchNormMode Generator::default_mode() const {
  return bn1_stats.updates > 0 && bn2_stats.updates > 0 ? BatchNormMode::infer : BatchNormMode::train;
}

Discriminator::Discriminator()
    : conv1_k("d.conv1.k", {kKernel, kKernel, 1, 64}),
      conv1_b("d.conv1.b", {64}),
      conv2_k("d.conv2.k", {kKernel, kKernel, 64, 128}),
      conv2_b("d.conv2.b", {128}),
      dense_w("d.dense.w", {16 * 16 * 128, 1}),
      dense_b("d.dense.b", {1}) {}

void Discriminator::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  init_truncated_normal(conv1_k.value, kConvInitStd, rng);
  conv1_b.value.fill(0.0f);
  init_truncated_normal(conv2_k.value, kConvInitStd, rng);
  conv2_b.value.fill(0.0f);
  const double dense_limit = 1.0 / std::sqrt(static_cast<double>(dense_w.value.dim(0)));
  init_uniform(dense_w.value, dense_limit, rng);
  init_uniform(dense_b.value, dense_limit, rng);
  for (Parameter<float>* p : parameters()) {
    p->grad.fill(0.0f);
    p->adam_m.fill(0.0f);
    p->adam_v.fill(0.0f);
    p->step_count = 0;
  }
}

std::vector<Parameter<float>*> Discriminator::parameters() {
  return {&conv1_k, &conv1_b, &conv2_k, &conv2_b, &dense_w, &dense_b};
}

std::vector<const Parameter<float>*> Discriminator::parameters() const {
  return {&conv1_k, &conv1_b, &conv2_k, &conv2_b, &dense_w, &dense_b};
}

std::size_t Discriminator::param_count() const { return count(parameters()); }

Var Discriminator::forward(Graph<float>& g, Var x, bool trainable) {
  if (trainable) return discriminator_graph(g, x, *this, [&g](Parameter<float>& p) { return g.parameter(p); });
  return discriminator_graph(g, x, std::as_const(*this), [&g](const Parameter<float>& p) { return g.frozen(p); });
}

Tensor<float> latent_tensor(std::span<const LatentPoint> z) {
  Tensor<float> t({z.size(), Generator::kLatentDim});
  for (std::size_t i = 0; i < z.size(); ++i) {
    t[2 * i] = static_cast<float>(z[i].x);
    t[2 * i + 1] = static_cast<float>(z[i].y);
  }
  return t;
}

Tensor<float> image_tensor(std::span<const SpectralImage> images) {
  Tensor<float> t({images.size(), SpectralImage::kSide, SpectralImage::kSide, 1});
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].pixels.size() != SpectralImage::kPixels) {
      throw ShapeError("image " + std::to_string(i) + " has " + std::to_string(images[i].pixels.size()) +
                       " pixels, expected 64x64");
    }
    std::copy(images[i].pixels.begin(), images[i].pixels.end(), t.raw() + i * SpectralImage::kPixels);
  }
  return t;
}

SpectralImage image_from_tensor(const Tensor<float>& t, std::size_t index) {
  SpectralImage img;
  const float* src = t.raw() + index * SpectralImage::kPixels;
  std::copy(src, src + SpectralImage::kPixels, img.pixels.begin());
  img.meta = ImageMeta{};
  return img;
}

std::vector<SpectralImage> generator_forward(const Generator& gen, std::span<const LatentPoint> z,
                                             BatchNormMode mode) {
  Graph<float> g;
  BatchNormStats<float> stats1 = gen.bn1_stats;
  BatchNormStats<float> stats2 = gen.bn2_stats;
  Var zv = g.constant(latent_tensor(z));
  Var out = generator_graph(g, zv, gen, mode, [&g](const Parameter<float>& p) { return g.frozen(p); }, stats1,
                            stats2);
  std::vector<SpectralImage> images;
  images.reserve(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) images.push_back(image_from_tensor(g.value(out), i));
  return images;
}

SpectralImage generator_forward(const Generator& gen, LatentPoint z, BatchNormMode mode) {
  return generator_forward(gen, std::span<const LatentPoint>(&z, 1), mode).front();
}

std::vector<float> discriminator_forward(const Discriminator& disc, std::span<const SpectralImage> x) {
  Graph<float> g;
  Var xv = g.constant(image_tensor(x));
  Var out = discriminator_graph(g, xv, disc, [&g](const Parameter<float>& p) { return g.frozen(p); });
  const auto logits = g.value(out).data();
  return {logits.begin(), logits.end()};
}

float discriminator_forward(const Discriminator& disc, const SpectralImage& x) {
  return discriminator_forward(disc, std::span<const SpectralImage>(&x, 1)).front();
}

double discriminator_loss(double real_logit, double fake_logit) {
  return ops::bce_with_logits(real_logit, 1.0) + ops::bce_with_logits(fake_logit, 0.0);
}

double generator_loss(double fake_logit, GeneratorLossForm form) {
  if (form == GeneratorLossForm::minimax) return -ops::bce_with_logits(fake_logit, 0.0);
  return ops::bce_with_logits(fake_logit, 1.0);
}

TrainState TrainState::fresh(std::uint64_t seed) {
  TrainState state;
  state.seed = seed;
  state.generator.initialize(splitmix64(seed ^ 0x47454E00ull));
  state.discriminator.initialize(splitmix64(seed ^ 0x44495300ull));
  return state;
}

StepLosses train_step(TrainState& state, const SpectralImage& real, LatentPoint z, const TrainOptions& options,
                      const StepHooks* hooks) {
  StepLosses losses;
  Tensor<float> fake;
  {
    Graph<float> g;
    Var zv = g.constant(latent_tensor(std::span<const LatentPoint>(&z, 1)));
    Var image = state.generator.forward(g, zv, BatchNormMode::train);
    Var logit = state.discriminator.forward(g, image, /*trainable=*/false);
    Var loss = options.loss_form == GeneratorLossForm::minimax
                   ? ops::scale(g, ops::bce_with_logits(g, logit, 0.0), -1.0)
                   : ops::bce_with_logits(g, logit, 1.0);
    losses.g_loss = g.value(loss)[0];
    check_loss(losses.g_loss, "generator", state);
    fake = g.value(image);
    if (hooks && hooks->on_generated) hooks->on_generated(fake);
    g.backward(loss);
    auto params = state.generator.parameters();
    adam_step<float>(params, options.adam);
  }
  {
    Graph<float> g;
    if (hooks && hooks->on_discriminator_fake) hooks->on_discriminator_fake(fake);
    Var real_x = g.constant(image_tensor(std::span<const SpectralImage>(&real, 1)));
    Var fake_x = g.constant(std::move(fake));
    Var real_logit = state.discriminator.forward(g, real_x);
    Var fake_logit = state.discriminator.forward(g, fake_x);
    Var loss = ops::add(g, ops::bce_with_logits(g, real_logit, 1.0), ops::bce_with_logits(g, fake_logit, 0.0));
    losses.d_loss = g.value(loss)[0];
    check_loss(losses.d_loss, "discriminator", state);
    g.backward(loss);
    auto params = state.discriminator.parameters();
    adam_step<float>(params, options.adam);
  }
  return losses;
}

StepLosses train_step(TrainState& state, const SpectralImage& real, std::mt19937_64& rng, const TrainOptions& options,
                      const StepHooks* hooks) {
  std::normal_distribution<double> normal(0.0, 1.0);
  LatentPoint z;
  z.x = normal(rng);
  z.y = normal(rng);
  return train_step(state, real, z, options, hooks);
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, std::size_t epoch, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(epoch_seed(seed, epoch));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

void train(TrainState& state, std::span<const SpectralImage> dataset, std::size_t epochs, const TrainOptions& options,
           const std::function<void(const EpochSummary&)>& on_epoch) {
  if (dataset.empty()) throw std::invalid_argument("train: dataset is empty");
  while (state.epoch < epochs) {
    const auto order = epoch_order(state.seed, state.epoch, dataset.size());
    // Separate stream for latent draws so the permutation does not shift them.
    std::mt19937_64 rng(epoch_seed(state.seed ^ 0x5A5A5A5Aull, state.epoch));
    EpochSummary summary;
    for (std::size_t index : order) {
      const StepLosses step = train_step(state, dataset[index], rng, options);
      state.loss_history.push_back(step);
      summary.mean_g_loss += step.g_loss;
      summary.mean_d_loss += step.d_loss;
    }
    ++state.epoch;
    summary.epoch = state.epoch;
    summary.mean_g_loss /= static_cast<double>(dataset.size());
    summary.mean_d_loss /= static_cast<double>(dataset.size());
    if (on_epoch) on_epoch(summary);
  }
}

}  // namespace snakesynth
