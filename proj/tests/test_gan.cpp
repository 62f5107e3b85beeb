#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "snakesynth/gan.hpp"

using namespace snakesynth;

namespace {

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

std::vector<SpectralImage> stripes(std::size_t count) {
  std::vector<SpectralImage> out(count);
  for (std::size_t n = 0; n < count; ++n) {
    for (std::size_t r = 0; r < 64; ++r)
      for (std::size_t c = 0; c < 64; ++c) out[n].at(r, c) = ((r + n * 5) / 8) % 2 ? 0.8f : -0.8f;
  }
  return out;
}

}  // namespace

TEST(Architecture, ParameterCountsAreExact) {
  const TrainState s = TrainState::fresh(1);
  // dense 2*16384+16384, tconv1 5*5*256*128, bn1 2*128, tconv2 5*5*128*64, bn2 2*64, head 5*5*64+1
  EXPECT_EQ(s.generator.param_count(), 49152u + 819200u + 256u + 204800u + 128u + 1601u);
  EXPECT_EQ(s.generator.param_count(), 1075137u);
  EXPECT_GT(s.generator.param_count(), 1000000u);
  // conv1 5*5*64+64, conv2 5*5*64*128+128, dense 32768+1
  EXPECT_EQ(s.discriminator.param_count(), 1664u + 204928u + 32769u);
  EXPECT_EQ(s.discriminator.param_count(), 239361u);
}

TEST(Architecture, InitializationRanges) {
  Generator g;
  g.initialize(3);
  for (const Parameter<float>* p : g.parameters()) {
    const auto d = p->value.data();
    if (p->name.ends_with(".k")) {
      double sq = 0;
      for (float v : d) {
        EXPECT_LE(std::abs(v), 0.04f + 1e-7f) << p->name;
        sq += double(v) * v;
      }
      EXPECT_NEAR(std::sqrt(sq / d.size()), 0.02 * 0.88, 0.002) << p->name;  // normal truncated at 2 sigma
    } else if (p->name.ends_with("gamma")) {
      EXPECT_TRUE(std::all_of(d.begin(), d.end(), [](float v) { return v == 1.0f; }));
    } else if (p->name == "g.dense.w" || p->name == "g.dense.b") {
      const float bound = 1.0f / std::sqrt(2.0f);
      EXPECT_TRUE(std::all_of(d.begin(), d.end(), [bound](float v) { return std::abs(v) <= bound; }));
    }
  }
  Generator a, b;
  a.initialize(3);
  b.initialize(3);
  EXPECT_EQ(a.dense_w.value, b.dense_w.value);
  b.initialize(4);
  EXPECT_NE(a.dense_w.value, b.dense_w.value);
}

TEST(Generator, OutputShapeRangeAndPurity) {
  TrainState s = TrainState::fresh(5);
  EXPECT_EQ(s.generator.default_mode(), BatchNormMode::train);
  const std::vector<LatentPoint> z{{0, 0}, {1.5, -0.3}, {-2, 2}};
  const auto imgs = generator_forward(s.generator, z, BatchNormMode::train);
  ASSERT_EQ(imgs.size(), 3u);
  for (const auto& img : imgs) {
    EXPECT_EQ(img.pixels.size(), 4096u);
    EXPECT_TRUE(img.in_range());
    ASSERT_TRUE(img.meta.has_value());
  }
  EXPECT_EQ(s.generator.bn1_stats.updates, 0u);
  EXPECT_THROW(generator_forward(s.generator, LatentPoint{}, BatchNormMode::infer), GraphError);

  Graph<float> g;
  Var out = s.generator.forward(g, g.constant(latent_tensor(z)), BatchNormMode::train);
  EXPECT_EQ(g.value(out).shape(), (Shape{3, 64, 64, 1}));
  EXPECT_EQ(s.generator.bn1_stats.updates, 1u);
  EXPECT_EQ(s.generator.default_mode(), BatchNormMode::infer);
}

TEST(Discriminator, RejectsWrongShapesAndReturnsLogits) {
  TrainState s = TrainState::fresh(6);
  Graph<float> g;
  EXPECT_THROW(s.discriminator.forward(g, g.constant(Tensor<float>({1, 32, 32, 1}))), ShapeError);
  const auto logits = discriminator_forward(s.discriminator, stripes(2));
  ASSERT_EQ(logits.size(), 2u);
  EXPECT_TRUE(std::isfinite(logits[0]));
}

TEST(Losses, ClosedForms) {
  for (double r : {-3.0, 0.0, 2.5}) {
    for (double f : {-1.0, 0.4, 6.0}) EXPECT_NEAR(discriminator_loss(r, f), softplus(-r) + softplus(f), 1e-12);
  }
  for (double f : {-5.0, 0.0, 3.0}) {
    EXPECT_NEAR(generator_loss(f), softplus(-f), 1e-12);
    EXPECT_NEAR(generator_loss(f, GeneratorLossForm::minimax), -softplus(f), 1e-12);
  }
}

TEST(Losses, RaisingTheFakeLogitHelpsTheGeneratorAndHurtsTheDiscriminator) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int k = 0; k < 200; ++k) {
    double a = u(rng), b = u(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const double real = u(rng);
    EXPECT_GT(generator_loss(a), generator_loss(b));
    EXPECT_GT(generator_loss(a, GeneratorLossForm::minimax), generator_loss(b, GeneratorLossForm::minimax));
    EXPECT_LT(discriminator_loss(real, a), discriminator_loss(real, b));
  }
}

TEST(Training, DiscriminatorSeesTheFakeOfTheSameStep) {
  TrainState s = TrainState::fresh(7);
  const Tensor<float> d_before = s.discriminator.dense_w.value;
  const Tensor<float> g_before = s.generator.dense_w.value;
  Tensor<float> generated, fake;
  StepHooks hooks{[&](const Tensor<float>& t) { generated = t; }, [&](const Tensor<float>& t) { fake = t; }};
  const StepLosses l = train_step(s, stripes(1)[0], LatentPoint{0.3, -0.7}, TrainOptions{}, &hooks);
  EXPECT_TRUE(std::isfinite(l.g_loss) && std::isfinite(l.d_loss));
  EXPECT_EQ(generated.shape(), (Shape{1, 64, 64, 1}));
  EXPECT_EQ(generated, fake);
  EXPECT_NE(s.discriminator.dense_w.value, d_before);
  EXPECT_NE(s.generator.dense_w.value, g_before);
  for (const Parameter<float>* p : s.generator.parameters()) EXPECT_EQ(p->step_count, 1u);
  for (const Parameter<float>* p : s.discriminator.parameters()) EXPECT_EQ(p->step_count, 1u);
}

TEST(Training, EpochOrderIsASeededPermutation) {
  const auto a = epoch_order(7, 0, 8), b = epoch_order(7, 0, 8), c = epoch_order(7, 1, 8);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  std::vector<std::size_t> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> iota(8);
  std::iota(iota.begin(), iota.end(), 0u);
  EXPECT_EQ(sorted, iota);
}

TEST(Training, DeterministicForAFixedSeed) {
  const auto data = stripes(3);
  TrainState a = TrainState::fresh(11), b = TrainState::fresh(11);
  std::vector<EpochSummary> seen;
  train(a, data, 2, TrainOptions{}, [&](const EpochSummary& s) { seen.push_back(s); });
  train(b, data, 2, TrainOptions{});
  ASSERT_EQ(seen.size(), 2u);
  EXPECT_EQ(seen[1].epoch, 2u);
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_EQ(a.loss_history.size(), 6u);
  EXPECT_EQ(a.generator.head_k.value, b.generator.head_k.value);
  EXPECT_EQ(a.discriminator.conv1_k.value, b.discriminator.conv1_k.value);
  double mean_g = 0;
  for (std::size_t k = 3; k < 6; ++k) mean_g += a.loss_history[k].g_loss / 3;
  EXPECT_NEAR(seen[1].mean_g_loss, mean_g, 1e-12);
}

TEST(Training, NonFiniteLossIsReportedAsDivergence) {
  auto data = stripes(1);
  data[0].pixels[100] = std::numeric_limits<float>::quiet_NaN();
  TrainState s = TrainState::fresh(1);
  EXPECT_THROW(train(s, data, 1, TrainOptions{}), TrainingDiverged);
  EXPECT_THROW(train(s, std::span<const SpectralImage>(), 1, TrainOptions{}), std::invalid_argument);
}
