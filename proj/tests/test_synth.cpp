#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <thread>

#include "snakesynth/synth.hpp"
#include "support.hpp"

using namespace snakesynth;
using namespace snakesynth::testing;

namespace {

constexpr int kSr = 16000;
constexpr std::size_t kL = 16640;

const ClipBank& bank5() {
  static const ClipBank bank = tone_bank(5, kL, kSr);
  return bank;
}

// Distinct cells visited along a segment, found by dense sampling.
std::vector<Cell> sampled_cells(const GridSpec& g, double x0, double y0, double x1, double y1) {
  std::vector<Cell> cells{g.cell_at(x0, y0)};
  constexpr int steps = 200000;
  for (int k = 1; k <= steps; ++k) {
    const double s = static_cast<double>(k) / steps;
    const Cell c = g.cell_at(x0 + s * (x1 - x0), y0 + s * (y1 - y0));
    if (c != cells.back()) cells.push_back(c);
  }
  return cells;
}

std::vector<float> add_padded(const std::vector<float>& a, const std::vector<float>& b) {
  std::vector<float> out(std::max(a.size(), b.size()), 0.0f);
  for (std::size_t k = 0; k < a.size(); ++k) out[k] += a[k];
  for (std::size_t k = 0; k < b.size(); ++k) out[k] += b[k];
  return out;
}

}  // namespace

TEST(Triggers, SingleDownFiresItsCell) {
  const std::vector<PointerEvent> ev{{0.5, 0.5, 0.0, PointerKind::down}};
  const auto trig = pointer_to_triggers(ev, GridSpec{5, 0.95});
  ASSERT_EQ(trig.size(), 1u);
  EXPECT_EQ(trig[0].cell, (Cell{2, 2}));
  EXPECT_EQ(trig[0].gain, 1.0);
}

TEST(Triggers, StraightDragMatchesCellCrossingGeometry) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n : {3u, 5u, 8u}) {
    const GridSpec g{n, 0.95};
    for (int rep = 0; rep < 40; ++rep) {
      const double x0 = u(rng), y0 = u(rng), x1 = u(rng), y1 = u(rng);
      const std::vector<Cell> expected = sampled_cells(g, x0, y0, x1, y1);
      const std::vector<PointerEvent> ev{{x0, y0, 0.0, PointerKind::down},
                                         {x1, y1, 1.0, PointerKind::move},
                                         {x1, y1, 1.1, PointerKind::up}};
      const auto trig = pointer_to_triggers(ev, g, TriggerPolicy{0.0});
      ASSERT_EQ(trig.size(), expected.size()) << n << " rep " << rep;
      for (std::size_t k = 0; k < trig.size(); ++k) {
        EXPECT_EQ(trig[k].cell, expected[k]);
        if (k > 0) EXPECT_GE(trig[k].t, trig[k - 1].t);
      }
    }
  }
}

TEST(Triggers, CrossingTimesAreInterpolated) {
  // 0.1 -> 0.9 in one second on N=5 crosses x = 0.2, 0.4, 0.6, 0.8.
  const std::vector<PointerEvent> ev{{0.1, 0.5, 0.0, PointerKind::down}, {0.9, 0.5, 1.0, PointerKind::move}};
  const auto trig = pointer_to_triggers(ev, GridSpec{5, 0.95});
  ASSERT_EQ(trig.size(), 5u);
  for (std::size_t k = 1; k < 5; ++k) EXPECT_NEAR(trig[k].t, (0.2 * k - 0.1) / 0.8, 1e-12);
}

TEST(Triggers, MovesInsideOneCellAddNothing) {
  std::vector<PointerEvent> ev{{0.45, 0.45, 0.0, PointerKind::down}};
  for (int k = 1; k < 50; ++k) ev.push_back({0.41 + 0.003 * (k % 7), 0.42 + 0.002 * (k % 5), 0.01 * k, PointerKind::move});
  EXPECT_EQ(pointer_to_triggers(ev, GridSpec{5, 0.95}).size(), 1u);
}

TEST(Triggers, UpFiresNothingAndMovesWithoutDownAreIgnored) {
  const std::vector<PointerEvent> ev{{0.1, 0.1, 0.0, PointerKind::move},
                                     {0.9, 0.9, 0.5, PointerKind::move},
                                     {0.5, 0.5, 1.0, PointerKind::up}};
  EXPECT_TRUE(pointer_to_triggers(ev, GridSpec{5, 0.95}).empty());
}

TEST(Triggers, RefractoryGuardHoldsForEveryCell) {
  // Fast back-and-forth across the 0.4 boundary.
  std::vector<PointerEvent> ev{{0.39, 0.5, 0.0, PointerKind::down}};
  for (int k = 1; k <= 200; ++k) ev.push_back({k % 2 ? 0.41 : 0.39, 0.5, 0.004 * k, PointerKind::move});
  const TriggerPolicy policy{0.05};
  const auto trig = pointer_to_triggers(ev, GridSpec{5, 0.95}, policy);
  ASSERT_GT(trig.size(), 2u);
  std::map<Cell, double> last;
  for (const auto& t : trig) {
    if (auto it = last.find(t.cell); it != last.end()) EXPECT_GE(t.t - it->second, policy.t_min);
    last[t.cell] = t.t;
  }
  // Repeated downs on one cell obey the same guard.
  const std::vector<PointerEvent> taps{{0.5, 0.5, 0.0, PointerKind::down}, {0.5, 0.5, 0.01, PointerKind::up},
                                       {0.5, 0.5, 0.02, PointerKind::down}, {0.5, 0.5, 0.03, PointerKind::up},
                                       {0.5, 0.5, 0.06, PointerKind::down}};
  EXPECT_EQ(pointer_to_triggers(taps, GridSpec{5, 0.95}, policy).size(), 2u);
}

TEST(Triggers, OutOfOrderEventsAreDroppedWithDiagnostic) {
  const std::vector<PointerEvent> ev{{0.1, 0.1, 1.0, PointerKind::down},
                                     {0.9, 0.9, 0.5, PointerKind::down},
                                     {0.5, 0.1, 1.2, PointerKind::move}};
  std::vector<std::string> diag;
  const auto trig = pointer_to_triggers(ev, GridSpec{5, 0.95}, {}, &diag);
  ASSERT_EQ(diag.size(), 1u);
  EXPECT_NE(diag[0].find("out-of-order"), std::string::npos);
  ASSERT_EQ(trig.size(), 3u);
  EXPECT_EQ(trig.back().cell, (Cell{2, 0}));
  for (const auto& t : trig) EXPECT_NE(t.cell, (Cell{4, 4}));
}

TEST(Triggers, CoordinatesAreClamped) {
  const std::vector<PointerEvent> ev{{-0.5, 1.7, 0.0, PointerKind::down}};
  EXPECT_EQ(pointer_to_triggers(ev, GridSpec{5, 0.95})[0].cell, (Cell{0, 4}));
}

TEST(Render, EmptyScheduleIsSilenceOfRequestedLength) {
  const ScheduledMix mix(bank5(), kSr);
  const AudioBuffer out = render(mix, 0.75);
  EXPECT_EQ(out.samples.size(), 12000u);
  EXPECT_TRUE(std::all_of(out.samples.begin(), out.samples.end(), [](float v) { return v == 0.0f; }));
  EXPECT_TRUE(render(mix).samples.empty());
}

TEST(Render, MatchesDirectSumAndLengthLaw) {
  const std::vector<TriggerEvent> ev{{0.0, {0, 0}}, {0.3, {4, 1}, 0.5}, {0.30001, {2, 2}}, {1.7, {1, 3}}};
  const ScheduledMix mix(bank5(), kSr, ev);
  const AudioBuffer out = render(mix);
  ASSERT_EQ(out.samples.size(), static_cast<std::size_t>(std::llround(1.7 * kSr)) + kL);
  for (std::size_t n = 0; n < out.samples.size(); n += 37) {
    double want = 0.0;
    for (const auto& e : ev) {
      const auto s = static_cast<long long>(std::llround(e.t * kSr));
      const long long k = static_cast<long long>(n) - s;
      if (k >= 0 && k < static_cast<long long>(kL)) want += e.gain * bank5().at(e.cell).samples[k];
    }
    EXPECT_NEAR(out.samples[n], want, 1e-7) << n;
  }
  // until_t drops the late trigger.
  EXPECT_EQ(render(mix, 1.0).samples.size(), static_cast<std::size_t>(std::llround(0.30001 * kSr)) + kL);
}

TEST(Render, LinearityAndDoubling) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> t(0.0, 2.0);
  std::uniform_int_distribution<std::size_t> c(0, 4);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<TriggerEvent> a, b, both;
    for (int k = 0; k < 6; ++k) a.push_back({t(rng), {c(rng), c(rng)}});
    for (int k = 0; k < 4; ++k) b.push_back({t(rng), {c(rng), c(rng)}});
    both = a;
    both.insert(both.end(), b.begin(), b.end());
    const auto ra = render(ScheduledMix(bank5(), kSr, a)).samples;
    const auto rb = render(ScheduledMix(bank5(), kSr, b)).samples;
    const auto rab = render(ScheduledMix(bank5(), kSr, both)).samples;
    const auto sum = add_padded(ra, rb);
    ASSERT_EQ(rab.size(), sum.size());
    for (std::size_t n = 0; n < sum.size(); ++n) ASSERT_NEAR(rab[n], sum[n], 1e-6);
  }
  const auto single = render(ScheduledMix(bank5(), kSr, {{0.2, {3, 1}}})).samples;
  const auto pair = render(ScheduledMix(bank5(), kSr, {{0.2, {3, 1}}, {0.2, {3, 1}}})).samples;
  ASSERT_EQ(single.size(), pair.size());
  for (std::size_t n = 0; n < single.size(); ++n) ASSERT_EQ(pair[n], 2.0f * single[n]);
}

TEST(Render, ShiftingTriggersShiftsOutputExactly) {
  const std::vector<TriggerEvent> ev{{0.1, {0, 1}}, {0.25, {3, 3}}, {0.9, {2, 4}, 0.7}};
  const auto base = render(ScheduledMix(bank5(), kSr, ev)).samples;
  for (double delta : {0.5, 1.25, 0.0625}) {
    std::vector<TriggerEvent> shifted = ev;
    for (auto& e : shifted) e.t += delta;
    const auto out = render(ScheduledMix(bank5(), kSr, shifted)).samples;
    const auto d = static_cast<std::size_t>(std::llround(delta * kSr));
    ASSERT_EQ(out.size(), base.size() + d);
    for (std::size_t n = 0; n < d; ++n) ASSERT_EQ(out[n], 0.0f);
    for (std::size_t n = 0; n < base.size(); ++n) ASSERT_EQ(out[n + d], base[n]);
  }
}

TEST(Render, RejectsInvalidTriggers) {
  EXPECT_THROW(render(ScheduledMix(bank5(), kSr, {{0.1, {5, 0}}})), std::out_of_range);
  EXPECT_THROW(render(ScheduledMix(bank5(), kSr, {{-0.1, {0, 0}}})), std::invalid_argument);
  EXPECT_THROW(render(ScheduledMix(bank5(), kSr, {{0.1, {0, 0}, 0.0}})), std::invalid_argument);
}

TEST(ScheduledMix, StableOrderForEqualTimes) {
  ScheduledMix mix(bank5(), kSr, {{0.5, {1, 1}}, {0.2, {0, 0}}, {0.5, {2, 2}}});
  mix.add({0.5, {3, 3}});
  mix.add({0.1, {4, 4}});
  const std::vector<Cell> order{{4, 4}, {0, 0}, {1, 1}, {2, 2}, {3, 3}};
  ASSERT_EQ(mix.triggers.size(), order.size());
  for (std::size_t k = 0; k < order.size(); ++k) EXPECT_EQ(mix.triggers[k].cell, order[k]);
}

TEST(EnvelopePeak, OverlapRaisesPeakMonotonically) {
  const double L = static_cast<double>(kL);
  const std::vector<double> one{0.0};
  EXPECT_NEAR(envelope_peak(one, kL, kSr), 1.0, 1e-8);
  const std::vector<double> same{0.0, 0.0};
  EXPECT_NEAR(envelope_peak(same, kL, kSr), 2.0, 2e-8);
  for (double off : {L, L + 1.0, 3.0 * L}) {
    const std::vector<double> apart{0.0, off / kSr};
    EXPECT_NEAR(envelope_peak(apart, kL, kSr), 1.0, 1e-8);
  }
  double prev = 3.0;
  for (int k = 0; k < 100; ++k) {
    const std::vector<double> pair{0.0, k * L / 99.0 / kSr};
    const double p = envelope_peak(pair, kL, kSr);
    EXPECT_LE(p, prev + 1e-12) << k;
    prev = p;
  }
}

TEST(StreamingMixer, BlocksEqualOfflineRenderBitwise) {
  const std::vector<TriggerEvent> ev{{0.0, {0, 0}}, {0.013, {1, 2}}, {0.4, {4, 4}, 0.3}, {0.4, {2, 0}}, {1.95, {3, 1}}};
  const auto offline = render(ScheduledMix(bank5(), kSr, ev)).samples;
  StreamingMixer mixer(bank5());
  std::vector<float> streamed;
  std::size_t next = 0;
  while (streamed.size() < offline.size()) {
    const auto end = static_cast<std::int64_t>(streamed.size() + kBlockSize);
    while (next < ev.size() && trigger_sample(ev[next].t, kSr) < end) {
      mixer.schedule(trigger_sample(ev[next].t, kSr), ev[next].cell, ev[next].gain);
      ++next;
    }
    const auto block = mixer.next_block();
    ASSERT_EQ(block.size(), kBlockSize);
    streamed.insert(streamed.end(), block.begin(), block.end());
  }
  EXPECT_FALSE(mixer.active());
  for (std::size_t n = 0; n < offline.size(); ++n) ASSERT_EQ(streamed[n], offline[n]) << n;
  for (std::size_t n = offline.size(); n < streamed.size(); ++n) ASSERT_EQ(streamed[n], 0.0f);
}

TEST(StreamingMixer, LateStartsAreClampedAndSeekNeedsIdle) {
  StreamingMixer mixer(bank5());
  mixer.next_block();
  mixer.schedule(10, {0, 0});
  EXPECT_EQ(mixer.last_voice_end(), static_cast<std::int64_t>(kBlockSize + kL));
  EXPECT_THROW(mixer.seek(100000), std::logic_error);
}

TEST(EventQueue, ConcurrentProducersYieldOneOrderedStream) {
  EventQueue q;
  std::vector<std::thread> producers;
  for (int p = 0; p < 4; ++p) {
    producers.emplace_back([&q, p] {
      std::mt19937_64 rng(static_cast<std::uint64_t>(p));
      std::uniform_real_distribution<double> t(0.0, 10.0);
      for (int k = 0; k < 1000; ++k) q.push({0.0, 0.0, t(rng), PointerKind::move});
    });
  }
  std::vector<PointerEvent> drained;
  for (int k = 0; k < 20; ++k) {
    auto part = q.pop_before(0.1 * k);
    drained.insert(drained.end(), part.begin(), part.end());
  }
  for (auto& th : producers) th.join();
  auto rest = q.pop_before(1e9);
  EXPECT_TRUE(q.empty());
  EXPECT_EQ(drained.size() + rest.size(), 4000u);
  EXPECT_TRUE(std::is_sorted(rest.begin(), rest.end(), [](auto& a, auto& b) { return a.t < b.t; }));
}

TEST(EventQueue, EqualTimesKeepArrivalOrder) {
  EventQueue q;
  for (int k = 0; k < 5; ++k) q.push({0.1 * k, 0.0, 1.0, PointerKind::move});
  q.push({0.0, 0.0, 0.5, PointerKind::down});
  const auto out = q.pop_before(2.0);
  ASSERT_EQ(out.size(), 6u);
  EXPECT_EQ(out[0].kind, PointerKind::down);
  for (int k = 0; k < 5; ++k) EXPECT_DOUBLE_EQ(out[k + 1].x, 0.1 * k);
  EXPECT_FALSE(q.next_time().has_value());
}

TEST(LiveRenderer, MatchesOfflineRenderOfTheSameGesture) {
  const GridSpec g{5, 0.95};
  GestureParams p;
  p.duration = 1.5;
  auto gesture = simulate_gesture(GestureKind::circular, p);
  for (auto& e : gesture) e.t += 12.0;  // arbitrary wall-clock origin
  EventQueue q;
  for (const auto& e : gesture) q.push(e);

  LiveRenderer live(bank5(), g, kSr);
  std::vector<float> streamed;
  while (!q.empty() || live.active()) {
    const auto b = live.render_block(q);
    streamed.insert(streamed.end(), b.begin(), b.end());
  }
  auto trig = pointer_to_triggers(gesture, g);
  for (auto& t : trig) t.t -= 12.0;
  ASSERT_EQ(live.triggers().size(), trig.size());
  const auto offline = render(ScheduledMix(bank5(), kSr, trig)).samples;
  ASSERT_GE(streamed.size(), offline.size());
  for (std::size_t n = 0; n < offline.size(); ++n) ASSERT_EQ(streamed[n], offline[n]) << n;
}

TEST(LiveRenderer, SkipIdleJumpsToTheNextEventBlock) {
  EventQueue q;
  q.push({0.5, 0.5, 100.0, PointerKind::down});
  q.push({0.5, 0.5, 100.05, PointerKind::up});
  q.push({0.1, 0.1, 105.0, PointerKind::down});
  LiveRenderer live(bank5(), GridSpec{5, 0.95}, kSr);
  while (q.size() > 1 || live.active()) live.render_block(q);
  EXPECT_LT(live.position(), 5 * kSr);
  live.skip_idle(q);
  EXPECT_EQ(live.position(), 5 * kSr / 256 * 256);
  live.render_block(q);
  ASSERT_EQ(live.triggers().size(), 2u);
  EXPECT_DOUBLE_EQ(live.triggers()[1].t, 5.0);
  EXPECT_EQ(live.last_activity(), 5 * kSr + static_cast<std::int64_t>(kL));
}

TEST(Gestures, LinearLengthLaw) {
  const GridSpec g{5, 0.95};
  for (double d : {0.5, 1.0, 2.0}) {
    GestureParams p;
    p.duration = d;
    const auto trig = pointer_to_triggers(simulate_gesture(GestureKind::linear, p), g);
    const auto out = render(ScheduledMix(bank5(), kSr, trig));
    const double expected = d * kSr + static_cast<double>(kL);
    EXPECT_LE(std::abs(static_cast<double>(out.samples.size()) - expected), 256.0) << d;
    EXPECT_EQ(out.samples.size(), static_cast<std::size_t>(std::llround(trig.back().t * kSr)) + kL);
  }
}

TEST(Gestures, LongerDragsProduceLongerAudio) {
  const GridSpec g{5, 0.95};
  std::size_t prev_triggers = 0, prev_len = 0;
  for (double d : {0.5, 1.0, 1.5, 2.0}) {
    GestureParams p;
    p.duration = d;
    const auto trig = pointer_to_triggers(simulate_gesture(GestureKind::linear, p), g);
    const auto len = render(ScheduledMix(bank5(), kSr, trig)).samples.size();
    EXPECT_GT(trig.size(), prev_triggers);
    EXPECT_GT(len, prev_len);
    prev_triggers = trig.size();
    prev_len = len;
  }
}

TEST(Gestures, CircularIsRhythmic) {
  GestureParams p;
  p.duration = 10.0;
  p.period = 1.0;
  const auto trig = pointer_to_triggers(simulate_gesture(GestureKind::circular, p), GridSpec{5, 0.95});
  std::map<Cell, std::vector<double>> times;
  for (const auto& t : trig) times[t.cell].push_back(t.t);
  std::vector<double> iv;
  for (const auto& [cell, ts] : times)
    for (std::size_t k = 1; k < ts.size(); ++k) iv.push_back(ts[k] - ts[k - 1]);
  ASSERT_GT(iv.size(), 50u);
  double mean = 0.0;
  for (double v : iv) mean += v;
  mean /= static_cast<double>(iv.size());
  double var = 0.0;
  for (double v : iv) var += (v - mean) * (v - mean);
  const double cv = std::sqrt(var / static_cast<double>(iv.size())) / mean;
  EXPECT_LT(cv, 0.1);
  EXPECT_NEAR(mean, 1.0, 0.05);
}

TEST(Gestures, ChaoticTriggersFasterThanLinear) {
  const GridSpec g{5, 0.95};
  GestureParams p;
  p.duration = 2.0;
  p.speed = 1.5;
  p.start_x = 0.5;
  const auto lin = pointer_to_triggers(simulate_gesture(GestureKind::linear, p), g);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto chaos = pointer_to_triggers(simulate_gesture(GestureKind::chaotic, p, seed), g);
    EXPECT_GT(chaos.size(), lin.size()) << seed;
  }
}

TEST(Gestures, DeterministicAndWellFormed) {
  for (GestureKind k : {GestureKind::click, GestureKind::linear, GestureKind::direction_change, GestureKind::circular,
                        GestureKind::chaotic}) {
    const auto a = simulate_gesture(k, {}, 11);
    const auto b = simulate_gesture(k, {}, 11);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].x, b[i].x);
      EXPECT_EQ(a[i].t, b[i].t);
      EXPECT_GE(a[i].x, 0.0);
      EXPECT_LE(a[i].x, 1.0);
      EXPECT_GE(a[i].y, 0.0);
      EXPECT_LE(a[i].y, 1.0);
      if (i > 0) EXPECT_GE(a[i].t, a[i - 1].t);
    }
    EXPECT_EQ(a.front().kind, PointerKind::down);
    EXPECT_EQ(a.back().kind, PointerKind::up);
    EXPECT_EQ(parse_gesture_kind(to_string(k)), k);
  }
  const auto click = pointer_to_triggers(simulate_gesture(GestureKind::click, {}), GridSpec{5, 0.95});
  EXPECT_EQ(click.size(), 1u);
  EXPECT_THROW(parse_gesture_kind("zigzag"), std::invalid_argument);
  GestureParams bad;
  bad.duration = -1;
  EXPECT_THROW(simulate_gesture(GestureKind::linear, bad), std::invalid_argument);
}

TEST(Gestures, LinearAt60EventsPerSecond) {
  GestureParams p;
  p.duration = 1.0;
  const auto ev = simulate_gesture(GestureKind::linear, p);
  EXPECT_EQ(ev.size(), 62u);  // down at 0, moves at k/60 for k=1..60, up
  EXPECT_NEAR(ev[1].t - ev[0].t, 1.0 / 60.0, 1e-15);
}
