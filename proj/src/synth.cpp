#include "snakesynth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "snakesynth/inversion.hpp"

namespace snakesynth {

std::string_view to_string(PointerKind kind) {
  switch (kind) {
    case PointerKind::down: return "down";
    case PointerKind::move: return "move";
    case PointerKind::up: return "up";
  }
  return "?";
}

PointerKind parse_pointer_kind(std::string_view text) {
  if (text == "down") return PointerKind::down;
  if (text == "move") return PointerKind::move;
  if (text == "up") return PointerKind::up;
  throw std::invalid_argument("unknown pointer kind '" + std::string(text) + "'");
}

TriggerTracker::TriggerTracker(GridSpec spec, TriggerPolicy policy) : spec_(spec), policy_(policy) {
  spec_.validate();
  if (!(policy_.t_min >= 0.0)) throw std::invalid_argument("t_min must be >= 0");
}

void TriggerTracker::fire(Cell cell, double t, std::vector<TriggerEvent>& out) {
  auto it = fired_at_.find(cell);
  if (it != fired_at_.end() && t - it->second < policy_.t_min) return;
  fired_at_[cell] = t;
  last_fired_ = cell;
  out.push_back({t, cell, 1.0});
}

bool TriggerTracker::feed(const PointerEvent& e, std::vector<TriggerEvent>& out) {
  if (!std::isfinite(e.t) || !std::isfinite(e.x) || !std::isfinite(e.y)) {
    diagnostics_.push_back("dropped pointer event with non-finite fields");
    return false;
  }
  if (last_t_ && e.t < *last_t_) {
    diagnostics_.push_back("dropped out-of-order pointer event at t=" + std::to_string(e.t) +
                           " (previous t=" + std::to_string(*last_t_) + ")");
    return false;
  }
  const double x = std::clamp(e.x, 0.0, 1.0);
  const double y = std::clamp(e.y, 0.0, 1.0);
  const double t0 = last_t_.value_or(e.t);
  const double x0 = last_x_, y0 = last_y_;
  last_t_ = e.t;
  last_x_ = x;
  last_y_ = y;

  switch (e.kind) {
    case PointerKind::down:
      held_ = true;
      fire(spec_.cell_at(x, y), e.t, out);
      return true;
    case PointerKind::up:
      held_ = false;
      return true;
    case PointerKind::move:
      break;
  }
  if (!held_) return true;

  // Walk the grid cells crossed by the segment (x0,y0) -> (x,y).
  Cell c = spec_.cell_at(x0, y0);
  const Cell target = spec_.cell_at(x, y);
  const double n = static_cast<double>(spec_.n);
  const int step_i = target.i > c.i ? 1 : -1;
  const int step_j = target.j > c.j ? 1 : -1;
  auto crossing = [n](std::size_t idx, int step, double from, double to) {
    const double boundary = (step > 0 ? static_cast<double>(idx + 1) : static_cast<double>(idx)) / n;
    return (boundary - from) / (to - from);
  };
  constexpr double inf = std::numeric_limits<double>::infinity();
  while (c != target) {
    const double si = c.i != target.i ? crossing(c.i, step_i, x0, x) : inf;
    const double sj = c.j != target.j ? crossing(c.j, step_j, y0, y) : inf;
    const double s = std::clamp(std::min(si, sj), 0.0, 1.0);
    if (si <= sj) c.i = static_cast<std::size_t>(static_cast<long long>(c.i) + step_i);
    if (sj <= si) c.j = static_cast<std::size_t>(static_cast<long long>(c.j) + step_j);
    if (!last_fired_ || c != *last_fired_) fire(c, t0 + s * (e.t - t0), out);
  }
  return true;
}

std::vector<TriggerEvent> pointer_to_triggers(std::span<const PointerEvent> events, const GridSpec& spec,
                                              const TriggerPolicy& policy, std::vector<std::string>* diagnostics) {
  TriggerTracker tracker(spec, policy);
  std::vector<TriggerEvent> out;
  for (const PointerEvent& e : events) tracker.feed(e, out);
  if (diagnostics) *diagnostics = tracker.diagnostics();
  return out;
}

ScheduledMix::ScheduledMix(const ClipBank& bank, int rate, std::vector<TriggerEvent> events)
    : triggers(std::move(events)), clips(&bank), sample_rate(rate) {
  std::stable_sort(triggers.begin(), triggers.end(),
                   [](const TriggerEvent& a, const TriggerEvent& b) { return a.t < b.t; });
}

void ScheduledMix::add(const TriggerEvent& e) {
  auto pos = std::upper_bound(triggers.begin(), triggers.end(), e.t,
                              [](double t, const TriggerEvent& other) { return t < other.t; });
  triggers.insert(pos, e);
}

std::int64_t trigger_sample(double t, int sample_rate) {
  return static_cast<std::int64_t>(std::llround(t * static_cast<double>(sample_rate)));
}

namespace {

void check_trigger(const TriggerEvent& e, const ClipBank& bank) {
  if (!(e.t >= 0.0) || !std::isfinite(e.t)) throw std::invalid_argument("trigger time must be finite and >= 0");
  if (!(e.gain > 0.0) || !std::isfinite(e.gain)) throw std::invalid_argument("trigger gain must be positive");
  if (e.cell.i >= bank.n() || e.cell.j >= bank.n()) throw std::out_of_range("trigger cell outside the grid");
}

}  // namespace

AudioBuffer render(const ScheduledMix& mix, double until_t) {
  if (!mix.clips) throw std::invalid_argument("mix has no clip bank");
  const ClipBank& bank = *mix.clips;
  const std::size_t L = bank.clip_length();
  std::int64_t last_start = -1;
  for (const TriggerEvent& e : mix.triggers) {
    if (!(e.t < until_t)) break;
    check_trigger(e, bank);
    last_start = std::max(last_start, trigger_sample(e.t, mix.sample_rate));
  }
  AudioBuffer out;
  out.sample_rate = mix.sample_rate;
  if (last_start < 0) {
    const double n = std::isfinite(until_t) ? std::max(0.0, until_t * mix.sample_rate) : 0.0;
    out.samples.assign(static_cast<std::size_t>(std::llround(n)), 0.0f);
    return out;
  }
  std::vector<double> acc(static_cast<std::size_t>(last_start) + L, 0.0);
  for (const TriggerEvent& e : mix.triggers) {
    if (!(e.t < until_t)) break;
    const auto start = static_cast<std::size_t>(trigger_sample(e.t, mix.sample_rate));
    const std::vector<float>& clip = bank.at(e.cell).samples;
    for (std::size_t k = 0; k < L; ++k) acc[start + k] += e.gain * clip[k];
  }
  out.samples.assign(acc.begin(), acc.end());
  return out;
}

AudioBuffer render(const ScheduledMix& mix) { return render(mix, std::numeric_limits<double>::infinity()); }

double envelope_peak(std::span<const double> offsets, std::size_t length, int sample_rate) {
  if (offsets.empty() || length == 0) return 0.0;
  const std::vector<double> w = clip_window(length);
  std::vector<std::int64_t> shifts;
  for (double o : offsets) shifts.push_back(trigger_sample(o, sample_rate));
  const std::int64_t lo = *std::min_element(shifts.begin(), shifts.end());
  const std::int64_t hi = *std::max_element(shifts.begin(), shifts.end());
  std::vector<double> sum(static_cast<std::size_t>(hi - lo) + length, 0.0);
  for (std::int64_t s : shifts) {
    const auto base = static_cast<std::size_t>(s - lo);
    for (std::size_t k = 0; k < length; ++k) sum[base + k] += w[k];
  }
  return *std::max_element(sum.begin(), sum.end());
}

StreamingMixer::StreamingMixer(const ClipBank& bank, std::size_t block) : bank_(&bank), block_(block) {
  if (block_ == 0) throw std::invalid_argument("block size must be positive");
}

void StreamingMixer::schedule(std::int64_t start, Cell cell, double gain) {
  const AudioClip& clip = bank_->at(cell);
  start = std::max(start, position_);
  voices_.push_back({start, &clip, gain});
  last_end_ = std::max(last_end_, start + static_cast<std::int64_t>(clip.samples.size()));
}

std::vector<float> StreamingMixer::next_block() {
  const std::int64_t begin = position_;
  const std::int64_t end = position_ + static_cast<std::int64_t>(block_);
  std::vector<double> acc(block_, 0.0);
  for (const Voice& v : voices_) {
    const auto len = static_cast<std::int64_t>(v.clip->samples.size());
    const std::int64_t from = std::max(begin, v.start);
    const std::int64_t to = std::min(end, v.start + len);
    for (std::int64_t n = from; n < to; ++n) acc[static_cast<std::size_t>(n - begin)] += v.gain * v.clip->samples[static_cast<std::size_t>(n - v.start)];
  }
  std::erase_if(voices_, [end](const Voice& v) {
    return v.start + static_cast<std::int64_t>(v.clip->samples.size()) <= end;
  });
  position_ = end;
  return {acc.begin(), acc.end()};
}

void StreamingMixer::seek(std::int64_t sample) {
  if (active()) throw std::logic_error("cannot seek while clips are playing");
  position_ = std::max(position_, sample);
}

void EventQueue::push(const PointerEvent& e) {
  std::lock_guard lock(mutex_);
  auto pos = std::upper_bound(events_.begin(), events_.end(), e.t,
                              [](double t, const PointerEvent& other) { return t < other.t; });
  events_.insert(pos, e);
}

std::vector<PointerEvent> EventQueue::pop_before(double t) {
  std::lock_guard lock(mutex_);
  auto split = std::partition_point(events_.begin(), events_.end(), [t](const PointerEvent& e) { return e.t < t; });
  std::vector<PointerEvent> out(events_.begin(), split);
  events_.erase(events_.begin(), split);
  return out;
}

std::optional<PointerEvent> EventQueue::pop_next_if(PointerKind kind) {
  std::lock_guard lock(mutex_);
  if (events_.empty() || events_.front().kind != kind) return std::nullopt;
  PointerEvent e = events_.front();
  events_.erase(events_.begin());
  return e;
}

std::optional<double> EventQueue::next_time() const {
  std::lock_guard lock(mutex_);
  if (events_.empty()) return std::nullopt;
  return events_.front().t;
}

std::size_t EventQueue::size() const {
  std::lock_guard lock(mutex_);
  return events_.size();
}

LiveRenderer::LiveRenderer(const ClipBank& bank, GridSpec spec, int sample_rate, TriggerPolicy policy,
                           std::size_t block)
    : tracker_(spec, policy), mixer_(bank, block), sample_rate_(sample_rate) {
  if (bank.n() != spec.n) throw std::invalid_argument("clip bank and grid sizes differ");
}

std::int64_t LiveRenderer::timeline_sample(double t) const { return trigger_sample(t - origin_.value_or(t), sample_rate_); }

std::vector<float> LiveRenderer::render_block(EventQueue& queue) {
  if (!origin_) origin_ = queue.next_time();
  if (origin_) {
    const double block_end = static_cast<double>(mixer_.position() + static_cast<std::int64_t>(mixer_.block_size()));
    std::vector<TriggerEvent> fresh;
    std::vector<PointerEvent> due = queue.pop_before(*origin_ + block_end / sample_rate_);
    if (auto ahead = queue.pop_next_if(PointerKind::move)) due.push_back(*ahead);
    for (const PointerEvent& e : due) {
      fresh.clear();
      if (!tracker_.feed(e, fresh)) continue;
      last_event_sample_ = std::max(last_event_sample_, timeline_sample(e.t));
      for (TriggerEvent trig : fresh) {
        trig.t -= *origin_;
        mixer_.schedule(trigger_sample(trig.t, sample_rate_), trig.cell, trig.gain);
        triggers_.push_back(trig);
      }
    }
  }
  return mixer_.next_block();
}

void LiveRenderer::skip_idle(const EventQueue& queue) {
  if (mixer_.active() || !origin_) return;
  const auto next = queue.next_time();
  if (!next) return;
  const auto block = static_cast<std::int64_t>(mixer_.block_size());
  const std::int64_t target = timeline_sample(*next) / block * block;
  if (target > mixer_.position()) mixer_.seek(target);
}

std::int64_t LiveRenderer::last_activity() const { return std::max(last_event_sample_, mixer_.last_voice_end()); }

std::string_view to_string(GestureKind kind) {
  switch (kind) {
    case GestureKind::click: return "click";
    case GestureKind::linear: return "linear";
    case GestureKind::direction_change: return "direction_change";
    case GestureKind::circular: return "circular";
    case GestureKind::chaotic: return "chaotic";
  }
  return "?";
}

GestureKind parse_gesture_kind(std::string_view text) {
  for (GestureKind k : {GestureKind::click, GestureKind::linear, GestureKind::direction_change, GestureKind::circular,
                        GestureKind::chaotic}) {
    if (text == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown gesture kind '" + std::string(text) + "'");
}

void GestureParams::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!(duration > 0.0) || !finite(duration)) throw std::invalid_argument("gesture duration must be positive");
  if (!(rate > 0.0) || !finite(rate)) throw std::invalid_argument("gesture rate must be positive");
  if (!(speed >= 0.0) || !finite(speed)) throw std::invalid_argument("gesture speed must be >= 0");
  if (!(radius > 0.0) || !finite(radius)) throw std::invalid_argument("gesture radius must be positive");
  if (!(period > 0.0) || !finite(period)) throw std::invalid_argument("gesture period must be positive");
  if (!(turn >= 0.0) || !finite(turn)) throw std::invalid_argument("gesture turn must be >= 0");
  for (double v : {start_x, start_y, center_x, center_y}) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("gesture coordinates must lie in [0,1]");
  }
}

std::vector<PointerEvent> simulate_gesture(GestureKind kind, const GestureParams& p, std::uint64_t seed) {
  p.validate();
  std::vector<PointerEvent> out;
  if (kind == GestureKind::click) {
    out.push_back({p.start_x, p.start_y, 0.0, PointerKind::down});
    out.push_back({p.start_x, p.start_y, 0.08, PointerKind::up});
    return out;
  }

  std::vector<double> times;
  const auto steps = static_cast<std::size_t>(std::floor(p.duration * p.rate + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) times.push_back(static_cast<double>(k) / p.rate);
  if (times.back() < p.duration - 1e-12) times.push_back(p.duration);

  const double cx = std::cos(p.heading), cy = std::sin(p.heading);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> turn(-p.turn, p.turn);
  double wx = p.start_x, wy = p.start_y, heading = p.heading, prev_t = 0.0;

  auto position = [&](double t) -> std::pair<double, double> {
    switch (kind) {
      case GestureKind::linear:
        return {p.start_x + p.speed * t * cx, p.start_y + p.speed * t * cy};
      case GestureKind::direction_change: {
        const double d = p.speed * (t <= p.duration / 2 ? t : p.duration - t);
        return {p.start_x + d * cx, p.start_y + d * cy};
      }
      case GestureKind::circular: {
        const double a = 2.0 * std::numbers::pi * t / p.period;
        return {p.center_x + p.radius * std::cos(a), p.center_y + p.radius * std::sin(a)};
      }
      case GestureKind::chaotic: {
        // Random-heading walk reflected at the pad edges.
        const double step = p.speed * (t - prev_t);
        prev_t = t;
        if (step > 0.0) {
          heading += turn(rng);
          wx += step * std::cos(heading);
          wy += step * std::sin(heading);
          if (wx < 0.0 || wx > 1.0) {
            wx = wx < 0.0 ? -wx : 2.0 - wx;
            heading = std::numbers::pi - heading;
          }
          if (wy < 0.0 || wy > 1.0) {
            wy = wy < 0.0 ? -wy : 2.0 - wy;
            heading = -heading;
          }
        }
        return {wx, wy};
      }
      case GestureKind::click:
        break;
    }
    return {p.start_x, p.start_y};
  };

  for (std::size_t k = 0; k < times.size(); ++k) {
    auto [x, y] = position(times[k]);
    out.push_back({std::clamp(x, 0.0, 1.0), std::clamp(y, 0.0, 1.0), times[k],
                   k == 0 ? PointerKind::down : PointerKind::move});
  }
  PointerEvent up = out.back();
  up.kind = PointerKind::up;
  out.push_back(up);
  return out;
}

}  // namespace snakesynth
