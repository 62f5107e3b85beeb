#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "snakesynth/audio.hpp"
#include "snakesynth/cell.hpp"
#include "snakesynth/latent_grid.hpp"

namespace snakesynth {

inline constexpr std::size_t kBlockSize = 256;

enum class PointerKind { down, move, up };

std::string_view to_string(PointerKind kind);
/// Throws std::invalid_argument for anything but "down", "move", "up".
PointerKind parse_pointer_kind(std::string_view text);

struct PointerEvent {
  double x = 0.0;
  double y = 0.0;
  double t = 0.0;  // seconds
  PointerKind kind = PointerKind::move;
};

struct TriggerEvent {
  double t = 0.0;
  Cell cell;
  double gain = 1.0;

  friend bool operator==(const TriggerEvent&, const TriggerEvent&) = default;
};

struct TriggerPolicy {
  /// Minimum time between two triggers of the same cell.
  double t_min = 0.05;
};

/// Incremental pointer -> trigger conversion.
///
/// A down fires its cell. While the pointer is held, every cell the path
/// enters fires if it differs from the last fired cell and has been quiet for
/// at least t_min. Crossing times are interpolated along each move segment.
/// Every trigger, including the one from a down, respects t_min.
class TriggerTracker {
 public:
  explicit TriggerTracker(GridSpec spec, TriggerPolicy policy = {});

  /// Appends the triggers produced by `e` to `out`. Returns false if the
  /// event was dropped (timestamp older than the previous event).
  bool feed(const PointerEvent& e, std::vector<TriggerEvent>& out);

  const std::vector<std::string>& diagnostics() const { return diagnostics_; }
  const GridSpec& spec() const { return spec_; }

 private:
  void fire(Cell cell, double t, std::vector<TriggerEvent>& out);

  GridSpec spec_;
  TriggerPolicy policy_;
  bool held_ = false;
  std::optional<double> last_t_;
  double last_x_ = 0.0, last_y_ = 0.0;
  std::optional<Cell> last_fired_;
  std::map<Cell, double> fired_at_;
  std::vector<std::string> diagnostics_;
};

std::vector<TriggerEvent> pointer_to_triggers(std::span<const PointerEvent> events, const GridSpec& spec,
                                              const TriggerPolicy& policy = {},
                                              std::vector<std::string>* diagnostics = nullptr);

/// Triggers sorted by time (stable for equal times) against one clip bank.
struct ScheduledMix {
  ScheduledMix(const ClipBank& bank, int sample_rate) : clips(&bank), sample_rate(sample_rate) {}
  ScheduledMix(const ClipBank& bank, int sample_rate, std::vector<TriggerEvent> events);

  /// Inserts after any trigger with the same time.
  void add(const TriggerEvent& e);

  std::vector<TriggerEvent> triggers;
  const ClipBank* clips;
  int sample_rate;
};

/// Start sample of a trigger: round(t * sr).
std::int64_t trigger_sample(double t, int sample_rate);

/// Sums the clips of every trigger earlier than `until_t` at their start
/// samples, without normalization. Length is round(last_t * sr) + L, or
/// round(until_t * sr) of silence when nothing is scheduled before until_t.
AudioBuffer render(const ScheduledMix& mix, double until_t);
/// Renders every trigger.
AudioBuffer render(const ScheduledMix& mix);

/// Peak of the sum of Hann clip windows of `length` samples, shifted by each offset.
double envelope_peak(std::span<const double> offsets, std::size_t length, int sample_rate);

/// Block-wise mixer. Produces the same samples as render() when triggers are
/// scheduled in time order before their start block is rendered.
class StreamingMixer {
 public:
  explicit StreamingMixer(const ClipBank& bank, std::size_t block = kBlockSize);

  /// Starts a clip at `start` (clamped to the current position if late).
  void schedule(std::int64_t start, Cell cell, double gain = 1.0);
  std::vector<float> next_block();
  /// Jumps forward to `sample`; only valid while no clip is playing.
  void seek(std::int64_t sample);

  bool active() const { return !voices_.empty(); }
  std::int64_t position() const { return position_; }
  /// One past the last sample of any clip scheduled so far.
  std::int64_t last_voice_end() const { return last_end_; }
  std::size_t block_size() const { return block_; }

 private:
  struct Voice {
    std::int64_t start;
    const AudioClip* clip;
    double gain;
  };
  const ClipBank* bank_;
  std::size_t block_;
  std::int64_t position_ = 0;
  std::int64_t last_end_ = 0;
  std::vector<Voice> voices_;
};

/// Thread-safe pointer event queue ordered by time, stable for equal times.
class EventQueue {
 public:
  void push(const PointerEvent& e);
  /// Removes and returns every event with t < `t`, in order.
  std::vector<PointerEvent> pop_before(double t);
  /// Removes and returns the earliest event if it is of `kind`.
  std::optional<PointerEvent> pop_next_if(PointerKind kind);
  std::optional<double> next_time() const;
  std::size_t size() const;
  bool empty() const { return size() == 0; }

 private:
  mutable std::mutex mutex_;
  std::vector<PointerEvent> events_;
};

/// Single consumer turning queued pointer events into fixed-size blocks.
/// Event times are measured from the first event ever consumed.
class LiveRenderer {
 public:
  LiveRenderer(const ClipBank& bank, GridSpec spec, int sample_rate, TriggerPolicy policy = {},
               std::size_t block = kBlockSize);

  /// Consumes events that fall before the end of the next block, then renders it.
  /// A move's crossings lie between its own time and the previous event's, so a
  /// move queued just after the block is read ahead. Events arriving late are clamped.
  std::vector<float> render_block(EventQueue& queue);
  /// Moves an idle renderer forward to the block holding the next queued event.
  void skip_idle(const EventQueue& queue);

  std::int64_t position() const { return mixer_.position(); }
  bool active() const { return mixer_.active(); }
  /// Latest sample at which anything happened (clip end or consumed event).
  std::int64_t last_activity() const;
  std::optional<double> origin() const { return origin_; }
  const std::vector<TriggerEvent>& triggers() const { return triggers_; }
  const std::vector<std::string>& diagnostics() const { return tracker_.diagnostics(); }

 private:
  std::int64_t timeline_sample(double t) const;

  TriggerTracker tracker_;
  StreamingMixer mixer_;
  int sample_rate_;
  std::optional<double> origin_;
  std::int64_t last_event_sample_ = 0;
  std::vector<TriggerEvent> triggers_;  // timeline-relative
};

enum class GestureKind { click, linear, direction_change, circular, chaotic };

std::string_view to_string(GestureKind kind);
/// Throws std::invalid_argument naming the unknown kind.
GestureKind parse_gesture_kind(std::string_view text);

struct GestureParams {
  double duration = 1.0;  // seconds
  double rate = 60.0;     // events per second
  double speed = 0.4;     // normalized units per second (linear, direction_change, chaotic)
  double start_x = 0.001;
  double start_y = 0.5;
  double heading = 0.0;  // radians, 0 = +x
  double center_x = 0.5;  // circular
  double center_y = 0.5;
  double radius = 0.35;
  double period = 1.0;
  double turn = 1.2;  // chaotic: max heading change per event, radians

  void validate() const;
};

/// Deterministic pointer stream: a down, moves at `rate`, and an up.
std::vector<PointerEvent> simulate_gesture(GestureKind kind, const GestureParams& params, std::uint64_t seed = 0);

}  // namespace snakesynth
