#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "snakesynth/synth.hpp"

namespace snakesynth {

inline constexpr int kProtocolVersion = 1;

struct SessionConfig {
  int sample_rate = 16000;
  std::size_t block = kBlockSize;
  /// Silent blocks keep flowing this long after the last activity, then stop.
  double idle_tail = 1.0;
  /// How far audio is rendered ahead of the wall clock.
  double lookahead = 0.064;
  /// tanh stage before quantization.
  bool soft_clip = false;
  std::string mosaic_route = "/mosaic.pgm";
  TriggerPolicy policy;
};

/// Result of one client message.
struct SessionReply {
  std::vector<std::string> messages;
  bool close = false;
};

/// Protocol state of one connection, independent of any socket.
///
/// Client -> server: {"type":"hello","version":1}
///                   {"type":"pointer","x":..,"y":..,"t":..,"kind":"down|move|up","seq":..}
/// Server -> client: hello, grid, pointer {ack}, audio {seq,start,samples,pcm}, error {code,message}.
/// `now` is seconds on the server's monotonic clock.
class Session {
 public:
  Session(const ClipBank& bank, GridSpec spec, SessionConfig config, std::string id);

  /// Messages sent right after the connection opens: hello and grid.
  std::vector<std::string> open() const;
  SessionReply handle(std::string_view text);
  /// Audio messages due at `now`.
  std::vector<std::string> pump(double now);

  /// True while no audio is being streamed.
  bool suppressed() const { return suppressed_; }
  const LiveRenderer& renderer() const { return renderer_; }
  const std::string& id() const { return id_; }
  std::uint64_t blocks_sent() const { return block_seq_; }

 private:
  std::string error(std::string_view code, std::string_view message) const;

  const ClipBank* bank_;
  GridSpec spec_;
  SessionConfig config_;
  std::string id_;
  EventQueue queue_;
  LiveRenderer renderer_;
  std::optional<double> last_pointer_t_;
  bool suppressed_ = true;
  double anchor_wall_ = 0.0;
  std::int64_t anchor_sample_ = 0;
  std::uint64_t block_seq_ = 0;
};

/// Little-endian 16-bit PCM of `samples`, base64 encoded.
std::string encode_pcm_block(std::span<const float> samples, bool soft_clip = false);
/// Inverse of encode_pcm_block; throws std::invalid_argument on bad input.
std::vector<std::int16_t> decode_pcm_block(std::string_view text);

}  // namespace snakesynth
