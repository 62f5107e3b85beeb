#include "snakesynth/session.hpp"

#include <boost/beast/core/detail/base64.hpp>
#include <cmath>
#include <json.hpp>
#include <stdexcept>

#include "snakesynth/wav.hpp"

namespace snakesynth {

using nlohmann::json;
namespace base64 = boost::beast::detail::base64;

std::string encode_pcm_block(std::span<const float> samples, bool soft_clip) {
  std::string raw;
  raw.reserve(samples.size() * 2);
  for (float s : samples) {
    const double v = soft_clip ? std::tanh(static_cast<double>(s)) : static_cast<double>(s);
    const auto q = static_cast<std::uint16_t>(to_pcm16(v));
    raw.push_back(static_cast<char>(q & 0xFF));
    raw.push_back(static_cast<char>(q >> 8));
  }
  std::string out(base64::encoded_size(raw.size()), '\0');
  out.resize(base64::encode(out.data(), raw.data(), raw.size()));
  return out;
}

std::vector<std::int16_t> decode_pcm_block(std::string_view text) {
  std::size_t pad = 0;
  while (pad < 2 && pad < text.size() && text[text.size() - 1 - pad] == '=') ++pad;
  if (text.size() % 4 != 0) throw std::invalid_argument("pcm payload is not valid base64");
  std::string raw(base64::decoded_size(text.size()), '\0');
  // The decoder stops at the first '=' or invalid character.
  const auto [written, read] = base64::decode(raw.data(), text.data(), text.size());
  if (read + pad != text.size() || written % 2 != 0) throw std::invalid_argument("pcm payload is not valid base64");
  std::vector<std::int16_t> out(written / 2);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto lo = static_cast<std::uint8_t>(raw[2 * k]);
    const auto hi = static_cast<std::uint8_t>(raw[2 * k + 1]);
    out[k] = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
  }
  return out;
}

Session::Session(const ClipBank& bank, GridSpec spec, SessionConfig config, std::string id)
    : bank_(&bank),
      spec_(spec),
      config_(std::move(config)),
      id_(std::move(id)),
      renderer_(bank, spec, config_.sample_rate, config_.policy, config_.block) {}

std::vector<std::string> Session::open() const {
  return {json{{"type", "hello"},
               {"version", kProtocolVersion},
               {"sample_rate", config_.sample_rate},
               {"block", config_.block},
               {"session", id_}}
              .dump(),
          json{{"type", "grid"}, {"n", spec_.n}, {"mosaic", config_.mosaic_route}, {"clip_length", bank_->clip_length()}}
              .dump()};
}

std::string Session::error(std::string_view code, std::string_view message) const {
  return json{{"type", "error"}, {"code", code}, {"message", message}}.dump();
}

SessionReply Session::handle(std::string_view text) {
  SessionReply reply;
  json msg = json::parse(text, nullptr, false);
  if (msg.is_discarded() || !msg.is_object()) {
    reply.messages.push_back(error("malformed", "message is not a JSON object"));
    return reply;
  }
  const auto type = msg.find("type");
  if (type == msg.end() || !type->is_string()) {
    reply.messages.push_back(error("malformed", "message has no type"));
    return reply;
  }

  if (*type == "hello") {
    const auto version = msg.find("version");
    if (version == msg.end() || !version->is_number_integer()) {
      reply.messages.push_back(error("malformed", "hello needs an integer version"));
      return reply;
    }
    if (version->get<long long>() != kProtocolVersion) {
      reply.messages.push_back(error("version", "protocol version " + std::to_string(version->get<long long>()) +
                                                    " is not supported (server speaks " +
                                                    std::to_string(kProtocolVersion) + ")"));
      reply.close = true;
      return reply;
    }
    reply.messages.push_back(json{{"type", "hello"}, {"version", kProtocolVersion}, {"ack", true}}.dump());
    return reply;
  }

  if (*type == "pointer") {
    PointerEvent e;
    try {
      e.x = msg.at("x").get<double>();
      e.y = msg.at("y").get<double>();
      e.t = msg.at("t").get<double>();
      e.kind = parse_pointer_kind(msg.at("kind").get<std::string>());
    } catch (const std::exception& ex) {
      reply.messages.push_back(error("malformed", std::string("bad pointer message: ") + ex.what()));
      return reply;
    }
    if (!std::isfinite(e.x) || !std::isfinite(e.y) || !std::isfinite(e.t)) {
      reply.messages.push_back(error("malformed", "pointer fields must be finite"));
      return reply;
    }
    if (last_pointer_t_ && e.t < *last_pointer_t_) {
      reply.messages.push_back(error("out_of_order", "pointer t=" + std::to_string(e.t) +
                                                         " is older than the previous event; dropped"));
      return reply;
    }
    last_pointer_t_ = e.t;
    queue_.push(e);
    json ack{{"type", "pointer"}, {"ack", nullptr}};
    if (auto seq = msg.find("seq"); seq != msg.end()) ack["ack"] = *seq;
    reply.messages.push_back(ack.dump());
    return reply;
  }

  reply.messages.push_back(error("malformed", "unknown message type"));
  return reply;
}

std::vector<std::string> Session::pump(double now) {
  std::vector<std::string> out;
  if (suppressed_) {
    if (queue_.empty()) return out;
    renderer_.skip_idle(queue_);
    suppressed_ = false;
    anchor_wall_ = now;
    anchor_sample_ = renderer_.position();
  }
  const auto rate = static_cast<double>(config_.sample_rate);
  const auto due = anchor_sample_ + static_cast<std::int64_t>(std::ceil((now - anchor_wall_ + config_.lookahead) * rate));
  const auto tail = static_cast<std::int64_t>(std::llround(config_.idle_tail * rate));
  while (renderer_.position() < due) {
    const std::int64_t start = renderer_.position();
    const std::vector<float> block = renderer_.render_block(queue_);
    out.push_back(json{{"type", "audio"},
                       {"seq", block_seq_++},
                       {"start", start},
                       {"samples", block.size()},
                       {"pcm", encode_pcm_block(block, config_.soft_clip)}}
                      .dump());
    if (!renderer_.active() && queue_.empty() && renderer_.position() - renderer_.last_activity() >= tail) {
      suppressed_ = true;
      break;
    }
  }
  return out;
}

}  // namespace snakesynth
