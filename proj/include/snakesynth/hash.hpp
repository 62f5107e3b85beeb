#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace snakesynth {

/// 64-bit FNV-1a, used to content-address persisted artifacts.
class Fnv1a {
 public:
  Fnv1a& update(std::span<const std::uint8_t> bytes) {
    for (std::uint8_t b : bytes) {
      state_ ^= b;
      state_ *= 0x100000001B3ull;
    }
    return *this;
  }
  Fnv1a& update(std::string_view text) {
    return update({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  }
  template <typename T>
  Fnv1a& update_values(std::span<const T> values) {
    return update({reinterpret_cast<const std::uint8_t*>(values.data()), values.size_bytes()});
  }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xCBF29CE484222325ull;
};

}  // namespace snakesynth
