#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "snakesynth/tensor.hpp"

namespace snakesynth {

// Layout, all integers little-endian:
//   magic[4] | version u16 | config_hash u64 | count u32
//   count x ( name_len u16 | name | rank u8 | extents u32[rank] | values f32[prod(extents)] )
//   crc32 u32 over every preceding byte

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

struct Record {
  std::string name;
  Shape extents;
  std::vector<float> values;
};

struct RecordFile {
  std::array<char, 4> magic{};
  std::uint16_t version = 0;
  std::uint64_t config_hash = 0;
  std::vector<Record> records;

  const Record* find(std::string_view name) const;
  const Record& at(std::string_view name) const;
};

std::vector<std::uint8_t> encode_records(const RecordFile& file);
/// Verifies the trailing CRC32 before parsing anything else.
RecordFile decode_records(std::span<const std::uint8_t> bytes);

/// Writes through a temporary file and renames it into place.
void write_records(const std::filesystem::path& path, const RecordFile& file);
RecordFile read_records(const std::filesystem::path& path);

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

}  // namespace snakesynth
