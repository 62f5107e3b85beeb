#include "snakesynth/record_file.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace snakesynth {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }
  std::span<const std::uint8_t> view() const { return out_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw FormatError("record file ends unexpectedly");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

const Record* RecordFile::find(std::string_view name) const {
  for (const Record& r : records) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const Record& RecordFile::at(std::string_view name) const {
  const Record* r = find(name);
  if (!r) throw FormatError("record '" + std::string(name) + "' is missing");
  return *r;
}

std::vector<std::uint8_t> encode_records(const RecordFile& file) {
  Writer w;
  w.bytes(file.magic.data(), 4);
  w.u16(file.version);
  w.u64(file.config_hash);
  w.u32(static_cast<std::uint32_t>(file.records.size()));
  for (const Record& r : file.records) {
    if (r.name.size() > 0xFFFF) throw FormatError("record name too long");
    if (r.extents.empty() || r.extents.size() > 0xFF) throw FormatError("record '" + r.name + "' has invalid rank");
    if (shape_size(r.extents) != r.values.size()) {
      throw FormatError("record '" + r.name + "' extents " + shape_string(r.extents) + " do not match " +
                        std::to_string(r.values.size()) + " values");
    }
    w.u16(static_cast<std::uint16_t>(r.name.size()));
    w.bytes(r.name.data(), r.name.size());
    w.u8(static_cast<std::uint8_t>(r.extents.size()));
    for (std::size_t e : r.extents) w.u32(static_cast<std::uint32_t>(e));
    for (float v : r.values) w.u32(std::bit_cast<std::uint32_t>(v));
  }
  w.u32(crc32_of(w.view()));
  return w.take();
}

RecordFile decode_records(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 + 2 + 8 + 4 + 4) throw ChecksumError("record file is truncated");
  const auto payload = bytes.first(bytes.size() - 4);
  Reader tail(bytes.last(4));
  const auto stored = static_cast<std::uint32_t>(tail.le(4));
  const std::uint32_t actual = crc32_of(payload);
  if (stored != actual) throw ChecksumError("record file checksum mismatch (file is corrupt or truncated)");

  Reader r(payload);
  RecordFile file;
  std::memcpy(file.magic.data(), r.bytes(4).data(), 4);
  file.version = static_cast<std::uint16_t>(r.le(2));
  file.config_hash = r.le(8);
  const auto count = static_cast<std::uint32_t>(r.le(4));
  for (std::uint32_t i = 0; i < count; ++i) {
    Record rec;
    const auto name_len = static_cast<std::size_t>(r.le(2));
    const auto name = r.bytes(name_len);
    rec.name.assign(name.begin(), name.end());
    const auto rank = static_cast<std::size_t>(r.le(1));
    if (rank == 0) throw FormatError("record '" + rec.name + "' has rank 0");
    for (std::size_t d = 0; d < rank; ++d) rec.extents.push_back(static_cast<std::size_t>(r.le(4)));
    const std::size_t n = shape_size(rec.extents);
    const auto raw = r.bytes(n * 4);
    rec.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::uint8_t* p = raw.data() + 4 * k;
      const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                                 (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
      rec.values[k] = std::bit_cast<float>(bits);
    }
    file.records.push_back(std::move(rec));
  }
  if (!r.done()) throw FormatError("record file has trailing bytes before the checksum");
  return file;
}

void write_records(const std::filesystem::path& path, const RecordFile& file) {
  const auto bytes = encode_records(file);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

RecordFile read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_records(bytes);
}

}  // namespace snakesynth
