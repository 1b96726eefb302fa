#ifndef QOT_WIRE_HPP
#define QOT_WIRE_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qot::wire {

// All integers on the wire are big-endian.

struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void put_u8(std::vector<uint8_t>& out, uint8_t v) { out.push_back(v); }
inline void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v >> 8));
  out.push_back(uint8_t(v));
}
inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}
inline void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}
inline void put_bytes(std::vector<uint8_t>& out, std::span<const uint8_t> b) {
  out.insert(out.end(), b.begin(), b.end());
}

// Bounds-checked sequential reader.
class Reader {
 public:
  explicit Reader(std::span<const uint8_t> data) : data_(data) {}

  uint8_t u8() { return take(1)[0]; }
  uint16_t u16() { return (uint16_t(take(2)[0]) << 8) | data_[pos_ - 1]; }
  uint32_t u32() {
    auto b = take(4);
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | b[3];
  }
  uint64_t u64() {
    auto b = take(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | b[i];
    return v;
  }
  std::span<const uint8_t> raw(std::size_t n) { return take(n); }
  std::size_t remaining() const { return data_.size() - pos_; }
  void expect_end() const {
    if (pos_ != data_.size()) throw DecodeError("trailing bytes in message");
  }

 private:
  std::span<const uint8_t> take(std::size_t n) {
    if (data_.size() - pos_ < n) throw DecodeError("message truncated");
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::span<const uint8_t> data_;
  std::size_t pos_ = 0;
};

// Index sets travel as: count u32, then u32 gaps (first entry absolute,
// subsequent entries the positive difference from the previous one).
void put_index_set(std::vector<uint8_t>& out, const std::vector<uint32_t>& sorted);
std::vector<uint32_t> get_index_set(Reader& r);

}  // namespace qot::wire

#endif
