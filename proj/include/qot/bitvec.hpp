#ifndef QOT_BITVEC_HPP
#define QOT_BITVEC_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace qot {

// Packed bit vector. Bit i lives in word i/64, bit position i%64 (LSB first).
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

  std::size_t size() const { return nbits_; }
  bool empty() const { return nbits_ == 0; }

  bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool v) {
    uint64_t m = uint64_t{1} << (i & 63);
    if (v) words_[i >> 6] |= m; else words_[i >> 6] &= ~m;
  }
  void flip(std::size_t i) { words_[i >> 6] ^= uint64_t{1} << (i & 63); }

  void push_back(bool v) {
    if (nbits_ % 64 == 0) words_.push_back(0);
    ++nbits_;
    set(nbits_ - 1, v);
  }

  // Parity of bits in [lo, hi).
  bool parity_range(std::size_t lo, std::size_t hi) const {
    if (lo >= hi) return false;
    std::size_t wl = lo >> 6, wh = (hi - 1) >> 6;
    uint64_t acc;
    if (wl == wh) {
      uint64_t mask = mask_from(lo & 63) & mask_upto(((hi - 1) & 63) + 1);
      acc = words_[wl] & mask;
    } else {
      acc = words_[wl] & mask_from(lo & 63);
      for (std::size_t w = wl + 1; w < wh; ++w) acc ^= words_[w];
      acc ^= words_[wh] & mask_upto(((hi - 1) & 63) + 1);
    }
    return std::popcount(acc) & 1u;
  }

  std::size_t count_ones() const {
    std::size_t c = 0;
    for (uint64_t w : words_) c += std::popcount(w);
    return c;
  }

  void xor_with(const BitVec& other) {
    if (other.nbits_ != nbits_) throw std::invalid_argument("BitVec: size mismatch");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
  }

  bool operator==(const BitVec& o) const {
    return nbits_ == o.nbits_ && words_ == o.words_;
  }

  const std::vector<uint64_t>& words() const { return words_; }
  std::vector<uint64_t>& words() { return words_; }

  // MSB-first byte serialization: bit 0 of the vector is the MSB of byte 0.
  std::vector<uint8_t> to_bytes_msb() const {
    std::vector<uint8_t> out((nbits_ + 7) / 8, 0);
    for (std::size_t i = 0; i < nbits_; ++i)
      if (get(i)) out[i >> 3] |= uint8_t(0x80u >> (i & 7));
    return out;
  }
  static BitVec from_bytes_msb(std::span<const uint8_t> bytes, std::size_t nbits) {
    if (bytes.size() < (nbits + 7) / 8) throw std::invalid_argument("BitVec: short byte buffer");
    BitVec v(nbits);
    for (std::size_t i = 0; i < nbits; ++i)
      if (bytes[i >> 3] & (0x80u >> (i & 7))) v.set(i, true);
    return v;
  }

 private:
  static uint64_t mask_from(unsigned b) { return ~uint64_t{0} << b; }
  static uint64_t mask_upto(unsigned b) {  // bits [0, b), b in 1..64
    return b >= 64 ? ~uint64_t{0} : ((uint64_t{1} << b) - 1);
  }

  std::size_t nbits_ = 0;
  std::vector<uint64_t> words_;
};

}  // namespace qot

#endif
