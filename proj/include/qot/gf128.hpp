#ifndef QOT_GF128_HPP
#define QOT_GF128_HPP

#include <array>
#include <cstdint>
#include <span>

namespace qot {

// GF(2^128) with reduction polynomial x^128 + x^7 + x^2 + x + 1.
// Elements are 128-bit polynomials; bit 0 of lo is the x^0 coefficient.
struct Gf128 {
  uint64_t lo = 0, hi = 0;

  bool operator==(const Gf128&) const = default;
  Gf128 operator^(const Gf128& o) const { return {lo ^ o.lo, hi ^ o.hi}; }
  void operator^=(const Gf128& o) { lo ^= o.lo; hi ^= o.hi; }

  static Gf128 from_bytes(std::span<const uint8_t, 16> b) {
    Gf128 e;
    for (int i = 0; i < 8; ++i) e.hi = (e.hi << 8) | b[i];
    for (int i = 8; i < 16; ++i) e.lo = (e.lo << 8) | b[i];
    return e;
  }
  std::array<uint8_t, 16> to_bytes() const {
    std::array<uint8_t, 16> b;
    for (int i = 0; i < 8; ++i) b[i] = uint8_t(hi >> (56 - 8 * i));
    for (int i = 0; i < 8; ++i) b[8 + i] = uint8_t(lo >> (56 - 8 * i));
    return b;
  }
};

Gf128 gf128_mul(const Gf128& a, const Gf128& b);

// Fixed-multiplier with a 4-bit Shoup table; used for Horner evaluation
// where the same key point multiplies every accumulated block.
class Gf128Mult {
 public:
  explicit Gf128Mult(const Gf128& k);
  Gf128 mul(const Gf128& a) const;

 private:
  std::array<Gf128, 16> tab_;
};

// One-shot polynomial hash of a byte string: Horner over 16-byte blocks
// (zero padded) with a leading length block, evaluated at `point`.
Gf128 gf128_poly_hash(const Gf128& point, std::span<const uint8_t> data);

}  // namespace qot

#endif
