#include "qot/gf128.hpp"

#include <cstring>

namespace qot {

namespace {

inline Gf128 mul_x(const Gf128& a) {
  Gf128 r;
  uint64_t carry = a.hi >> 63;
  r.hi = (a.hi << 1) | (a.lo >> 63);
  r.lo = (a.lo << 1) ^ (carry ? 0x87u : 0u);
  return r;
}

}  // namespace

Gf128 gf128_mul(const Gf128& a, const Gf128& b) {
  Gf128 acc;
  for (int i = 127; i >= 0; --i) {
    acc = mul_x(acc);
    bool bit = i >= 64 ? (b.hi >> (i - 64)) & 1 : (b.lo >> i) & 1;
    if (bit) acc ^= a;
  }
  return acc;
}

Gf128Mult::Gf128Mult(const Gf128& k) {
  tab_[0] = Gf128{};
  tab_[1] = k;
  for (int i = 2; i < 16; i += 2) {
    tab_[i] = mul_x(tab_[i / 2]);
    tab_[i + 1] = tab_[i] ^ k;
  }
}

Gf128 Gf128Mult::mul(const Gf128& a) const {
  Gf128 z;
  for (int n = 31; n >= 0; --n) {
    z = mul_x(mul_x(mul_x(mul_x(z))));
    unsigned nib = n >= 16 ? unsigned(a.hi >> (4 * (n - 16))) & 0xF
                           : unsigned(a.lo >> (4 * n)) & 0xF;
    z ^= tab_[nib];
  }
  return z;
}

Gf128 gf128_poly_hash(const Gf128& point, std::span<const uint8_t> data) {
  Gf128Mult m(point);
  Gf128 acc;
  // length block first
  {
    std::array<uint8_t, 16> len{};
    uint64_t n = data.size();
    for (int i = 0; i < 8; ++i) len[15 - i] = uint8_t(n >> (8 * i));
    acc = m.mul(acc ^ Gf128::from_bytes(len));
  }
  std::size_t off = 0;
  while (off < data.size()) {
    std::array<uint8_t, 16> blk{};
    std::size_t take = std::min<std::size_t>(16, data.size() - off);
    std::memcpy(blk.data(), data.data() + off, take);
    acc = m.mul(acc ^ Gf128::from_bytes(blk));
    off += take;
  }
  return acc;
}

}  // namespace qot
