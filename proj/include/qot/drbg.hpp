#ifndef QOT_DRBG_HPP
#define QOT_DRBG_HPP

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>
#include <vector>

#include "qot/bitvec.hpp"

namespace qot {

using Seed256 = std::array<uint8_t, 32>;

// Deterministic random bit generator backed by AES-256-CTR.
// All protocol-critical randomness (bases, test sets, bit choices,
// commitment seeds) is drawn through this; tests pin seeds.
class Drbg {
 public:
  explicit Drbg(const Seed256& seed);
  Drbg(const Drbg&) = delete;
  Drbg& operator=(const Drbg&) = delete;
  Drbg(Drbg&&) noexcept;
  Drbg& operator=(Drbg&&) noexcept;
  ~Drbg();

  void fill(std::span<uint8_t> out);
  std::vector<uint8_t> bytes(std::size_t n);
  Seed256 seed256();

  bool bit();
  uint64_t u64();
  // Uniform in [0, bound), bound >= 1.
  uint64_t below(uint64_t bound);
  double unit();  // uniform in [0,1) with 53 bits

  BitVec bits(std::size_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derive an independent seed from a parent seed and a label.
  static Seed256 derive(const Seed256& parent, std::string_view label);

 private:
  void refill();
  struct Impl;
  Impl* impl_;
  std::array<uint8_t, 4096> buf_;
  std::size_t pos_ = sizeof(buf_);
  uint64_t bitbuf_ = 0;
  unsigned bitcount_ = 0;
};

}  // namespace qot

#endif
