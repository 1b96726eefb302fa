#ifndef QOT_COMMITMENT_HPP
#define QOT_COMMITMENT_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "qot/drbg.hpp"

namespace qot::commitment {

inline constexpr std::size_t kOutBytes = 96;   // 768-bit codomain
inline constexpr std::size_t kSeedBytes = 32;  // 256-bit seed

using Word768 = std::array<uint8_t, kOutBytes>;
using Commitment = Word768;

// Byte 0 of a 768-bit string carries the most significant bits; shifting
// right moves every bit toward the least significant end, across bytes.
Word768 shift_right_one(const Word768& v);

// Verifier-chosen public randomness, one instance per OT execution.
struct PublicString {
  Word768 r1{};
  Word768 r2{};
  static PublicString sample(Drbg& rng);         // resamples on excluded values
  static PublicString from_r1(const Word768& r1);  // rejects all-zeros/all-ones
};

struct Opening {
  std::array<uint8_t, kSeedBytes> x{};
  bool b1 = false;  // basis bit
  bool b2 = false;  // outcome bit
};

// AES-256 encryptions of the big-endian counter blocks 0..5, concatenated.
Word768 expand_seed(const std::array<uint8_t, kSeedBytes>& x);

// c = G(x) XOR b1*r1 XOR b2*r2.
Commitment commit(const PublicString& pub, const Opening& open);
bool verify_open(const PublicString& pub, const Commitment& c, const Opening& open);

// Preprocessing variant: commit to a random bit pair m ahead of time, then
// bind the real pair b online by publishing m XOR b.
struct Precommitment {
  Commitment c{};
  Opening hidden;  // holds the random pair m; kept by the committer
};
Precommitment precommit(Drbg& rng, const PublicString& pub);
// Returns (m1 XOR b1, m2 XOR b2) for the wire.
std::pair<bool, bool> online_commit(const Precommitment& pre, bool b1, bool b2);
// Verifier side: checks the preprocessing opening and recovers b from the mask.
struct ChainResult {
  bool accept = false;
  bool b1 = false;
  bool b2 = false;
};
ChainResult open_chain(const PublicString& pub, const Commitment& c,
                       const Opening& hidden_open, std::pair<bool, bool> mask);

// Serialization: commitment 96 bytes; opening 33 bytes (x then one byte
// with b1 in bit 0, b2 in bit 1).
inline constexpr std::size_t kOpeningBytes = kSeedBytes + 1;
void put_opening(std::vector<uint8_t>& out, const Opening& o);
Opening get_opening(std::span<const uint8_t> in);

}  // namespace qot::commitment

#endif
