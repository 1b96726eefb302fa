#ifndef QOT_PA_HPP
#define QOT_PA_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "qot/bitvec.hpp"
#include "qot/drbg.hpp"

namespace qot::pa {

// Toeplitz matrix T[r][c] = bits[r - c + n_in - 1]; bits has
// n_in + n_out - 1 entries defining the first row and first column.
struct ToeplitzSeed {
  uint32_t n_in = 0;
  uint32_t n_out = 0;
  BitVec bits;

  static ToeplitzSeed sample(Drbg& rng, uint32_t n_in, uint32_t n_out);
  std::vector<uint8_t> encode() const;  // n_in u32, n_out u32, bits MSB-first
  static ToeplitzSeed decode(const std::vector<uint8_t>& payload);
};

BitVec toeplitz_hash(const BitVec& key, const ToeplitzSeed& seed);

struct AmplifyResult {
  std::array<BitVec, 2> outputs;  // sender: positions 0 and 1; receiver: [0] only
};

// Checks n_out against the secure bound before hashing; the caller supplies
// the bound from params::max_secure_length. Throws ProtocolAbort(pa_bound).
AmplifyResult amplify_sender(const std::array<BitVec, 2>& blocks, const ToeplitzSeed& seed,
                             uint64_t max_len);
BitVec amplify_receiver(const BitVec& block, const ToeplitzSeed& seed, uint64_t max_len);

}  // namespace qot::pa

#endif
