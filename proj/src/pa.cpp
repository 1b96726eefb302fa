#include "qot/pa.hpp"

#include <bit>
#include <stdexcept>

#include "qot/abort.hpp"
#include "qot/wire.hpp"

namespace qot::pa {

ToeplitzSeed ToeplitzSeed::sample(Drbg& rng, uint32_t n_in, uint32_t n_out) {
  if (n_in == 0 || n_out == 0) throw std::invalid_argument("toeplitz: zero dimension");
  ToeplitzSeed s;
  s.n_in = n_in;
  s.n_out = n_out;
  s.bits = rng.bits(uint64_t(n_in) + n_out - 1);
  return s;
}

std::vector<uint8_t> ToeplitzSeed::encode() const {
  std::vector<uint8_t> out;
  wire::put_u32(out, n_in);
  wire::put_u32(out, n_out);
  wire::put_bytes(out, bits.to_bytes_msb());
  return out;
}

ToeplitzSeed ToeplitzSeed::decode(const std::vector<uint8_t>& payload) {
  wire::Reader r(payload);
  ToeplitzSeed s;
  s.n_in = r.u32();
  s.n_out = r.u32();
  if (s.n_in == 0 || s.n_out == 0) throw wire::DecodeError("toeplitz: zero dimension");
  uint64_t nbits = uint64_t(s.n_in) + s.n_out - 1;
  auto raw = r.raw((nbits + 7) / 8);
  r.expect_end();
  s.bits = BitVec::from_bytes_msb({raw.data(), raw.size()}, nbits);
  return s;
}

BitVec toeplitz_hash(const BitVec& key, const ToeplitzSeed& seed) {
  if (key.size() != seed.n_in) throw std::invalid_argument("toeplitz: key size mismatch");
  uint64_t nbits = uint64_t(seed.n_in) + seed.n_out - 1;

  // Reverse the seed once: with R[i] = bits[nbits-1-i], row r of the matrix
  // is the n_in-bit window of R starting at n_out-1-r, so each output bit is
  // one word-sliced AND/popcount sweep instead of a column loop.
  BitVec rev(nbits);
  for (uint64_t i = 0; i < nbits; ++i)
    if (seed.bits.get(nbits - 1 - i)) rev.set(i, true);
  std::vector<uint64_t> rwords = rev.words();
  rwords.push_back(0);  // guard word for shifted reads

  const auto& kwords = key.words();
  BitVec out(seed.n_out);
  for (uint32_t r = 0; r < seed.n_out; ++r) {
    uint64_t s = seed.n_out - 1 - r;
    uint64_t wi = s >> 6;
    unsigned sh = unsigned(s & 63);
    uint64_t acc = 0;
    for (std::size_t w = 0; w < kwords.size(); ++w) {
      uint64_t rw = rwords[wi + w] >> sh;
      if (sh != 0) rw |= rwords[wi + w + 1] << (64 - sh);
      acc ^= kwords[w] & rw;
    }
    if (std::popcount(acc) & 1u) out.set(r, true);
  }
  return out;
}

namespace {
void check_bound(uint32_t n_out, uint64_t max_len) {
  if (n_out > max_len)
    throw ProtocolAbort(AbortReason::pa_bound,
                        "requested " + std::to_string(n_out) + " bits, bound " +
                            std::to_string(max_len));
}
}  // namespace

AmplifyResult amplify_sender(const std::array<BitVec, 2>& blocks, const ToeplitzSeed& seed,
                             uint64_t max_len) {
  check_bound(seed.n_out, max_len);
  AmplifyResult r;
  r.outputs[0] = toeplitz_hash(blocks[0], seed);
  r.outputs[1] = toeplitz_hash(blocks[1], seed);
  return r;
}

BitVec amplify_receiver(const BitVec& block, const ToeplitzSeed& seed, uint64_t max_len) {
  check_bound(seed.n_out, max_len);
  return toeplitz_hash(block, seed);
}

}  // namespace qot::pa
