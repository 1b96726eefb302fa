#ifndef QOT_MPC_HPP
#define QOT_MPC_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qot/bitvec.hpp"
#include "qot/drbg.hpp"
#include "qot/frameio.hpp"

namespace qot::mpc {

// Semi-honest application layer: ROT to chosen-message OT, IKNP-style OT
// extension, Gilboa multiplication / Beaver triples over Z_2^64, and the
// private fingerprint-matching demo.

using Ring = uint64_t;  // additive shares mod 2^64

inline constexpr std::size_t kBaseCount = 128;  // security parameter
inline constexpr std::size_t kBaseWidth = 128;

// Random-OT batches as produced upstream: the sender holds both strings,
// the receiver holds one string per entry plus its (random) choice bit.
struct RotSenderBatch {
  std::vector<BitVec> r0, r1;
  std::size_t size() const { return r0.size(); }
};
struct RotReceiverBatch {
  std::vector<BitVec> r;
  BitVec c;
  std::size_t size() const { return r.size(); }
};

// Aligned pair of views over freshly sampled ROTs; stands in for the QOT
// pipeline in module-level tests and local demos.
std::pair<RotSenderBatch, RotReceiverBatch> sample_rots(std::size_t n, std::size_t width,
                                                        Drbg& rng);

// ROT -> chosen-message OT. Receiver announces d = b xor c; sender replies
// with (m0 xor r_d, m1 xor r_{1 xor d}); receiver unmasks with r_c.
void ot_transfer_send(const BitVec& r0, const BitVec& r1, const BitVec& m0,
                      const BitVec& m1, FrameIo& io);
BitVec ot_transfer_recv(const BitVec& rc, bool c, bool b, FrameIo& io);

// Consumption accounting, one per party pair.
struct OtLedger {
  uint64_t base_consumed = 0;
  uint64_t extended_produced = 0;
  uint64_t extended_consumed = 0;
};

// IKNP-style extension, semi-honest. The extension sender played the base-OT
// receiver (roles reversed) and vice versa. Base batches are consumed by the
// one extension call; a second call is rejected.
class ExtSender {
 public:
  explicit ExtSender(RotReceiverBatch base, OtLedger* ledger = nullptr);
  RotSenderBatch extend(uint32_t count, uint32_t length_bits, FrameIo& io);

 private:
  RotReceiverBatch base_;
  OtLedger* ledger_;
  bool used_ = false;
};

class ExtReceiver {
 public:
  explicit ExtReceiver(RotSenderBatch base, OtLedger* ledger = nullptr);
  RotReceiverBatch extend(const BitVec& choices, uint32_t length_bits, FrameIo& io);

 private:
  RotSenderBatch base_;
  OtLedger* ledger_;
  bool used_ = false;
};

// Backpressure marker: an OT pool ran dry mid-computation.
struct OtExhausted {};

// Pools of extended OTs feeding the multiplier, 64-bit strings.
struct SenderPool {
  RotSenderBatch rots;
  std::size_t next = 0;
  OtLedger* ledger = nullptr;
};
struct ReceiverPool {
  RotReceiverBatch rots;
  std::size_t next = 0;
  OtLedger* ledger = nullptr;
};

// Gilboa cross-term: sender holds x, receiver holds y; outputs are additive
// shares of x*y. 64 correlated OTs (one per bit of y) per call.
Ring gilboa_mul_send(Ring x, SenderPool& pool, FrameIo& io, Drbg& rng);
Ring gilboa_mul_recv(Ring y, ReceiverPool& pool, FrameIo& io);

struct Triple {
  Ring a = 0, b = 0, c = 0;  // this party's shares; reconstruct(c) = ab
};

// Beaver triple generation: two Gilboa cross-terms per triple, party 0
// playing the OT sender for the first. party is 0 or 1.
std::vector<Triple> triple_gen(int party, uint32_t count, SenderPool& sp,
                               ReceiverPool& rp, FrameIo& io, Drbg& rng);

struct TriplePool {
  std::vector<Triple> t;
  std::size_t next = 0;
};

// One Beaver multiplication on shares; both parties call with their shares.
Ring beaver_mul(int party, Ring x, Ring y, TriplePool& pool, FrameIo& io);

// Additive sharing helpers.
std::pair<Ring, Ring> share(Ring v, Drbg& rng);
inline Ring reconstruct(Ring s0, Ring s1) { return s0 + s1; }

// Fixed-point features: 16 fractional bits, clamped to [-2^15, 2^15).
Ring fx_encode(double v);
double fx_decode(Ring v);

// Fingerprint database, row-major M x N ring elements. N defaults to 512;
// the cited embeddings use N in [256, 512], smaller N is allowed for tests.
struct FpDb {
  uint32_t m = 0, n = 0;
  std::vector<Ring> data;
  Ring& at(uint32_t row, uint32_t col) { return data[std::size_t(row) * n + col]; }
  Ring at(uint32_t row, uint32_t col) const { return data[std::size_t(row) * n + col]; }
};
void write_db(const std::string& path, const FpDb& db);
FpDb read_db(const std::string& path);
// Additive share files with identical shape.
std::pair<FpDb, FpDb> share_db(const FpDb& db, Drbg& rng);

struct MatchResult {
  std::vector<Ring> distances;   // revealed squared distances, scale 2^-32
  std::vector<uint8_t> verdicts;  // distance <= threshold, compared in clear
};

// Squared-Euclidean matching on shares: per database entry, N Beaver
// multiplications and 2N-1 additions; distances are revealed to both
// parties and thresholded in the clear (disclosed limitation).
MatchResult match_fingerprint(int party, const std::vector<Ring>& template_share,
                              const FpDb& db_share, Ring threshold,
                              TriplePool& triples, FrameIo& io);

}  // namespace qot::mpc

#endif
