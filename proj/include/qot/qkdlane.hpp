#ifndef QOT_QKDLANE_HPP
#define QOT_QKDLANE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "qot/bitvec.hpp"
#include "qot/cascade.hpp"
#include "qot/drbg.hpp"
#include "qot/frameio.hpp"
#include "qot/qsim.hpp"

namespace qot::qkdlane {

struct QkdConfig {
  double sample_fraction = 0.10;  // disclosed share of the sifted key
  double qber_threshold = 0.11;   // abort(qkd_qber) above this estimate
  double f_plan = 1.10;           // planning efficiency for the pre-IR length check
  cascade::CascadeConfig cascade;  // single_block is forced on internally
};

// Matched-basis bits split into the kept key and the disclosed sample.
// Both parties compute the same partition from the shared sample seed.
struct Sifted {
  BitVec key;      // kept bits, original order, sample removed
  BitVec sample;   // this party's disclosed bits, ascending index order
  uint64_t n_sift = 0;  // matched-basis count before disclosure
};

Sifted sift(const BitVec& bases_a, const BitVec& bases_b, const BitVec& outcomes,
            const Seed256& sample_seed, double sample_fraction);

struct AuthKey {
  std::vector<uint8_t> key;  // byte-identical on both parties
  double q_est = 0.0;
  double f_actual = 0.0;
  uint64_t n_sift = 0;
  uint64_t n_key = 0;  // sifted length after sample removal
};

// One lane session: basis exchange, disclosed-sample QBER estimate,
// single-block reconciliation, Toeplitz compression to length_bytes.
// Returns nullopt (backpressure) when the extractable length
//   n_sift_kept * (1 - h(q_est) * f) - 128
// falls short of the request; both parties reach the same verdict from
// shared data, so no extra signalling is needed. Throws ProtocolAbort
// (qkd_qber, insufficient_raw, ir_*) on protocol failure.
std::optional<AuthKey> produce_auth_key_initiator(const qsim::Block& blk,
                                                  uint32_t length_bytes,
                                                  const QkdConfig& cfg, FrameIo& io,
                                                  Drbg& rng);
std::optional<AuthKey> produce_auth_key_responder(const qsim::Block& blk,
                                                  const QkdConfig& cfg, FrameIo& io,
                                                  Drbg& rng);

}  // namespace qot::qkdlane

#endif
