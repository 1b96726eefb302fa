#ifndef QOT_CASCADE_HPP
#define QOT_CASCADE_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "qot/bitvec.hpp"
#include "qot/drbg.hpp"
#include "qot/frameio.hpp"

namespace qot::cascade {

struct CascadeConfig {
  // First pass targets one error per block, second pass quadruples, every
  // later pass is a half-length confirmation sweep. Both parties must agree.
  int passes = 12;
  uint32_t min_block = 8;
  uint32_t hash_bits_verify = 128;  // >= 96 per the epsilon_IR budget
  uint64_t max_rounds = 1u << 20;
  double q_dummy = -1.0;  // dummy-session error rate; < 0 means use p_hat
  bool single_block = false;  // degenerate one-position mode (QKD lane)
};

struct ReconciliationOutcome {
  BitVec corrected;                 // receiver side only
  std::array<uint64_t, 2> leak_bits{};  // parity payload bits per position
  std::array<uint64_t, 2> errors_found{};
  double f_actual = 0.0;            // leak_correlated / (n h(p_hat)); 0 if p_hat = 0
  bool verified = false;
  uint8_t matched_position = 0;
  uint64_t rounds = 0;
  // initial odd-block counts per pass, per position (dummy traffic stats)
  std::vector<std::array<uint32_t, 2>> mismatches_per_pass;
};

// Block sizes per pass for a given estimated error rate.
std::vector<uint32_t> pass_schedule(uint64_t n, double p_hat, const CascadeConfig& cfg);

// Sender drives; her blocks never change. Throws ProtocolAbort(ir_fail /
// ir_stuck) on failure.
ReconciliationOutcome reconcile_sender(const std::array<BitVec, 2>& blocks, double p_hat,
                                       const Seed256& transcript_seed,
                                       const CascadeConfig& cfg, FrameIo& io);

// Receiver corrects `block` toward the sender block at ordered-pair
// `position`; a fabricated error pattern answers for the other position.
// The shuffle/verify seed arrives on the wire (CASCSEED).
ReconciliationOutcome reconcile_receiver(const BitVec& block, uint8_t position, double p_hat,
                                         const CascadeConfig& cfg, FrameIo& io, Drbg& rng);

double measure_efficiency(uint64_t leak_correlated, uint64_t n_raw, double p_hat);

}  // namespace qot::cascade

#endif
