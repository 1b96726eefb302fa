#ifndef QOT_OTCORE_HPP
#define QOT_OTCORE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "qot/bitvec.hpp"
#include "qot/commitment.hpp"
#include "qot/drbg.hpp"
#include "qot/qsim.hpp"

namespace qot::otcore {

struct TestSelection {
  std::vector<uint32_t> i_t;  // sorted test indices
};

TestSelection choose_test_set(Drbg& rng, uint64_t n0, double alpha);

enum class Verdict : uint8_t { proceed, abort_commitment, abort_p_exceeded, abort_check_size };

struct EstimationResult {
  std::vector<uint32_t> i_s;  // test indices with matching bases
  uint64_t errors = 0;
  double p_hat = 0.0;
  Verdict verdict = Verdict::proceed;
};

// Sender side: verify every opened commitment for the test set, build I_s
// from basis agreement, recount errors, apply the abort rules.
EstimationResult estimate(const TestSelection& test, const qsim::Block& sender_block,
                          const commitment::PublicString& pub,
                          const std::vector<commitment::Commitment>& commitments,
                          const std::vector<commitment::Opening>& openings,
                          uint64_t n_check, double p_max);

struct IndexSplit {
  std::vector<uint32_t> i0;  // matching-basis indices, size n_raw
  std::vector<uint32_t> i1;  // non-matching, size n_raw
  uint8_t c = 0;
  // (I_c, I_c-bar): first = i0 iff c = 0
  std::array<std::vector<uint32_t>, 2> ordered_pair;
};

// Receiver side. theta_a covers all of [0, n0); test indices are excluded
// here. Returns nullopt when either class is short (insufficient_raw).
std::optional<IndexSplit> build_split(const BitVec& theta_a, const BitVec& theta_b,
                                      const std::vector<uint32_t>& i_t, uint64_t n_raw,
                                      Drbg& rng, std::optional<uint8_t> forced_c = {});

// Ascending-index extraction of outcome bits over an index set.
BitVec extract_raw(const BitVec& outcomes, const std::vector<uint32_t>& indices);

}  // namespace qot::otcore

#endif
