#include <doctest.h>

#include <cmath>
#include <future>
#include <optional>

#include "qot/abort.hpp"
#include "qot/qkdlane.hpp"
#include "qot/transport.hpp"

using namespace qot;
using namespace qot::qkdlane;

namespace {
Seed256 seed_of(uint8_t b) {
  Seed256 s{};
  s.fill(b);
  return s;
}

struct PairResult {
  std::optional<AuthKey> initiator;
  std::optional<AuthKey> responder;
};

PairResult run_pair(const qsim::Block& blk_a, const qsim::Block& blk_b,
                    uint32_t length_bytes, const QkdConfig& cfg, uint8_t rng_seed) {
  auto [a, b] = transport::make_loopback();
  a->set_timeout_ms(30000);
  b->set_timeout_ms(30000);
  FrameIo io_a = direct_io(*a, transport::kLaneQkd, 9);
  FrameIo io_b = direct_io(*b, transport::kLaneQkd, 9);
  Drbg rng_a(seed_of(rng_seed));
  auto fut = std::async(std::launch::async, [&] {
    return produce_auth_key_initiator(blk_a, length_bytes, cfg, io_a, rng_a);
  });
  PairResult out;
  Drbg rng_b(seed_of(uint8_t(rng_seed + 1)));
  try {
    out.responder = produce_auth_key_responder(blk_b, cfg, io_b, rng_b);
  } catch (...) {
    try {
      fut.get();
    } catch (...) {
    }
    throw;
  }
  out.initiator = fut.get();
  return out;
}

qsim::BlockPair make_pair(double qber, uint64_t n, uint8_t seed) {
  Drbg rng(seed_of(seed));
  return qsim::generate_block(qsim::ChannelModel::flat(qber), n, rng);
}
}  // namespace

TEST_CASE("sift keeps matched bases and carves out the disclosed sample") {
  Drbg rng(seed_of(40));
  const uint64_t n = 2000;
  BitVec ba = rng.bits(n);
  BitVec bb = rng.bits(n);
  BitVec out = rng.bits(n);
  uint64_t matched = 0;
  for (uint64_t i = 0; i < n; ++i)
    if (ba.get(i) == bb.get(i)) ++matched;
  Sifted s = sift(ba, bb, out, seed_of(41), 0.10);
  CHECK(s.n_sift == matched);
  CHECK(s.sample.size() == uint64_t(0.10 * double(matched)));
  CHECK(s.key.size() + s.sample.size() == matched);
  // same seed, same partition; different seed, (almost surely) different sample
  Sifted again = sift(ba, bb, out, seed_of(41), 0.10);
  CHECK(again.key == s.key);
  CHECK(again.sample == s.sample);
}

TEST_CASE("noiseless block gives half-rate sifting and a zero estimate") {
  auto bp = make_pair(0.0, 8192, 42);
  QkdConfig cfg;
  PairResult r = run_pair(bp.sender, bp.receiver, 32, cfg, 43);
  REQUIRE(r.initiator.has_value());
  REQUIRE(r.responder.has_value());
  CHECK(r.initiator->key == r.responder->key);
  CHECK(r.initiator->key.size() == 32);
  CHECK(r.initiator->q_est == 0.0);
  // basis agreement is a fair coin: n/2 within 4 sigma
  double sigma = std::sqrt(8192.0 * 0.25);
  CHECK(std::abs(double(r.initiator->n_sift) - 4096.0) < 4 * sigma);
}

TEST_CASE("one percent QBER still yields byte-identical keys") {
  auto bp = make_pair(0.01, 10000, 44);
  QkdConfig cfg;
  PairResult r = run_pair(bp.sender, bp.receiver, 32, cfg, 45);
  REQUIRE(r.initiator.has_value());
  REQUIRE(r.responder.has_value());
  CHECK(r.initiator->key == r.responder->key);
  CHECK(r.initiator->key.size() == 32);
  CHECK(r.initiator->q_est == r.responder->q_est);
  // estimate within a loose binomial interval around the simulated rate
  CHECK(r.initiator->q_est > 0.0);
  CHECK(r.initiator->q_est < 0.03);
  CHECK(r.initiator->f_actual == r.responder->f_actual);
}

TEST_CASE("all-mismatched bases abort with insufficient_raw") {
  const uint64_t n = 256;
  qsim::Block a, b;
  a.bases = BitVec(n);  // all zeros
  a.outcomes = BitVec(n);
  b.bases = BitVec(n);
  for (uint64_t i = 0; i < n; ++i) b.bases.set(i, true);
  b.outcomes = BitVec(n);
  b.party = 1;
  try {
    run_pair(a, b, 16, QkdConfig{}, 46);
    FAIL("expected ProtocolAbort");
  } catch (const ProtocolAbort& e) {
    CHECK(e.reason == AbortReason::insufficient_raw);
  }
}

TEST_CASE("estimate above the threshold aborts with qkd_qber") {
  auto bp = make_pair(0.20, 4096, 47);
  try {
    run_pair(bp.sender, bp.receiver, 16, QkdConfig{}, 48);
    FAIL("expected ProtocolAbort");
  } catch (const ProtocolAbort& e) {
    CHECK(e.reason == AbortReason::qkd_qber);
  }
}

TEST_CASE("oversized request signals backpressure, larger block succeeds") {
  auto small = make_pair(0.01, 1200, 49);
  QkdConfig cfg;
  // ~600 sifted bits minus sample minus the 128-bit margin cannot cover 64 bytes
  PairResult r = run_pair(small.sender, small.receiver, 64, cfg, 50);
  CHECK_FALSE(r.initiator.has_value());
  CHECK_FALSE(r.responder.has_value());
  // more raw material clears the request
  auto big = make_pair(0.01, 8192, 49);
  PairResult r2 = run_pair(big.sender, big.receiver, 64, cfg, 50);
  REQUIRE(r2.initiator.has_value());
  CHECK(r2.initiator->key == r2.responder->key);
  CHECK(r2.initiator->key.size() == 64);
}

TEST_CASE("zero-length requests are rejected up front") {
  auto bp = make_pair(0.0, 512, 51);
  auto [a, b] = transport::make_loopback();
  FrameIo io_a = direct_io(*a, transport::kLaneQkd, 9);
  Drbg rng(seed_of(52));
  CHECK_THROWS_AS(produce_auth_key_initiator(bp.sender, 0, QkdConfig{}, io_a, rng),
                  std::invalid_argument);
}
