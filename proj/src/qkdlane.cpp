#include "qot/qkdlane.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qot/abort.hpp"
#include "qot/pa.hpp"
#include "qot/params.hpp"
#include "qot/wire.hpp"

namespace qot::qkdlane {

namespace {

using transport::Frame;

// Wire flow (initiator = reconciliation sender):
//   QKDBAS  I->R  n u32, n_out u32, sample seed 32B, initiator bases
//   QKDSFT  R->I  n u32, responder bases, k u32, responder sample bits
//   QKDEST  I->R  sample error count u64
//   CASC*   single-block reconciliation
//   QKDSEED I->R  Toeplitz seed
Frame expect(FrameIo& io, const char* tag) {
  Frame f = io.recv();
  if (!f.tag_is(tag))
    throw ProtocolAbort(AbortReason::protocol_violation,
                        std::string("expected ") + tag + ", got " + f.tag_string());
  return f;
}

// Sample positions within the sifted ordering, ascending.
std::vector<uint32_t> sample_positions(const Seed256& seed, uint64_t n_sift, uint64_t k) {
  std::vector<uint32_t> pos(n_sift);
  std::iota(pos.begin(), pos.end(), 0u);
  Drbg g(seed);
  g.shuffle(pos);
  pos.resize(k);
  std::sort(pos.begin(), pos.end());
  return pos;
}

uint64_t count_errors(const BitVec& a, const BitVec& b) {
  BitVec d = a;
  d.xor_with(b);
  return d.count_ones();
}

// Extractable bits under the engineering rule n (1 - h(q) f) - 128.
int64_t extractable_bits(uint64_t n_key, double q, double f) {
  long double rate = 1.0L - params::binary_entropy(q) * (long double)std::max(f, 1.0);
  if (rate < 0) rate = 0;
  return int64_t(std::floor(double(n_key) * double(rate))) - 128;
}

struct SessionSetup {
  Sifted mine;
  uint64_t errors = 0;
  double q_est = 0.0;
  uint32_t n_out = 0;
};

void check_estimate(const SessionSetup& s, const QkdConfig& cfg) {
  if (s.mine.sample.size() > 0 && s.q_est > cfg.qber_threshold)
    throw ProtocolAbort(AbortReason::qkd_qber, "estimated QBER " + std::to_string(s.q_est));
}

std::optional<AuthKey> finish_common(const SessionSetup& s, double f_actual) {
  if (extractable_bits(s.mine.key.size(), s.q_est, f_actual) < int64_t(s.n_out))
    return std::nullopt;  // post-IR recheck with the measured leak
  AuthKey out;
  out.q_est = s.q_est;
  out.f_actual = f_actual;
  out.n_sift = s.mine.n_sift;
  out.n_key = s.mine.key.size();
  return out;
}

}  // namespace

Sifted sift(const BitVec& bases_a, const BitVec& bases_b, const BitVec& outcomes,
            const Seed256& sample_seed, double sample_fraction) {
  if (bases_a.size() != bases_b.size() || outcomes.size() != bases_a.size())
    throw std::invalid_argument("qkdlane: block size mismatch");
  BitVec sifted;
  for (uint64_t i = 0; i < bases_a.size(); ++i)
    if (bases_a.get(i) == bases_b.get(i)) sifted.push_back(outcomes.get(i));
  Sifted out;
  out.n_sift = sifted.size();
  uint64_t k = uint64_t(sample_fraction * double(out.n_sift));
  auto pos = sample_positions(sample_seed, out.n_sift, k);
  std::size_t next = 0;
  for (uint64_t i = 0; i < sifted.size(); ++i) {
    if (next < pos.size() && pos[next] == i) {
      out.sample.push_back(sifted.get(i));
      ++next;
    } else {
      out.key.push_back(sifted.get(i));
    }
  }
  return out;
}

namespace {

// Shared post-estimation path: reconcile, enforce the length rule, hash.
std::optional<AuthKey> run_tail_initiator(SessionSetup& s, const QkdConfig& cfg,
                                          FrameIo& io, Drbg& rng) {
  check_estimate(s, cfg);
  if (extractable_bits(s.mine.key.size(), s.q_est, cfg.f_plan) < int64_t(s.n_out))
    return std::nullopt;  // backpressure before paying for reconciliation

  cascade::CascadeConfig ccfg = cfg.cascade;
  ccfg.single_block = true;
  double p_hat = std::max(s.q_est, 1.0 / double(std::max<uint64_t>(s.mine.key.size(), 1)));
  auto outcome = cascade::reconcile_sender({s.mine.key, BitVec()}, p_hat, rng.seed256(),
                                           ccfg, io);

  auto partial = finish_common(s, outcome.f_actual);
  if (!partial) return std::nullopt;
  pa::ToeplitzSeed seed =
      pa::ToeplitzSeed::sample(rng, uint32_t(s.mine.key.size()), s.n_out);
  Frame sf;
  sf.set_tag("QKDSEED");
  sf.payload = seed.encode();
  io.send(sf);
  partial->key = pa::toeplitz_hash(s.mine.key, seed).to_bytes_msb();
  return partial;
}

std::optional<AuthKey> run_tail_responder(SessionSetup& s, const QkdConfig& cfg,
                                          FrameIo& io, Drbg& rng) {
  check_estimate(s, cfg);
  if (extractable_bits(s.mine.key.size(), s.q_est, cfg.f_plan) < int64_t(s.n_out))
    return std::nullopt;

  cascade::CascadeConfig ccfg = cfg.cascade;
  ccfg.single_block = true;
  double p_hat = std::max(s.q_est, 1.0 / double(std::max<uint64_t>(s.mine.key.size(), 1)));
  auto outcome = cascade::reconcile_receiver(s.mine.key, 0, p_hat, ccfg, io, rng);

  auto partial = finish_common(s, outcome.f_actual);
  if (!partial) return std::nullopt;
  Frame sf = expect(io, "QKDSEED");
  pa::ToeplitzSeed seed;
  try {
    seed = pa::ToeplitzSeed::decode(sf.payload);
  } catch (const wire::DecodeError& e) {
    throw ProtocolAbort(AbortReason::protocol_violation, e.what());
  }
  if (seed.n_in != outcome.corrected.size() || seed.n_out != s.n_out)
    throw ProtocolAbort(AbortReason::protocol_violation, "QKDSEED dimensions");
  partial->key = pa::toeplitz_hash(outcome.corrected, seed).to_bytes_msb();
  return partial;
}

}  // namespace

std::optional<AuthKey> produce_auth_key_initiator(const qsim::Block& blk,
                                                  uint32_t length_bytes,
                                                  const QkdConfig& cfg, FrameIo& io,
                                                  Drbg& rng) {
  if (length_bytes == 0) throw std::invalid_argument("qkdlane: zero-length request");
  SessionSetup s;
  s.n_out = length_bytes * 8;
  Seed256 sample_seed = rng.seed256();

  Frame bas;
  bas.set_tag("QKDBAS");
  wire::put_u32(bas.payload, uint32_t(blk.size()));
  wire::put_u32(bas.payload, s.n_out);
  wire::put_bytes(bas.payload, sample_seed);
  wire::put_bytes(bas.payload, blk.bases.to_bytes_msb());
  io.send(bas);

  Frame sft = expect(io, "QKDSFT");
  BitVec their_bases, their_sample;
  try {
    wire::Reader r(sft.payload);
    uint32_t n = r.u32();
    if (n != blk.size())
      throw ProtocolAbort(AbortReason::protocol_violation, "QKDSFT block size");
    their_bases = BitVec::from_bytes_msb(r.raw((n + 7) / 8), n);
    uint32_t k = r.u32();
    their_sample = BitVec::from_bytes_msb(r.raw((k + 7) / 8), k);
    r.expect_end();
  } catch (const wire::DecodeError& e) {
    throw ProtocolAbort(AbortReason::protocol_violation, e.what());
  }

  s.mine = sift(blk.bases, their_bases, blk.outcomes, sample_seed, cfg.sample_fraction);
  if (s.mine.n_sift == 0)
    throw ProtocolAbort(AbortReason::insufficient_raw, "empty sifted key");
  if (their_sample.size() != s.mine.sample.size())
    throw ProtocolAbort(AbortReason::protocol_violation, "QKDSFT sample size");
  s.errors = count_errors(s.mine.sample, their_sample);
  s.q_est = s.mine.sample.empty() ? 0.0 : double(s.errors) / double(s.mine.sample.size());

  Frame est;
  est.set_tag("QKDEST");
  wire::put_u64(est.payload, s.errors);
  io.send(est);

  return run_tail_initiator(s, cfg, io, rng);
}

std::optional<AuthKey> produce_auth_key_responder(const qsim::Block& blk,
                                                  const QkdConfig& cfg, FrameIo& io,
                                                  Drbg& rng) {
  Frame bas = expect(io, "QKDBAS");
  SessionSetup s;
  Seed256 sample_seed{};
  BitVec their_bases;
  try {
    wire::Reader r(bas.payload);
    uint32_t n = r.u32();
    if (n != blk.size())
      throw ProtocolAbort(AbortReason::protocol_violation, "QKDBAS block size");
    s.n_out = r.u32();
    auto seed_bytes = r.raw(32);
    std::copy(seed_bytes.begin(), seed_bytes.end(), sample_seed.begin());
    their_bases = BitVec::from_bytes_msb(r.raw((n + 7) / 8), n);
    r.expect_end();
  } catch (const wire::DecodeError& e) {
    throw ProtocolAbort(AbortReason::protocol_violation, e.what());
  }
  if (s.n_out == 0 || s.n_out % 8 != 0)
    throw ProtocolAbort(AbortReason::protocol_violation, "QKDBAS output length");

  s.mine = sift(their_bases, blk.bases, blk.outcomes, sample_seed, cfg.sample_fraction);

  // announce before the emptiness check so the peer is never left waiting
  Frame sft;
  sft.set_tag("QKDSFT");
  wire::put_u32(sft.payload, uint32_t(blk.size()));
  wire::put_bytes(sft.payload, blk.bases.to_bytes_msb());
  wire::put_u32(sft.payload, uint32_t(s.mine.sample.size()));
  wire::put_bytes(sft.payload, s.mine.sample.to_bytes_msb());
  io.send(sft);
  if (s.mine.n_sift == 0)
    throw ProtocolAbort(AbortReason::insufficient_raw, "empty sifted key");

  Frame est = expect(io, "QKDEST");
  try {
    wire::Reader r(est.payload);
    s.errors = r.u64();
    r.expect_end();
  } catch (const wire::DecodeError& e) {
    throw ProtocolAbort(AbortReason::protocol_violation, e.what());
  }
  if (s.errors > s.mine.sample.size())
    throw ProtocolAbort(AbortReason::protocol_violation, "QKDEST error count");
  s.q_est = s.mine.sample.empty() ? 0.0 : double(s.errors) / double(s.mine.sample.size());

  return run_tail_responder(s, cfg, io, rng);
}

}  // namespace qot::qkdlane
