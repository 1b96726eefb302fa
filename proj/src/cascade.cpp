#include "qot/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>

#include "qot/abort.hpp"
#include "qot/gf128.hpp"
#include "qot/wire.hpp"

namespace qot::cascade {

namespace {

using transport::Frame;

// Descriptor kinds on the wire, all sharing the (off, len) encoding:
//   len >= 1              parity probe; carries one payload parity bit
//   len == 0, off == ~0u  padding; carries one zero parity bit
//   len == 0 otherwise    flip command: toggle the bit at `off`; no parity bit
// Probes and padding count as leakage; commands and frame order follow
// deterministically from earlier responses and leak nothing.
inline constexpr uint32_t kPadOff = 0xFFFFFFFFu;

struct Descriptor {
  uint32_t off = 0;  // global shuffled coordinate: pass * n + offset
  uint32_t len = 0;
};

std::string pass_label(const char* what, int pass) {
  return std::string(what) + "-" + std::to_string(pass);
}

Gf128 verify_point(const Seed256& transcript_seed) {
  Drbg g(Drbg::derive(transcript_seed, "casc-verify"));
  auto bytes = g.bytes(16);
  return Gf128::from_bytes(std::span<const uint8_t, 16>(bytes.data(), 16));
}

std::array<uint8_t, 16> block_hash(const Gf128& point, const BitVec& block) {
  auto bytes = block.to_bytes_msb();
  return gf128_poly_hash(point, bytes).to_bytes();
}

std::vector<uint8_t> encode_par(uint8_t pass, uint8_t pos,
                                const std::vector<Descriptor>& descs, const BitVec& parities) {
  std::vector<uint8_t> out;
  wire::put_u8(out, pass);
  wire::put_u8(out, pos);
  wire::put_u32(out, uint32_t(descs.size()));
  for (const auto& d : descs) {
    wire::put_u32(out, d.off);
    wire::put_u32(out, d.len);
  }
  wire::put_bytes(out, parities.to_bytes_msb());
  return out;
}

std::vector<uint8_t> encode_rsp(uint8_t pass, uint8_t pos, const BitVec& bits) {
  std::vector<uint8_t> out;
  wire::put_u8(out, pass);
  wire::put_u8(out, pos);
  wire::put_u32(out, uint32_t(bits.size()));
  wire::put_bytes(out, bits.to_bytes_msb());
  return out;
}

// The permutation state both parties derive from the shared seed.
struct PassLayout {
  std::vector<uint32_t> perm;  // shuffled position -> original index
  uint32_t block_len = 0;
};

class Shuffler {
 public:
  Shuffler(const Seed256& seed, uint64_t n) : seed_(seed), n_(n) {}

  const PassLayout& layout(int pass, uint32_t block_len) {
    while (passes_.size() <= std::size_t(pass)) {
      PassLayout l;
      l.perm.resize(n_);
      for (uint64_t i = 0; i < n_; ++i) l.perm[i] = uint32_t(i);
      Drbg g(Drbg::derive(seed_, pass_label("casc-perm", int(passes_.size()))));
      g.shuffle(l.perm);
      passes_.push_back(std::move(l));
    }
    passes_[std::size_t(pass)].block_len = block_len;
    return passes_[std::size_t(pass)];
  }
  const PassLayout& at(int pass) const { return passes_[std::size_t(pass)]; }
  int created() const { return int(passes_.size()); }

 private:
  Seed256 seed_;
  uint64_t n_;
  std::vector<PassLayout> passes_;
};

}  // namespace

std::vector<uint32_t> pass_schedule(uint64_t n, double p_hat, const CascadeConfig& cfg) {
  uint32_t half = uint32_t(std::max<uint64_t>(n / 2, 1));
  std::vector<uint32_t> ks;
  if (p_hat <= 0.0) {
    ks.push_back(half);  // single confirmation pass
    return ks;
  }
  // k1 ~ 0.65/p and a wide second pass tuned empirically for f at 1% QBER;
  // every later pass is a half-length confirmation sweep.
  uint32_t k1 = uint32_t(std::clamp<double>(std::round(0.65 / p_hat), cfg.min_block, half));
  ks.push_back(k1);
  if (cfg.passes >= 2) ks.push_back(std::min(16 * k1, half));
  for (int i = 2; i < cfg.passes; ++i) ks.push_back(half);
  return ks;
}

double measure_efficiency(uint64_t leak_correlated, uint64_t n_raw, double p_hat) {
  if (p_hat <= 0.0) return 0.0;
  long double h = -(long double)p_hat * std::log2((long double)p_hat) -
                  (1.0L - p_hat) * std::log2(1.0L - p_hat);
  return double((long double)leak_correlated / ((long double)n_raw * h));
}

// ---------------------------------------------------------------------------
// Sender: owns all bookkeeping, drives every round. Known interval parities
// are cached exactly (flips toggle every containing entry), so re-searches
// after backtracking reuse earlier disclosures instead of re-probing.

namespace {

class SenderEngine {
 public:
  SenderEngine(const std::array<BitVec, 2>& blocks, double p_hat, const Seed256& seed,
               const CascadeConfig& cfg, FrameIo& io)
      : blocks_(blocks),
        cfg_(cfg),
        io_(io),
        n_(blocks[0].size()),
        npos_(cfg.single_block ? 1 : 2),
        shuffler_(seed, blocks[0].size()),
        vpoint_(verify_point(seed)) {
    if (npos_ == 2 && blocks[1].size() != n_)
      throw std::invalid_argument("cascade: sender blocks differ in length");
    schedule_ = pass_schedule(n_, p_hat, cfg);
    if ((uint64_t)schedule_.size() * n_ >= kPadOff)
      throw std::invalid_argument("cascade: block too large for the wire coordinates");
    Frame f;
    f.set_tag("CASCSEED");
    f.payload.assign(seed.begin(), seed.end());
    io_.send(f);
  }

  // All passes open up front: block parities are kept exact under flips, so
  // the probe set matches a pass-by-pass run, but both positions stay busy
  // for the whole session and parity frames need almost no padding.
  ReconciliationOutcome run() {
    for (int pass = 0; pass < int(schedule_.size()); ++pass) open_pass(pass);
    while (round_once(int(schedule_.size()) - 1)) {
    }
    return finish();
  }

 private:
  // par: -1 unknown (fresh pass block), else exact mismatch parity.
  struct Interval {
    uint8_t pass;
    uint32_t block, lo, hi;
    int8_t par;
    bool dead = false;
  };
  struct CacheEntry {
    uint32_t lo, hi;
    uint8_t par;
  };

  uint32_t blocks_in(int pass) const {
    return std::max<uint32_t>(1, uint32_t(n_ / schedule_[std::size_t(pass)]));
  }
  // the last block absorbs the remainder so no initial block has length 1
  uint32_t block_lo(int pass, uint32_t b) const { return b * schedule_[std::size_t(pass)]; }
  uint32_t block_hi(int pass, uint32_t b) const {
    return b + 1 == blocks_in(pass) ? uint32_t(n_) : (b + 1) * schedule_[std::size_t(pass)];
  }
  uint32_t block_of(int pass, uint32_t shuffled) const {
    return std::min(shuffled / schedule_[std::size_t(pass)], blocks_in(pass) - 1);
  }
  uint32_t coord(int pass, uint32_t lo) const { return uint32_t(pass) * uint32_t(n_) + lo; }

  void open_pass(int pass) {
    shuffler_.layout(pass, schedule_[std::size_t(pass)]);
    uint32_t nb = blocks_in(pass);
    odd_.emplace_back();
    outcome_.mismatches_per_pass.push_back({0, 0});
    for (int pos = 0; pos < npos_; ++pos) {
      odd_.back()[pos].assign(nb, 0);
      active_[pos].emplace_back(nb, 0);
      cache_[pos].emplace_back(nb);
      for (uint32_t b = 0; b < nb; ++b) {
        work_[pos].push_back({uint8_t(pass), b, block_lo(pass, b), block_hi(pass, b), -1});
        active_[pos][std::size_t(pass)][b] = 1;
      }
    }
  }

  int8_t cache_lookup(int pos, const Interval& iv, uint32_t lo, uint32_t hi) const {
    for (const auto& e : cache_[pos][iv.pass][iv.block])
      if (e.lo == lo && e.hi == hi) return int8_t(e.par);
    return -1;
  }

  void do_flip(int pos, int pass, uint32_t shuffled) {
    uint32_t orig = shuffler_.at(pass).perm[shuffled];
    ++outcome_.errors_found[std::size_t(pos)];
    for (int p = 0; p < shuffler_.created(); ++p) {
      uint32_t s = inv_lookup(p, orig);
      uint32_t b = block_of(p, s);
      odd_[std::size_t(p)][pos][b] ^= 1;
      for (auto& e : cache_[pos][std::size_t(p)][b])
        if (e.lo <= s && s < e.hi) e.par ^= 1;
    }
    for (auto& iv : work_[pos]) {
      if (iv.dead || iv.par < 0) continue;
      uint32_t s = inv_lookup(iv.pass, orig);
      if (iv.lo <= s && s < iv.hi) iv.par ^= 1;
    }
  }

  uint32_t inv_lookup(int pass, uint32_t orig) {
    if (inv_.size() <= std::size_t(pass)) inv_.resize(std::size_t(pass) + 1);
    auto& inv = inv_[std::size_t(pass)];
    if (inv.empty()) {
      const auto& perm = shuffler_.at(pass).perm;
      inv.resize(perm.size());
      for (uint32_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
    }
    return inv[orig];
  }

  void compact(int pos) {
    auto& w = work_[pos];
    w.erase(std::remove_if(w.begin(), w.end(), [](const Interval& iv) { return iv.dead; }),
            w.end());
  }

  void refill(int pos) {
    for (int pass = 0; pass < shuffler_.created(); ++pass) {
      const auto& odd = odd_[std::size_t(pass)][pos];
      for (uint32_t b = 0; b < odd.size(); ++b) {
        if (!odd[b] || active_[pos][std::size_t(pass)][b]) continue;
        work_[pos].push_back({uint8_t(pass), b, block_lo(pass, b), block_hi(pass, b), 1});
        active_[pos][std::size_t(pass)][b] = 1;
      }
    }
  }

  void retire(int pos, Interval& iv) {
    iv.dead = true;
    active_[pos][iv.pass][iv.block] = 0;
  }

  // Advance every live interval until it either emits one probe, turns into
  // a flip command, or dies. Cache hits descend for free. Probes are only
  // emitted for the earliest pass that wants one: blocks of different passes
  // can be chasing the same error, and pausing the larger (later-pass) block
  // lets the cheaper search land the flip, which then retires the paused
  // interval without spending any further parity bits on it.
  void advance(int pos, std::vector<Descriptor>& probes, std::vector<std::size_t>& owner,
               std::vector<Descriptor>& cmds) {
    compact(pos);
    refill(pos);
    std::stable_sort(work_[pos].begin(), work_[pos].end(), [](const Interval& a, const Interval& b) {
      return std::pair(a.hi - a.lo, a.pass) < std::pair(b.hi - b.lo, b.pass);
    });
    int64_t gate_len = -1;
    int gate_pass = -1;
    for (std::size_t w = 0; w < work_[pos].size(); ++w) {
      Interval& iv = work_[pos][w];
      // Big blocks (late passes) are hunted one at a time: the partner of a
      // freshly fixed error is nearly always found through the small-block
      // backtracks, retiring the remaining big hunts for free.
      if (iv.par > 0 && gate_len >= 0 &&
          (int64_t(iv.hi - iv.lo) != gate_len || iv.pass != gate_pass ||
           gate_len > int64_t(8 * schedule_[0])))
        continue;
      while (!iv.dead) {
        if (iv.par == 0) {
          retire(pos, iv);
          break;
        }
        uint32_t len = iv.hi - iv.lo;
        if (iv.par == 1 && len == 1) {
          cmds.push_back({coord(iv.pass, iv.lo), 0});
          do_flip(pos, iv.pass, iv.lo);
          retire(pos, iv);
          break;
        }
        if (iv.par < 0) {  // fresh pass block: probe the whole of it, ungated
          probes.push_back({coord(iv.pass, iv.lo), len});
          owner.push_back(w);
          break;
        }
        uint32_t mid = iv.lo + len / 2;
        int8_t left = cache_lookup(pos, iv, iv.lo, mid);
        if (left < 0) {
          probes.push_back({coord(iv.pass, iv.lo), len / 2});
          owner.push_back(w);
          gate_len = iv.hi - iv.lo;
          gate_pass = iv.pass;
          break;
        }
        if (left == 1) iv.hi = mid;
        else iv.lo = mid;
      }
    }
  }

  // One wire round: CASCPAR then CASCRSP per position. Probe lists are
  // padded to a common length so the disclosed parity count is identical
  // for both positions in every round.
  bool round_once(int current_pass) {
    std::array<std::vector<Descriptor>, 2> probes, cmds;
    std::array<std::vector<std::size_t>, 2> owner;
    for (int pos = 0; pos < npos_; ++pos)
      advance(pos, probes[std::size_t(pos)], owner[std::size_t(pos)], cmds[std::size_t(pos)]);

    // While both positions still have probes pending, emit matched counts and
    // defer the excess; padding is then needed only in the tail when one
    // position has finished outright.
    if (npos_ == 2 && !probes[0].empty() && !probes[1].empty()) {
      std::size_t m = std::min(probes[0].size(), probes[1].size());
      for (int pos = 0; pos < 2; ++pos) {
        probes[std::size_t(pos)].resize(m);
        owner[std::size_t(pos)].resize(m);
      }
    }

    // Rounds carrying flip commands defer every probe: the flips may retire
    // or refill intervals on either side, and a command-only frame needs no
    // parity payload, so nothing has to be padded against it.
    bool any_cmds = !cmds[0].empty() || (npos_ == 2 && !cmds[1].empty());
    if (any_cmds)
      for (int pos = 0; pos < npos_; ++pos) {
        probes[std::size_t(pos)].clear();
        owner[std::size_t(pos)].clear();
      }

    std::size_t mx = probes[0].size();
    if (npos_ == 2) mx = std::max(mx, probes[1].size());
    bool any = mx > 0;
    for (int pos = 0; pos < npos_ && !any; ++pos) any = !cmds[std::size_t(pos)].empty();
    if (!any) return false;
    if (++outcome_.rounds > cfg_.max_rounds)
      throw ProtocolAbort(AbortReason::ir_stuck, "round limit exceeded");

    for (int pos = 0; pos < npos_; ++pos) {
      std::vector<Descriptor> descs = cmds[std::size_t(pos)];  // flips apply first
      descs.insert(descs.end(), probes[std::size_t(pos)].begin(), probes[std::size_t(pos)].end());
      descs.resize(descs.size() + (mx - probes[std::size_t(pos)].size()), {kPadOff, 0});
      BitVec par(mx);
      for (std::size_t i = 0; i < probes[std::size_t(pos)].size(); ++i)
        par.set(i, parity_of(pos, probes[std::size_t(pos)][i]));
      Frame f;
      f.set_tag("CASCPAR");
      f.payload = encode_par(uint8_t(current_pass), uint8_t(pos), descs, par);
      io_.send(f);
      outcome_.leak_bits[std::size_t(pos)] += mx;
    }

    std::array<BitVec, 2> rsp;
    std::array<bool, 2> seen{};
    for (int pos = 0; pos < npos_; ++pos) {
      Frame f = io_.recv();
      if (!f.tag_is("CASCRSP"))
        throw ProtocolAbort(AbortReason::protocol_violation, "expected CASCRSP");
      wire::Reader r(f.payload);
      (void)r.u8();
      uint8_t rpos = r.u8();
      uint32_t count = r.u32();
      if (rpos >= npos_ || count != mx || seen[rpos])
        throw ProtocolAbort(AbortReason::protocol_violation, "malformed CASCRSP");
      seen[rpos] = true;
      auto raw = r.raw((count + 7) / 8);
      r.expect_end();
      rsp[rpos] = BitVec::from_bytes_msb({raw.data(), raw.size()}, count);
    }

    for (int pos = 0; pos < npos_; ++pos) {
      for (std::size_t q = 0; q < owner[std::size_t(pos)].size(); ++q) {
        Interval& iv = work_[pos][owner[std::size_t(pos)][q]];
        bool r = rsp[std::size_t(pos)].get(q);
        const Descriptor& d = probes[std::size_t(pos)][q];
        if (iv.dead) continue;  // a command this round resolved it meanwhile
        if (iv.par < 0) {
          // fresh pass block parity
          odd_[iv.pass][pos][iv.block] = r ? 1 : 0;
          if (!r) {
            retire(pos, iv);
            continue;
          }
          iv.par = 1;
          ++outcome_.mismatches_per_pass[iv.pass][std::size_t(pos)];
          continue;
        }
        // probe of the left half [lo, lo+d.len)
        cache_[pos][iv.pass][iv.block].push_back({iv.lo, iv.lo + d.len, uint8_t(r)});
        int8_t right = int8_t((iv.par ^ (r ? 1 : 0)) & 1);
        if (r) {
          iv.hi = iv.lo + d.len;
          iv.par = 1;
        } else if (right == 1) {
          iv.lo = iv.lo + d.len;
          iv.par = 1;
        } else {
          retire(pos, iv);  // both halves even: nothing locatable here
        }
      }
    }
    return true;
  }

  bool parity_of(int pos, const Descriptor& d) const {
    if (d.len == 0) return false;
    int pass = int(d.off / n_);
    uint32_t lo = d.off % uint32_t(n_);
    const auto& perm = shuffler_.at(pass).perm;
    bool acc = false;
    for (uint32_t i = lo; i < lo + d.len; ++i) acc ^= blocks_[std::size_t(pos)].get(perm[i]);
    return acc;
  }

  ReconciliationOutcome finish() {
    Frame done;
    done.set_tag("CASCDONE");
    io_.send(done);
    Frame ver = io_.recv();
    if (!ver.tag_is("CASCVER"))
      throw ProtocolAbort(AbortReason::protocol_violation, "expected CASCVER");
    wire::Reader r(ver.payload);
    uint8_t claimed = r.u8();
    auto claimed_hash = r.raw(16);
    r.expect_end();

    int matches = 0;
    int match_pos = -1;
    for (int pos = 0; pos < npos_; ++pos) {
      auto h = block_hash(vpoint_, blocks_[std::size_t(pos)]);
      if (std::equal(claimed_hash.begin(), claimed_hash.end(), h.begin())) {
        ++matches;
        match_pos = pos;
      }
    }
    bool accept = matches == 1 && claimed < npos_ && match_pos == int(claimed);
    Frame fin;
    fin.set_tag("CASCFIN");
    fin.payload = {uint8_t(accept ? 1 : 0)};
    io_.send(fin);
    if (!accept)
      throw ProtocolAbort(AbortReason::ir_fail,
                          matches == 1 ? "claimed position mismatch"
                                       : (matches == 0 ? "no hash match" : "ambiguous match"));
    outcome_.verified = true;
    outcome_.matched_position = uint8_t(match_pos);
    return std::move(outcome_);
  }

  const std::array<BitVec, 2>& blocks_;
  CascadeConfig cfg_;
  FrameIo& io_;
  uint64_t n_;
  int npos_;
  Shuffler shuffler_;
  Gf128 vpoint_;
  std::vector<uint32_t> schedule_;
  std::vector<std::array<std::vector<uint8_t>, 2>> odd_;  // [pass][pos][block]
  std::array<std::vector<std::vector<uint8_t>>, 2> active_;  // [pos][pass][block]
  std::array<std::vector<std::vector<std::vector<CacheEntry>>>, 2> cache_;
  std::vector<std::vector<uint32_t>> inv_;  // lazy inverse perms
  std::array<std::vector<Interval>, 2> work_;
  ReconciliationOutcome outcome_;
};

// Receiver: answers whatever is asked and applies flip commands; it keeps
// no search state of its own.
class ReceiverEngine {
 public:
  ReceiverEngine(const BitVec& block, uint8_t position, double p_hat, const CascadeConfig& cfg,
                 FrameIo& io, Drbg& rng)
      : cfg_(cfg), io_(io), n_(block.size()), npos_(cfg.single_block ? 1 : 2),
        real_pos_(position) {
    if (real_pos_ >= npos_) throw std::invalid_argument("cascade: bad position");
    outcome_.corrected = block;
    double q = cfg.q_dummy >= 0.0 ? cfg.q_dummy : p_hat;
    dummy_ = BitVec(n_);
    if (npos_ == 2)
      for (uint64_t i = 0; i < n_; ++i)
        if (rng.unit() < q) dummy_.set(i, true);
  }

  ReconciliationOutcome run() {
    Frame seed_frame = io_.recv();
    if (!seed_frame.tag_is("CASCSEED") || seed_frame.payload.size() != 32)
      throw ProtocolAbort(AbortReason::protocol_violation, "expected CASCSEED");
    Seed256 seed;
    std::copy(seed_frame.payload.begin(), seed_frame.payload.end(), seed.begin());
    shuffler_.emplace(seed, n_);
    vpoint_ = verify_point(seed);

    uint64_t rounds = 0;
    while (true) {
      Frame f = io_.recv();
      if (f.tag_is("CASCPAR")) {
        if (++rounds > cfg_.max_rounds * 2)
          throw ProtocolAbort(AbortReason::ir_stuck, "round limit exceeded");
        answer(f);
      } else if (f.tag_is("CASCDONE")) {
        send_verify();
      } else if (f.tag_is("CASCFIN")) {
        return finish(f);
      } else {
        throw ProtocolAbort(AbortReason::protocol_violation,
                            "unexpected frame " + f.tag_string());
      }
    }
  }

 private:
  void answer(const Frame& f) {
    wire::Reader r(f.payload);
    uint8_t pass = r.u8();
    uint8_t pos = r.u8();
    uint32_t count = r.u32();
    if (pos >= npos_ || r.remaining() < uint64_t(count) * 8)
      throw ProtocolAbort(AbortReason::protocol_violation, "malformed CASCPAR");
    std::vector<Descriptor> descs(count);
    std::size_t npar = 0;
    for (auto& d : descs) {
      d.off = r.u32();
      d.len = r.u32();
      if (d.len >= 1 || d.off == kPadOff) ++npar;
    }
    auto raw = r.raw((npar + 7) / 8);
    r.expect_end();
    BitVec their = BitVec::from_bytes_msb({raw.data(), raw.size()}, npar);
    outcome_.leak_bits[pos] += npar;

    BitVec rsp(npar);
    std::size_t slot = 0;
    for (const Descriptor& d : descs) {
      if (d.len == 0) {
        if (d.off == kPadOff) {
          ++slot;  // padding: answer zero
          continue;
        }
        // flip command
        if (d.off >= uint64_t(shufflable_passes()) * n_)
          throw ProtocolAbort(AbortReason::protocol_violation, "flip out of range");
        flip(pos, d);
        continue;
      }
      if (uint64_t(d.off) + d.len > uint64_t(shufflable_passes()) * n_ ||
          (d.off % n_) + d.len > n_)
        throw ProtocolAbort(AbortReason::protocol_violation, "descriptor out of range");
      bool mismatch;
      if (pos == real_pos_) {
        mismatch = parity(outcome_.corrected, d) != their.get(slot);
      } else {
        mismatch = parity(dummy_, d);
      }
      rsp.set(slot, mismatch);
      ++slot;
    }
    Frame out;
    out.set_tag("CASCRSP");
    out.payload = encode_rsp(pass, pos, rsp);
    io_.send(out);
  }

  uint32_t shufflable_passes() const { return 32; }

  bool parity(const BitVec& bits, const Descriptor& d) {
    int pass = int(d.off / n_);
    uint32_t lo = d.off % uint32_t(n_);
    const auto& perm = shuffler_->layout(pass, std::max<uint32_t>(1, d.len)).perm;
    bool acc = false;
    for (uint32_t i = lo; i < lo + d.len; ++i) acc ^= bits.get(perm[i]);
    return acc;
  }

  void flip(uint8_t pos, const Descriptor& d) {
    int pass = int(d.off / n_);
    uint32_t orig = shuffler_->layout(pass, 1).perm[d.off % uint32_t(n_)];
    if (pos == real_pos_) outcome_.corrected.flip(orig);
    else dummy_.flip(orig);
    ++outcome_.errors_found[pos];
  }

  void send_verify() {
    Frame f;
    f.set_tag("CASCVER");
    f.payload.push_back(real_pos_);
    auto h = block_hash(vpoint_, outcome_.corrected);
    f.payload.insert(f.payload.end(), h.begin(), h.end());
    io_.send(f);
  }

  ReconciliationOutcome finish(const Frame& fin) {
    if (fin.payload.size() != 1)
      throw ProtocolAbort(AbortReason::protocol_violation, "malformed CASCFIN");
    if (fin.payload[0] != 1)
      throw ProtocolAbort(AbortReason::ir_fail, "sender rejected the corrected block");
    outcome_.verified = true;
    outcome_.matched_position = real_pos_;
    return std::move(outcome_);
  }

  CascadeConfig cfg_;
  FrameIo& io_;
  uint64_t n_;
  uint8_t npos_;
  uint8_t real_pos_;
  std::optional<Shuffler> shuffler_;
  Gf128 vpoint_{};
  BitVec dummy_;
  ReconciliationOutcome outcome_;
};

}  // namespace

ReconciliationOutcome reconcile_sender(const std::array<BitVec, 2>& blocks, double p_hat,
                                       const Seed256& transcript_seed,
                                       const CascadeConfig& cfg, FrameIo& io) {
  SenderEngine eng(blocks, p_hat, transcript_seed, cfg, io);
  ReconciliationOutcome out = eng.run();
  out.f_actual = measure_efficiency(out.leak_bits[out.matched_position],
                                    blocks[0].size(), p_hat);
  return out;
}

ReconciliationOutcome reconcile_receiver(const BitVec& block, uint8_t position, double p_hat,
                                         const CascadeConfig& cfg, FrameIo& io, Drbg& rng) {
  ReceiverEngine eng(block, position, p_hat, cfg, io, rng);
  ReconciliationOutcome out = eng.run();
  out.f_actual = measure_efficiency(out.leak_bits[position], block.size(), p_hat);
  return out;
}

}  // namespace qot::cascade
