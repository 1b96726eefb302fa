#include "qot/mpc.hpp"

#include <openssl/sha.h>

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "qot/abort.hpp"
#include "qot/wire.hpp"

namespace qot::mpc {

namespace {

using transport::Frame;

Frame expect(FrameIo& io, const char* tag) {
  Frame f = io.recv();
  if (!f.tag_is(tag))
    throw ProtocolAbort(AbortReason::protocol_violation,
                        std::string("expected ") + tag + ", got " + f.tag_string());
  return f;
}

// Domain-separated expansion: SHA-256 over (tag, inputs) seeds the CTR DRBG.
BitVec expand(uint8_t domain, uint64_t index, const BitVec& input, uint64_t nbits) {
  std::vector<uint8_t> in;
  in.push_back(domain);
  wire::put_u64(in, index);
  wire::put_bytes(in, input.to_bytes_msb());
  Seed256 seed{};
  SHA256(in.data(), in.size(), seed.data());
  Drbg g(seed);
  return g.bits(nbits);
}

constexpr uint8_t kDomainColumn = 0x43;  // PRG column stretch
constexpr uint8_t kDomainRow = 0x52;     // IKNP row hash

uint64_t low64(const BitVec& v) { return v.words().empty() ? 0 : v.words()[0]; }

}  // namespace

std::pair<RotSenderBatch, RotReceiverBatch> sample_rots(std::size_t n, std::size_t width,
                                                        Drbg& rng) {
  RotSenderBatch s;
  RotReceiverBatch r;
  s.r0.reserve(n);
  s.r1.reserve(n);
  r.r.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.r0.push_back(rng.bits(width));
    s.r1.push_back(rng.bits(width));
    bool c = rng.bit();
    r.c.push_back(c);
    r.r.push_back(c ? s.r1.back() : s.r0.back());
  }
  return {std::move(s), std::move(r)};
}

void ot_transfer_send(const BitVec& r0, const BitVec& r1, const BitVec& m0,
                      const BitVec& m1, FrameIo& io) {
  if (r0.size() != r1.size() || m0.size() != r0.size() || m1.size() != r0.size())
    throw std::invalid_argument("ot_transfer: length mismatch");
  Frame df = expect(io, "OTD");
  if (df.payload.size() != 1 || df.payload[0] > 1)
    throw ProtocolAbort(AbortReason::protocol_violation, "OTD payload");
  bool d = df.payload[0] & 1;

  BitVec ct0 = m0, ct1 = m1;
  ct0.xor_with(d ? r1 : r0);       // m0 xor r_d
  ct1.xor_with(d ? r0 : r1);       // m1 xor r_{1 xor d}
  Frame cf;
  cf.set_tag("OTCT");
  wire::put_u32(cf.payload, uint32_t(m0.size()));
  wire::put_bytes(cf.payload, ct0.to_bytes_msb());
  wire::put_bytes(cf.payload, ct1.to_bytes_msb());
  io.send(cf);
}

BitVec ot_transfer_recv(const BitVec& rc, bool c, bool b, FrameIo& io) {
  Frame df;
  df.set_tag("OTD");
  df.payload.push_back(uint8_t(b != c));
  io.send(df);

  Frame cf = expect(io, "OTCT");
  try {
    wire::Reader r(cf.payload);
    uint32_t len = r.u32();
    if (len != rc.size())
      throw ProtocolAbort(AbortReason::protocol_violation, "OTCT length");
    std::size_t nb = (len + 7) / 8;
    BitVec ct0 = BitVec::from_bytes_msb(r.raw(nb), len);
    BitVec ct1 = BitVec::from_bytes_msb(r.raw(nb), len);
    r.expect_end();
    BitVec out = b ? ct1 : ct0;
    out.xor_with(rc);
    return out;
  } catch (const wire::DecodeError& e) {
    throw ProtocolAbort(AbortReason::protocol_violation, e.what());
  }
}

ExtSender::ExtSender(RotReceiverBatch base, OtLedger* ledger)
    : base_(std::move(base)), ledger_(ledger) {
  if (base_.size() != kBaseCount || base_.c.size() != kBaseCount)
    throw std::invalid_argument("ot_extend: need exactly 128 base OTs");
  for (const BitVec& v : base_.r)
    if (v.size() != kBaseWidth) throw std::invalid_argument("ot_extend: base width");
}

ExtReceiver::ExtReceiver(RotSenderBatch base, OtLedger* ledger)
    : base_(std::move(base)), ledger_(ledger) {
  if (base_.size() != kBaseCount || base_.r1.size() != kBaseCount)
    throw std::invalid_argument("ot_extend: need exactly 128 base OTs");
  for (std::size_t i = 0; i < kBaseCount; ++i)
    if (base_.r0[i].size() != kBaseWidth || base_.r1[i].size() != kBaseWidth)
      throw std::invalid_argument("ot_extend: base width");
}

RotReceiverBatch ExtReceiver::extend(const BitVec& choices, uint32_t length_bits,
                                     FrameIo& io) {
  if (used_) throw std::logic_error("ot_extend: base OTs already consumed");
  if (choices.empty() || length_bits == 0)
    throw std::invalid_argument("ot_extend: empty request");
  used_ = true;
  uint64_t k = choices.size();

  // Column i of T comes from the base-OT string the peer may also know;
  // u_i = t0_i xor t1_i xor x hides x behind the string it does not.
  std::vector<BitVec> t0(kBaseCount);
  Frame uf;
  uf.set_tag("EXTU");
  wire::put_u32(uf.payload, uint32_t(k));
  wire::put_u32(uf.payload, length_bits);
  for (std::size_t i = 0; i < kBaseCount; ++i) {
    t0[i] = expand(kDomainColumn, i, base_.r0[i], k);
    BitVec u = expand(kDomainColumn, i, base_.r1[i], k);
    u.xor_with(t0[i]);
    u.xor_with(choices);
    wire::put_bytes(uf.payload, u.to_bytes_msb());
  }
  io.send(uf);

  RotReceiverBatch out;
  out.c = choices;
  out.r.reserve(k);
  for (uint64_t j = 0; j < k; ++j) {
    BitVec row(kBaseCount);
    for (std::size_t i = 0; i < kBaseCount; ++i) row.set(i, t0[i].get(j));
    out.r.push_back(expand(kDomainRow, j, row, length_bits));
  }
  if (ledger_) {
    ledger_->base_consumed += kBaseCount;
    ledger_->extended_produced += k;
  }
  return out;
}

RotSenderBatch ExtSender::extend(uint32_t count, uint32_t length_bits, FrameIo& io) {
  if (used_) throw std::logic_error("ot_extend: base OTs already consumed");
  if (count == 0 || length_bits == 0)
    throw std::invalid_argument("ot_extend: empty request");
  used_ = true;

  Frame uf = expect(io, "EXTU");
  std::vector<BitVec> q(kBaseCount);
  try {
    wire::Reader r(uf.payload);
    uint32_t k = r.u32();
    uint32_t len = r.u32();
    if (k != count || len != length_bits)
      throw ProtocolAbort(AbortReason::protocol_violation, "EXTU geometry");
    std::size_t nb = (std::size_t(k) + 7) / 8;
    for (std::size_t i = 0; i < kBaseCount; ++i) {
      q[i] = expand(kDomainColumn, i, base_.r[i], k);
      if (base_.c.get(i)) {
        BitVec u = BitVec::from_bytes_msb(r.raw(nb), k);
        q[i].xor_with(u);
      } else {
        r.raw(nb);
      }
    }
    r.expect_end();
  } catch (const wire::DecodeError& e) {
    throw ProtocolAbort(AbortReason::protocol_violation, e.what());
  }

  RotSenderBatch out;
  out.r0.reserve(count);
  out.r1.reserve(count);
  for (uint64_t j = 0; j < count; ++j) {
    BitVec row(kBaseCount);
    for (std::size_t i = 0; i < kBaseCount; ++i) row.set(i, q[i].get(j));
    out.r0.push_back(expand(kDomainRow, j, row, length_bits));
    row.xor_with(base_.c);  // q_j xor s
    out.r1.push_back(expand(kDomainRow, j, row, length_bits));
  }
  if (ledger_) {
    ledger_->base_consumed += kBaseCount;
    ledger_->extended_produced += count;
  }
  return out;
}

Ring gilboa_mul_send(Ring x, SenderPool& pool, FrameIo& io, Drbg& rng) {
  if (pool.next + 64 > pool.rots.size()) throw OtExhausted{};
  Frame df = expect(io, "GILD");
  if (df.payload.size() != 8)
    throw ProtocolAbort(AbortReason::protocol_violation, "GILD payload");
  wire::Reader r(df.payload);
  uint64_t dbits = r.u64();

  Ring share = 0;
  Frame cf;
  cf.set_tag("GILCT");
  for (unsigned i = 0; i < 64; ++i) {
    const BitVec& r0 = pool.rots.r0[pool.next];
    const BitVec& r1 = pool.rots.r1[pool.next];
    ++pool.next;
    bool d = (dbits >> i) & 1;
    Ring m = rng.u64();
    Ring ct0 = (m) ^ low64(d ? r1 : r0);
    Ring ct1 = (m + (x << i)) ^ low64(d ? r0 : r1);
    wire::put_u64(cf.payload, ct0);
    wire::put_u64(cf.payload, ct1);
    share -= m;
  }
  io.send(cf);
  if (pool.ledger) pool.ledger->extended_consumed += 64;
  return share;
}

Ring gilboa_mul_recv(Ring y, ReceiverPool& pool, FrameIo& io) {
  if (pool.next + 64 > pool.rots.size()) throw OtExhausted{};
  uint64_t dbits = 0;
  for (unsigned i = 0; i < 64; ++i) {
    bool b = (y >> i) & 1;
    bool c = pool.rots.c.get(pool.next + i);
    if (b != c) dbits |= uint64_t{1} << i;
  }
  Frame df;
  df.set_tag("GILD");
  wire::put_u64(df.payload, dbits);
  io.send(df);

  Frame cf = expect(io, "GILCT");
  if (cf.payload.size() != 64 * 16)
    throw ProtocolAbort(AbortReason::protocol_violation, "GILCT payload");
  wire::Reader r(cf.payload);
  Ring share = 0;
  for (unsigned i = 0; i < 64; ++i) {
    Ring ct0 = r.u64();
    Ring ct1 = r.u64();
    bool b = (y >> i) & 1;
    share += (b ? ct1 : ct0) ^ low64(pool.rots.r[pool.next]);
    ++pool.next;
  }
  if (pool.ledger) pool.ledger->extended_consumed += 64;
  return share;
}

std::vector<Triple> triple_gen(int party, uint32_t count, SenderPool& sp,
                               ReceiverPool& rp, FrameIo& io, Drbg& rng) {
  std::vector<Triple> out;
  out.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    Triple t;
    t.a = rng.u64();
    t.b = rng.u64();
    // cross terms a0*b1 (party 0 sends) then a1*b0 (party 1 sends)
    if (party == 0) {
      t.c = t.a * t.b + gilboa_mul_send(t.a, sp, io, rng) + gilboa_mul_recv(t.b, rp, io);
    } else {
      t.c = t.a * t.b + gilboa_mul_recv(t.b, rp, io) + gilboa_mul_send(t.a, sp, io, rng);
    }
    out.push_back(t);
  }
  return out;
}

Ring beaver_mul(int party, Ring x, Ring y, TriplePool& pool, FrameIo& io) {
  if (pool.next >= pool.t.size()) throw OtExhausted{};
  Triple t = pool.t[pool.next++];
  Ring e_sh = x - t.a;
  Ring f_sh = y - t.b;
  Frame ef;
  ef.set_tag("BEAVEF");
  wire::put_u64(ef.payload, e_sh);
  wire::put_u64(ef.payload, f_sh);
  io.send(ef);

  Frame pf = expect(io, "BEAVEF");
  if (pf.payload.size() != 16)
    throw ProtocolAbort(AbortReason::protocol_violation, "BEAVEF payload");
  wire::Reader r(pf.payload);
  Ring e = e_sh + r.u64();
  Ring f = f_sh + r.u64();
  Ring z = t.c + e * t.b + f * t.a;
  if (party == 0) z += e * f;
  return z;
}

std::pair<Ring, Ring> share(Ring v, Drbg& rng) {
  Ring s0 = rng.u64();
  return {s0, v - s0};
}

Ring fx_encode(double v) {
  double scaled = std::round(v * 65536.0);
  if (scaled < -2147483648.0) scaled = -2147483648.0;
  if (scaled > 2147483647.0) scaled = 2147483647.0;
  return Ring(int64_t(scaled));
}

double fx_decode(Ring v) { return double(int64_t(v)) / 65536.0; }

void write_db(const std::string& path, const FpDb& db) {
  if (db.data.size() != std::size_t(db.m) * db.n)
    throw std::invalid_argument("fpdb: shape mismatch");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("fpdb: cannot open " + path);
  std::vector<uint8_t> buf;
  buf.insert(buf.end(), {'Q', 'O', 'T', 'F', 'P', 'D', 'B', '1'});
  wire::put_u32(buf, db.m);
  wire::put_u32(buf, db.n);
  for (Ring v : db.data) wire::put_u64(buf, v);
  os.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!os) throw std::runtime_error("fpdb: write failed: " + path);
}

FpDb read_db(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("fpdb: cannot open " + path);
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(is)),
                           std::istreambuf_iterator<char>());
  try {
    wire::Reader r(buf);
    auto magic = r.raw(8);
    const char want[8] = {'Q', 'O', 'T', 'F', 'P', 'D', 'B', '1'};
    if (!std::equal(magic.begin(), magic.end(), want))
      throw std::runtime_error("fpdb: bad magic in " + path);
    FpDb db;
    db.m = r.u32();
    db.n = r.u32();
    std::size_t count = std::size_t(db.m) * db.n;
    db.data.reserve(count);
    for (std::size_t i = 0; i < count; ++i) db.data.push_back(r.u64());
    r.expect_end();
    return db;
  } catch (const wire::DecodeError& e) {
    throw std::runtime_error(std::string("fpdb: ") + e.what());
  }
}

std::pair<FpDb, FpDb> share_db(const FpDb& db, Drbg& rng) {
  FpDb a, b;
  a.m = b.m = db.m;
  a.n = b.n = db.n;
  a.data.reserve(db.data.size());
  b.data.reserve(db.data.size());
  for (Ring v : db.data) {
    auto [s0, s1] = share(v, rng);
    a.data.push_back(s0);
    b.data.push_back(s1);
  }
  return {std::move(a), std::move(b)};
}

MatchResult match_fingerprint(int party, const std::vector<Ring>& template_share,
                              const FpDb& db_share, Ring threshold,
                              TriplePool& triples, FrameIo& io) {
  if (template_share.size() != db_share.n)
    throw std::invalid_argument("match: template/database shape mismatch");
  if (db_share.data.size() != std::size_t(db_share.m) * db_share.n)
    throw std::invalid_argument("match: database shape mismatch");

  MatchResult out;
  for (uint32_t row = 0; row < db_share.m; ++row) {
    // N subtractions, N Beaver squares, N-1 additions: 2N-1 additions total
    Ring acc = 0;
    for (uint32_t i = 0; i < db_share.n; ++i) {
      Ring w = template_share[i] - db_share.at(row, i);
      acc += beaver_mul(party, w, w, triples, io);
    }
    Frame df;
    df.set_tag("FPDIST");
    wire::put_u64(df.payload, acc);
    io.send(df);
    Frame pf = expect(io, "FPDIST");
    if (pf.payload.size() != 8)
      throw ProtocolAbort(AbortReason::protocol_violation, "FPDIST payload");
    wire::Reader r(pf.payload);
    Ring dist = acc + r.u64();
    out.distances.push_back(dist);
    out.verdicts.push_back(dist <= threshold ? 1 : 0);
  }
  return out;
}

}  // namespace qot::mpc
