#include "qot/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>

#include "qot/abort.hpp"
#include "qot/otcore.hpp"
#include "qot/pa.hpp"
#include "qot/wire.hpp"

namespace qot::pipeline {

namespace {

using transport::Frame;
using transport::Role;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

AbortReason verdict_reason(otcore::Verdict v) {
  switch (v) {
    case otcore::Verdict::abort_commitment: return AbortReason::commitment;
    case otcore::Verdict::abort_p_exceeded: return AbortReason::p_exceeded;
    case otcore::Verdict::abort_check_size: return AbortReason::check_size;
    default: return AbortReason::none;
  }
}

void append_block(qsim::Block& dst, const qsim::Block& src) {
  for (uint64_t i = 0; i < src.size(); ++i) {
    dst.bases.push_back(src.bases.get(i));
    dst.outcomes.push_back(src.outcomes.get(i));
  }
}

// Both lists strictly ascending; true when they share no element.
bool disjoint(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return false;
    if (a[i] < b[j]) ++i; else ++j;
  }
  return true;
}

inline constexpr std::size_t kCommitChunk = 100000;   // 9.6 MB frames
inline constexpr std::size_t kOpeningChunk = 200000;  // 6.6 MB frames

}  // namespace

const char* to_string(Phase p) {
  switch (p) {
    case Phase::quantum_load: return "quantum-load";
    case Phase::commit: return "commit";
    case Phase::open: return "open";
    case Phase::estimate: return "estimate";
    case Phase::separate: return "separate";
    case Phase::reconcile: return "reconcile";
    case Phase::amplify: return "amplify";
    case Phase::done: return "done";
    case Phase::aborted: return "aborted";
  }
  return "?";
}

void write_stage_log(std::ostream& os, const std::vector<StageRecord>& log) {
  for (const StageRecord& r : log) {
    os << r.ts << ' ' << to_string(r.phase) << ' ' << r.event;
    if (!r.detail.empty()) os << ' ' << r.detail;
    os << '\n';
  }
}

RawSource sim_source(const qsim::ChannelModel& model, const Seed256& seed, uint8_t party,
                     uint64_t chunk_events) {
  auto rng = std::make_shared<Drbg>(seed);
  return [model, rng, party, chunk_events]() -> std::optional<qsim::Block> {
    qsim::BlockPair bp = qsim::generate_block(model, chunk_events, *rng);
    return party == 0 ? bp.sender : bp.receiver;
  };
}

void Accumulator::feed(const qsim::Block& b) { append_block(buf_, b); }

qsim::Block Accumulator::take(uint64_t n) {
  if (buf_.size() < n) throw std::logic_error("Accumulator: short take");
  qsim::Block out;
  out.party = buf_.party;
  for (uint64_t i = 0; i < n; ++i) {
    out.bases.push_back(buf_.bases.get(i));
    out.outcomes.push_back(buf_.outcomes.get(i));
  }
  qsim::Block rest;
  rest.party = buf_.party;
  for (uint64_t i = n; i < buf_.size(); ++i) {
    rest.bases.push_back(buf_.bases.get(i));
    rest.outcomes.push_back(buf_.outcomes.get(i));
  }
  buf_ = std::move(rest);
  return out;
}

Pipeline::Pipeline(Role role, transport::Channel& ch, PipelineConfig cfg, RawSource source,
                   const Seed256& rng_seed)
    : role_(role),
      ch_(ch),
      cfg_(std::move(cfg)),
      source_(std::move(source)),
      rng_(rng_seed),
      store_(cfg_.bootstrap_secret, cfg_.auth_low_watermark),
      t0_(now_seconds()) {}

uint64_t Pipeline::request_ots(const OtRequest& req) {
  if (req.count == 0 || req.length == 0)
    throw std::invalid_argument("pipeline: empty OT request");
  if (role_ == Role::receiver && !req.choices.empty() && req.choices.size() != req.count)
    throw std::invalid_argument("pipeline: choices must match count");
  if (role_ == Role::sender && !req.choices.empty())
    throw std::invalid_argument("pipeline: sender requests carry no choices");
  uint64_t id = next_request_++;
  queue_.emplace_back(id, req);
  return id;
}

const std::vector<OtResult>* Pipeline::poll(uint64_t request_id) const {
  auto it = results_.find(request_id);
  return it == results_.end() ? nullptr : &it->second;
}

void Pipeline::log(Phase phase, const std::string& event, const std::string& detail) {
  log_.push_back({now_seconds() - t0_, phase, event, detail});
}

void Pipeline::open_context() {
  // key order is direction-fixed: sender->receiver context first
  auto dir_s = std::make_unique<auth::AuthContext>(next_handle_++, store_);
  auto dir_r = std::make_unique<auth::AuthContext>(next_handle_++, store_);
  if (role_ == Role::sender) {
    ctx_out_ = std::move(dir_s);
    ctx_in_ = std::move(dir_r);
  } else {
    ctx_in_ = std::move(dir_s);
    ctx_out_ = std::move(dir_r);
  }
}

void Pipeline::begin_stage(const char* name) {
  stage_stats_.push_back(StageStat{name, 0, 0, 0, 0});
}

void Pipeline::send_frame(Frame f, uint8_t lane, uint64_t session_id) {
  f.lane = lane;
  f.session_id = session_id;
  ch_.send(f);
  bool meta = f.tag_is("AUTH_TAG") || f.tag_is("ABORT");
  if (ctx_out_ && !meta) ctx_out_->absorb(f.encode());
  if (!stage_stats_.empty()) {
    ++stage_stats_.back().frames_out;
    stage_stats_.back().bytes_out += f.payload.size();
  }
}

Frame Pipeline::recv_checked() {
  Frame f = ch_.recv();
  if (f.tag_is("ABORT")) {
    AbortReason r = AbortReason::protocol_violation;
    if (f.payload.size() == 1) r = abort_reason_from_u8(f.payload[0]);
    throw ProtocolAbort(r, "peer abort");
  }
  if (ctx_in_ && !f.tag_is("AUTH_TAG")) ctx_in_->absorb(f.encode());
  if (!stage_stats_.empty()) {
    ++stage_stats_.back().frames_in;
    stage_stats_.back().bytes_in += f.payload.size();
  }
  return f;
}

void Pipeline::send_abort(AbortReason r, uint64_t session_id) {
  try {
    Frame f;
    f.set_tag("ABORT");
    wire::put_u8(f.payload, uint8_t(r));
    send_frame(std::move(f), transport::kLaneOt, session_id);
  } catch (...) {
    // peer may already be gone; the local throw carries the reason
  }
}

void Pipeline::boundary(const char* name, uint64_t session_id, Phase phase) {
  // finalize in direction order so mask bytes line up on both parties
  auth::AuthContext* dir_s = role_ == Role::sender ? ctx_out_.get() : ctx_in_.get();
  auth::AuthContext* dir_r = role_ == Role::sender ? ctx_in_.get() : ctx_out_.get();
  uint64_t handle = dir_s->handle();
  auth::Tag tag_s = dir_s->finalize_tag(store_);
  auth::Tag tag_r = dir_r->finalize_tag(store_);
  ctx_out_.reset();
  ctx_in_.reset();

  auto send_tags = [&] {
    Frame f;
    f.set_tag("AUTH_TAG");
    wire::put_u64(f.payload, handle);
    wire::put_bytes(f.payload, tag_s);
    wire::put_bytes(f.payload, tag_r);
    send_frame(std::move(f), transport::kLaneOt, session_id);
  };
  auto check_tags = [&] {
    Frame peer = recv_checked();
    if (!peer.tag_is("AUTH_TAG") || peer.payload.size() != 40)
      throw ProtocolAbort(AbortReason::protocol_violation, "expected AUTH_TAG");
    wire::Reader r(peer.payload);
    uint64_t peer_handle = r.u64();
    auth::Tag remote_s{}, remote_r{};
    auto bs = r.raw(16);
    std::copy(bs.begin(), bs.end(), remote_s.begin());
    auto br = r.raw(16);
    std::copy(br.begin(), br.end(), remote_r.begin());
    if (peer_handle != handle || !auth::verify_exchange(tag_s, remote_s) ||
        !auth::verify_exchange(tag_r, remote_r))
      throw ProtocolAbort(AbortReason::auth_fail, std::string("stage ") + name);
  };
  // Sequential exchange: the receiver only replies after the sender's tags
  // verified, so a detected forgery leaves the peer blocked until the abort
  // notice arrives instead of letting it run ahead.
  if (role_ == Role::sender) {
    send_tags();
    check_tags();
  } else {
    check_tags();
    send_tags();
  }
  log(phase, "auth:accept", name);
}

qsim::Block Pipeline::take_events(uint64_t n, uint8_t lane) {
  while (acc_.buffered() < n) {
    auto chunk = source_();
    if (!chunk) throw RawExhausted{};
    acc_.feed(*chunk);
  }
  mux_.push_back({event_cursor_, event_cursor_ + n, lane});
  event_cursor_ += n;
  return acc_.take(n);
}

void Pipeline::maybe_replenish(uint64_t session_id) {
  // 6 OT stage boundaries plus one QKD lane tag per session, two
  // direction contexts at each
  const std::size_t per_session = 7 * 2 * auth::kPerTagQuota;
  while (store_.needs_replenish() || store_.available() < per_session) {
    begin_stage("qkd");
    open_context();
    FrameIo io;
    io.send = [this, session_id](const Frame& f) {
      send_frame(f, transport::kLaneQkd, session_id);
    };
    io.recv = [this] { return recv_checked(); };

    qsim::Block blk = take_events(cfg_.qkd_block_events, transport::kLaneQkd);
    std::optional<qkdlane::AuthKey> key;
    for (int attempt = 0; attempt < 4 && !key; ++attempt) {
      if (attempt)  // backpressure: route more raw material and retry
        append_block(blk, take_events(cfg_.qkd_block_events, transport::kLaneQkd));
      key = role_ == Role::sender
                ? qkdlane::produce_auth_key_initiator(blk, cfg_.auth_replenish_bytes,
                                                      cfg_.qkd, io, rng_)
                : qkdlane::produce_auth_key_responder(blk, cfg_.qkd, io, rng_);
    }
    if (!key)
      throw ProtocolAbort(AbortReason::insufficient_raw, "qkd lane backpressure");
    boundary("qkd", session_id, Phase::quantum_load);
    store_.replenish(key->key);
    log(Phase::quantum_load, "qkd:replenish", std::to_string(key->key.size()) + " bytes");
  }
}

OtResult Pipeline::run_session(uint64_t request_id, uint32_t index, uint32_t length_bits,
                               std::optional<uint8_t> forced_c) {
  const params::ProtocolParams& P = cfg_.params;
  const auto counts = params::derived_counts(P);
  const uint64_t n0 = P.n0;
  const uint64_t sid = (request_id << 16) | index;
  const double t_start = now_seconds();
  stage_stats_.clear();

  maybe_replenish(sid);

  begin_stage("load");
  qsim::Block blk = take_events(n0, transport::kLaneOt);
  log(Phase::quantum_load, "load", std::to_string(n0) + " events");

  // --- commit: receiver commits to every (basis, outcome) pair ---
  begin_stage("commit");
  open_context();
  commitment::PublicString pub;
  std::vector<commitment::Commitment> coms;         // sender side
  std::vector<std::array<uint8_t, 32>> seeds;       // receiver side
  if (role_ == Role::sender) {
    pub = commitment::PublicString::sample(rng_);
    Frame f;
    f.set_tag("PUBSTR");
    wire::put_bytes(f.payload, pub.r1);
    send_frame(std::move(f), transport::kLaneOt, sid);
    coms.reserve(n0);
    while (coms.size() < n0) {
      Frame c = recv_checked();
      if (!c.tag_is("COMMITS"))
        throw ProtocolAbort(AbortReason::protocol_violation, "expected COMMITS");
      wire::Reader r(c.payload);
      uint32_t cnt = r.u32();
      if (cnt == 0 || coms.size() + cnt > n0)
        throw ProtocolAbort(AbortReason::protocol_violation, "COMMITS overflow");
      for (uint32_t i = 0; i < cnt; ++i) {
        commitment::Commitment w;
        auto b = r.raw(w.size());
        std::copy(b.begin(), b.end(), w.begin());
        coms.push_back(w);
      }
      r.expect_end();
    }
    log(Phase::commit, "commit:recv", std::to_string(n0));
  } else {
    Frame f = recv_checked();
    if (!f.tag_is("PUBSTR") || f.payload.size() != commitment::kOutBytes)
      throw ProtocolAbort(AbortReason::protocol_violation, "expected PUBSTR");
    commitment::Word768 r1;
    std::copy(f.payload.begin(), f.payload.end(), r1.begin());
    pub = commitment::PublicString::from_r1(r1);
    seeds.resize(n0);
    for (uint64_t start = 0; start < n0; start += kCommitChunk) {
      uint64_t cnt = std::min<uint64_t>(kCommitChunk, n0 - start);
      Frame c;
      c.set_tag("COMMITS");
      wire::put_u32(c.payload, uint32_t(cnt));
      c.payload.reserve(4 + cnt * commitment::kOutBytes);
      for (uint64_t j = start; j < start + cnt; ++j) {
        commitment::Opening o;
        rng_.fill(o.x);
        seeds[j] = o.x;
        o.b1 = blk.bases.get(j);
        o.b2 = blk.outcomes.get(j);
        wire::put_bytes(c.payload, commitment::commit(pub, o));
      }
      send_frame(std::move(c), transport::kLaneOt, sid);
    }
    log(Phase::commit, "commit:sent", std::to_string(n0));
  }
  boundary("commit", sid, Phase::commit);

  // --- open: test-set announcement, then openings over I_t ---
  begin_stage("open");
  open_context();
  otcore::TestSelection sel;               // sender
  std::vector<commitment::Opening> opens;  // sender
  std::vector<uint32_t> i_t;               // receiver
  if (role_ == Role::sender) {
    sel = otcore::choose_test_set(rng_, n0, P.alpha);
    Frame f;
    f.set_tag("TESTSET");
    wire::put_index_set(f.payload, sel.i_t);
    send_frame(std::move(f), transport::kLaneOt, sid);
    log(Phase::open, "testset:sent", std::to_string(sel.i_t.size()));
    opens.reserve(sel.i_t.size());
    while (opens.size() < sel.i_t.size()) {
      Frame o = recv_checked();
      if (!o.tag_is("OPENINGS"))
        throw ProtocolAbort(AbortReason::protocol_violation, "expected OPENINGS");
      wire::Reader r(o.payload);
      uint32_t cnt = r.u32();
      if (cnt == 0 || opens.size() + cnt > sel.i_t.size())
        throw ProtocolAbort(AbortReason::protocol_violation, "OPENINGS overflow");
      for (uint32_t i = 0; i < cnt; ++i)
        opens.push_back(commitment::get_opening(r.raw(commitment::kOpeningBytes)));
      r.expect_end();
    }
    log(Phase::open, "open:recv", std::to_string(opens.size()));
  } else {
    Frame f = recv_checked();
    if (!f.tag_is("TESTSET"))
      throw ProtocolAbort(AbortReason::protocol_violation, "expected TESTSET");
    wire::Reader r(f.payload);
    try {
      i_t = wire::get_index_set(r);
      r.expect_end();
    } catch (const wire::DecodeError& e) {
      throw ProtocolAbort(AbortReason::protocol_violation, e.what());
    }
    if (i_t.size() != counts.n_test || (!i_t.empty() && i_t.back() >= n0))
      throw ProtocolAbort(AbortReason::protocol_violation, "bad test set");
    log(Phase::open, "testset:recv", std::to_string(i_t.size()));
    for (std::size_t start = 0; start < i_t.size(); start += kOpeningChunk) {
      std::size_t cnt = std::min(kOpeningChunk, i_t.size() - start);
      Frame o;
      o.set_tag("OPENINGS");
      wire::put_u32(o.payload, uint32_t(cnt));
      for (std::size_t k = start; k < start + cnt; ++k) {
        uint32_t j = i_t[k];
        commitment::Opening op;
        op.x = seeds[j];
        op.b1 = blk.bases.get(j);
        op.b2 = blk.outcomes.get(j);
        commitment::put_opening(o.payload, op);
      }
      send_frame(std::move(o), transport::kLaneOt, sid);
    }
    log(Phase::open, "open:sent", std::to_string(i_t.size()));
  }
  boundary("open", sid, Phase::open);

  // --- estimate: verdict, then basis disclosure ---
  begin_stage("estimate");
  open_context();
  double p_hat = 0.0;
  BitVec theta_a;  // receiver
  if (role_ == Role::sender) {
    std::vector<commitment::Commitment> test_coms;
    test_coms.reserve(sel.i_t.size());
    for (uint32_t j : sel.i_t) test_coms.push_back(coms[j]);
    otcore::EstimationResult est =
        otcore::estimate(sel, blk, pub, test_coms, opens, counts.n_check, P.p_max);
    if (est.verdict != otcore::Verdict::proceed) {
      AbortReason why = verdict_reason(est.verdict);
      send_abort(why, sid);
      throw ProtocolAbort(why, "parameter estimation");
    }
    p_hat = est.p_hat;
    Frame f;
    f.set_tag("ESTRES");
    wire::put_u64(f.payload, est.errors);
    wire::put_u64(f.payload, est.i_s.size());
    wire::put_bytes(f.payload, blk.bases.to_bytes_msb());
    send_frame(std::move(f), transport::kLaneOt, sid);
    log(Phase::estimate, "theta:sent", "p_hat " + std::to_string(p_hat));
  } else {
    Frame f = recv_checked();
    if (!f.tag_is("ESTRES"))
      throw ProtocolAbort(AbortReason::protocol_violation, "expected ESTRES");
    wire::Reader r(f.payload);
    uint64_t errors = 0, n_is = 0;
    try {
      errors = r.u64();
      n_is = r.u64();
      theta_a = BitVec::from_bytes_msb(r.raw((n0 + 7) / 8), n0);
      r.expect_end();
    } catch (const wire::DecodeError& e) {
      throw ProtocolAbort(AbortReason::protocol_violation, e.what());
    }
    if (n_is == 0 || errors > n_is)
      throw ProtocolAbort(AbortReason::protocol_violation, "bad estimate");
    p_hat = double(errors) / double(n_is);
    log(Phase::estimate, "theta:recv", "p_hat " + std::to_string(p_hat));
  }
  boundary("estimate", sid, Phase::estimate);

  // --- separate: I0/I1 construction and the ordered pair ---
  begin_stage("separate");
  open_context();
  std::array<BitVec, 2> raw2;  // sender
  BitVec rawr;                 // receiver
  uint8_t c = 0;
  if (role_ == Role::receiver) {
    auto split =
        otcore::build_split(theta_a, blk.bases, i_t, counts.n_raw, rng_, forced_c);
    if (!split) {
      send_abort(AbortReason::insufficient_raw, sid);
      throw ProtocolAbort(AbortReason::insufficient_raw, "index split");
    }
    c = split->c;
    Frame f;
    f.set_tag("ORDPAIR");
    wire::put_index_set(f.payload, split->ordered_pair[0]);
    wire::put_index_set(f.payload, split->ordered_pair[1]);
    send_frame(std::move(f), transport::kLaneOt, sid);
    rawr = otcore::extract_raw(blk.outcomes, split->i0);
    log(Phase::separate, "ordpair:sent");
  } else {
    Frame f = recv_checked();
    if (!f.tag_is("ORDPAIR"))
      throw ProtocolAbort(AbortReason::protocol_violation, "expected ORDPAIR");
    wire::Reader r(f.payload);
    std::vector<uint32_t> first, second;
    try {
      first = wire::get_index_set(r);
      second = wire::get_index_set(r);
      r.expect_end();
    } catch (const wire::DecodeError& e) {
      throw ProtocolAbort(AbortReason::protocol_violation, e.what());
    }
    if (first.size() != counts.n_raw || second.size() != counts.n_raw ||
        first.back() >= n0 || second.back() >= n0 || !disjoint(first, second) ||
        !disjoint(first, sel.i_t) || !disjoint(second, sel.i_t))
      throw ProtocolAbort(AbortReason::protocol_violation, "bad ordered pair");
    raw2[0] = otcore::extract_raw(blk.outcomes, first);
    raw2[1] = otcore::extract_raw(blk.outcomes, second);
    log(Phase::separate, "ordpair:recv");
  }
  boundary("separate", sid, Phase::separate);

  // --- reconcile ---
  begin_stage("reconcile");
  open_context();
  FrameIo io;
  io.send = [this, sid](const Frame& f) { send_frame(f, transport::kLaneOt, sid); };
  io.recv = [this] { return recv_checked(); };
  double p_run = std::max(p_hat, 1.0 / double(counts.n_raw));
  cascade::ReconciliationOutcome rec;
  if (role_ == Role::sender)
    rec = cascade::reconcile_sender(raw2, p_run, rng_.seed256(), cfg_.cascade, io);
  else
    rec = cascade::reconcile_receiver(rawr, c, p_run, cfg_.cascade, io, rng_);
  boundary("reconcile", sid, Phase::reconcile);
  log(Phase::reconcile, "cascade:done", "f " + std::to_string(rec.f_actual));

  // --- amplify ---
  begin_stage("amplify");
  open_context();
  long double eps = cfg_.eps_target > 0 ? cfg_.eps_target : P.eps_total_target;
  double f_used = std::max(rec.f_actual, 1.0);
  uint64_t bound = params::max_secure_length(counts.n_raw, P, f_used, eps);
  if (length_bits > bound) {
    // both parties reach this verdict from shared data
    send_abort(AbortReason::pa_bound, sid);
    throw ProtocolAbort(AbortReason::pa_bound,
                        "bound " + std::to_string(bound) + " bits");
  }
  OtResult out;
  out.request_id = request_id;
  out.index = index;
  if (role_ == Role::sender) {
    pa::ToeplitzSeed seed =
        pa::ToeplitzSeed::sample(rng_, uint32_t(counts.n_raw), length_bits);
    Frame f;
    f.set_tag("PASEED");
    f.payload = seed.encode();
    send_frame(std::move(f), transport::kLaneOt, sid);
    out.m = pa::amplify_sender(raw2, seed, bound).outputs;
  } else {
    Frame f = recv_checked();
    if (!f.tag_is("PASEED"))
      throw ProtocolAbort(AbortReason::protocol_violation, "expected PASEED");
    pa::ToeplitzSeed seed;
    try {
      seed = pa::ToeplitzSeed::decode(f.payload);
    } catch (const wire::DecodeError& e) {
      throw ProtocolAbort(AbortReason::protocol_violation, e.what());
    }
    if (seed.n_in != counts.n_raw || seed.n_out != length_bits)
      throw ProtocolAbort(AbortReason::protocol_violation, "PASEED dimensions");
    out.m[0] = pa::amplify_receiver(rec.corrected, seed, bound);
    out.c = c;
  }
  boundary("amplify", sid, Phase::amplify);

  out.qber = p_hat;
  out.f_meas = rec.f_actual;
  out.seconds = now_seconds() - t_start;
  out.stages = stage_stats_;
  out.casc_mismatches = rec.mismatches_per_pass;
  log(Phase::done, "session:done",
      "ot " + std::to_string(request_id) + "." + std::to_string(index));
  return out;
}

void Pipeline::run() {
  if (cfg_.do_handshake && !handshaken_) {
    transport::handshake(ch_, role_, cfg_.params.digest());
    handshaken_ = true;
    log(Phase::quantum_load, "handshake", "params digest verified");
  }
  while (!queue_.empty()) {
    auto [id, req] = queue_.front();
    // request agreement before any session starts
    if (role_ == Role::receiver) {
      Frame f;
      f.set_tag("OTREQ");
      wire::put_u64(f.payload, id);
      wire::put_u32(f.payload, req.count);
      wire::put_u32(f.payload, req.length);
      send_frame(std::move(f), transport::kLaneOt, id);
      Frame ack = recv_checked();
      if (!ack.tag_is("OTACK") || ack.payload.size() != 8)
        throw ProtocolAbort(AbortReason::protocol_violation, "expected OTACK");
      wire::Reader r(ack.payload);
      if (r.u64() != id)
        throw ProtocolAbort(AbortReason::protocol_violation, "OTACK id mismatch");
    } else {
      Frame f = recv_checked();
      if (!f.tag_is("OTREQ"))
        throw ProtocolAbort(AbortReason::protocol_violation, "expected OTREQ");
      wire::Reader r(f.payload);
      uint64_t peer_id = r.u64();
      uint32_t count = r.u32();
      uint32_t length = r.u32();
      r.expect_end();
      if (peer_id != id || count != req.count || length != req.length)
        throw ProtocolAbort(AbortReason::protocol_violation, "request disagreement");
      Frame ack;
      ack.set_tag("OTACK");
      wire::put_u64(ack.payload, id);
      send_frame(std::move(ack), transport::kLaneOt, id);
    }
    log(Phase::quantum_load, "request",
        std::to_string(req.count) + "x" + std::to_string(req.length));

    std::vector<OtResult> res;
    std::optional<AbortReason> teardown;
    for (uint32_t i = 0; i < req.count && !teardown; ++i) {
      std::optional<uint8_t> fc;
      if (role_ == Role::receiver && !req.choices.empty()) fc = req.choices[i] & 1;
      try {
        res.push_back(run_session(id, i, req.length, fc));
      } catch (RawExhausted&) {
        // leave the request pending: poll() stays null until more raw data
        log(Phase::aborted, "raw-exhausted", "request " + std::to_string(id));
        return;
      } catch (const ProtocolAbort& e) {
        ctx_out_.reset();
        ctx_in_.reset();
        OtResult r;
        r.request_id = id;
        r.index = i;
        r.abort = e.reason;
        res.push_back(r);
        log(Phase::aborted, "abort", to_string(e.reason));
        // stream integrity gone: stop driving the connection entirely
        if (e.reason == AbortReason::auth_fail ||
            e.reason == AbortReason::protocol_violation ||
            e.reason == AbortReason::params_mismatch) {
          teardown = e.reason;
          send_abort(*teardown, id);  // peer may be blocked mid-stage
        }
      }
    }
    if (teardown)
      for (uint32_t j = uint32_t(res.size()); j < req.count; ++j) {
        OtResult r;
        r.request_id = id;
        r.index = j;
        r.abort = *teardown;
        res.push_back(r);
      }
    results_[id] = std::move(res);
    queue_.erase(queue_.begin());
    if (teardown) throw ProtocolAbort(*teardown, "pipeline teardown");
  }
}

}  // namespace qot::pipeline
