#ifndef QOT_PIPELINE_HPP
#define QOT_PIPELINE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qot/abort.hpp"
#include "qot/auth.hpp"
#include "qot/bitvec.hpp"
#include "qot/cascade.hpp"
#include "qot/commitment.hpp"
#include "qot/drbg.hpp"
#include "qot/frameio.hpp"
#include "qot/params.hpp"
#include "qot/qkdlane.hpp"
#include "qot/qsim.hpp"
#include "qot/transport.hpp"

namespace qot::pipeline {

struct PipelineConfig {
  params::ProtocolParams params;
  cascade::CascadeConfig cascade;
  qkdlane::QkdConfig qkd;
  std::vector<uint8_t> bootstrap_secret;  // pre-shared, identical both sides
  std::size_t auth_low_watermark = 256;
  uint32_t auth_replenish_bytes = 1024;  // per QKD lane session
  uint64_t qkd_block_events = 24000;     // raw events routed per replenishment
  long double eps_target = 0;            // 0 means params.eps_total_target
  bool do_handshake = true;              // TCP connects already ran one
};

enum class Phase : uint8_t {
  quantum_load,
  commit,
  open,
  estimate,
  separate,
  reconcile,
  amplify,
  done,
  aborted,
};
const char* to_string(Phase p);

struct StageRecord {
  double ts = 0;  // seconds since pipeline construction
  Phase phase = Phase::quantum_load;
  std::string event;
  std::string detail;
};
void write_stage_log(std::ostream& os, const std::vector<StageRecord>& log);

struct OtRequest {
  uint32_t count = 1;
  uint32_t length = 128;         // bits per string
  std::vector<uint8_t> choices;  // receiver only: one bit per OT; empty = random
};

// Wire traffic per protocol stage, symmetric across c by construction.
struct StageStat {
  std::string name;
  uint64_t frames_out = 0, bytes_out = 0;
  uint64_t frames_in = 0, bytes_in = 0;
};

struct OtResult {
  uint64_t request_id = 0;
  uint32_t index = 0;  // session number within the request
  AbortReason abort = AbortReason::none;
  std::array<BitVec, 2> m;  // sender: positions 0/1; receiver: m[0] = m_c
  uint8_t c = 0;            // receiver only
  double qber = 0.0;        // estimated over the test sample
  double f_meas = 0.0;
  double seconds = 0.0;
  std::vector<StageStat> stages;
  // sender view: initial odd-block counts per Cascade pass per position
  std::vector<std::array<uint32_t, 2>> casc_mismatches;
};

// Raw event feed ("cat"): next recorded chunk, or nullopt when exhausted.
// Chunks may be any size; the pipeline accumulates/splits to N0 blocks.
using RawSource = std::function<std::optional<qsim::Block>()>;

// Aligned simulator feeds: each party regenerates the same event stream
// from the seed and keeps its own half. party: 0 sender, 1 receiver.
RawSource sim_source(const qsim::ChannelModel& model, const Seed256& seed, uint8_t party,
                     uint64_t chunk_events = 65536);

// Block accumulation/splitting ("resize"): order-preserving concatenation.
class Accumulator {
 public:
  void feed(const qsim::Block& b);
  uint64_t buffered() const { return buf_.size(); }
  qsim::Block take(uint64_t n);  // exactly n events; leftover retained

 private:
  qsim::Block buf_;
};

struct MuxRecord {
  uint64_t begin = 0, end = 0;  // half-open event-id range
  uint8_t lane = 0;             // transport::kLaneOt or kLaneQkd
};

class Pipeline {
 public:
  Pipeline(transport::Role role, transport::Channel& ch, PipelineConfig cfg,
           RawSource source, const Seed256& rng_seed);

  uint64_t request_ots(const OtRequest& req);
  // nullptr while the request has not been processed.
  const std::vector<OtResult>* poll(uint64_t request_id) const;
  // Drives every queued request to completion; call concurrently on both
  // parties. Throws ProtocolAbort on stream-integrity failures (auth_fail,
  // protocol_violation, params_mismatch); per-session protocol aborts are
  // recorded in the results instead.
  void run();

  const std::vector<StageRecord>& stage_log() const { return log_; }
  const std::vector<MuxRecord>& mux_log() const { return mux_; }
  const auth::SecretStore& secret_store() const { return store_; }
  transport::Role role() const { return role_; }

 private:
  struct RawExhausted {};

  void log(Phase phase, const std::string& event, const std::string& detail = "");
  void open_context();
  void send_frame(transport::Frame f, uint8_t lane, uint64_t session_id);
  transport::Frame recv_checked();
  void send_abort(AbortReason r, uint64_t session_id);
  void boundary(const char* name, uint64_t session_id, Phase phase);
  void begin_stage(const char* name);
  qsim::Block take_events(uint64_t n, uint8_t lane);
  void maybe_replenish(uint64_t session_id);
  OtResult run_session(uint64_t request_id, uint32_t index, uint32_t length_bits,
                       std::optional<uint8_t> forced_c);

  transport::Role role_;
  transport::Channel& ch_;
  PipelineConfig cfg_;
  RawSource source_;
  Drbg rng_;
  auth::SecretStore store_;
  Accumulator acc_;
  uint64_t event_cursor_ = 0;
  uint64_t next_handle_ = 1;
  uint64_t next_request_ = 1;
  bool handshaken_ = false;
  // One context per traffic direction: the two parties may interleave their
  // send/recv absorption differently, but each direction has one wire order.
  std::unique_ptr<auth::AuthContext> ctx_out_;
  std::unique_ptr<auth::AuthContext> ctx_in_;
  std::vector<StageStat> stage_stats_;  // current session
  std::vector<MuxRecord> mux_;
  std::vector<StageRecord> log_;
  std::vector<std::pair<uint64_t, OtRequest>> queue_;
  std::map<uint64_t, std::vector<OtResult>> results_;
  double t0_ = 0;
};

}  // namespace qot::pipeline

#endif
