// qotctl: simulate raw data, run OT pipeline endpoints, rate tables, and
// the private fingerprint-matching demo.

#include <CLI11.hpp>
#include <openssl/sha.h>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include "qot/mpc.hpp"
#include "qot/wire.hpp"
#include "qot/params.hpp"
#include "qot/pipeline.hpp"
#include "qot/qsim.hpp"
#include "qot/transport.hpp"

using namespace qot;
namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitAbort = 3;
constexpr int kExitIo = 4;

Seed256 seed_from(uint64_t v, uint8_t domain) {
  Seed256 s{};
  s[0] = domain;
  for (int i = 0; i < 8; ++i) s[1 + i] = uint8_t(v >> (8 * (7 - i)));
  return s;
}

std::string hex_of(const BitVec& v) {
  static const char* d = "0123456789abcdef";
  std::string out;
  for (uint8_t b : v.to_bytes_msb()) {
    out.push_back(d[b >> 4]);
    out.push_back(d[b & 15]);
  }
  return out;
}

std::vector<uint8_t> bytes_from_hex(const std::string& h) {
  if (h.size() % 2) throw std::invalid_argument("odd-length hex string");
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("bad hex digit");
  };
  std::vector<uint8_t> out(h.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = uint8_t(nib(h[2 * i]) << 4 | nib(h[2 * i + 1]));
  return out;
}

params::ProtocolParams load_params(const std::string& path) {
  if (path.empty()) return params::ProtocolParams::table_defaults();
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open params file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return params::ProtocolParams::from_config_text(ss.str());
}

std::vector<uint8_t> load_secret(const std::string& path) {
  if (path.empty()) return std::vector<uint8_t>(8192, 0x24);  // shared default
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open secret file " + path);
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(is)),
                              std::istreambuf_iterator<char>());
}

qsim::ChannelModel model_from(double loss_db, double qber, bool flat) {
  if (flat) return qsim::ChannelModel::flat(qber);
  return qsim::channel_at(qsim::ChannelModel::calibrated(), loss_db);
}

// Sequential reader over simulate's block files for one party.
pipeline::RawSource dir_source(const std::string& dir, uint8_t party) {
  auto next = std::make_shared<uint32_t>(0);
  return [dir, party, next]() -> std::optional<qsim::Block> {
    fs::path p = fs::path(dir) / qsim::raw_filename((*next)++, party);
    if (!fs::exists(p)) return std::nullopt;
    return qsim::read_raw(p.string());
  };
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
  uint64_t n0 = 0;
  uint32_t blocks = 1;
  double loss_db = 0.0;
  double qber = -1.0;
  uint64_t seed = 1;
  std::string out_dir = ".";
};

int cmd_simulate(const SimulateOpts& o) {
  if (o.n0 == 0) {
    std::cerr << "simulate: --n0 must be positive\n";
    return kExitUsage;
  }
  qsim::ChannelModel m = model_from(o.loss_db, o.qber, o.qber >= 0);
  Drbg rng(seed_from(o.seed, 'S'));
  fs::create_directories(o.out_dir);
  for (uint32_t b = 0; b < o.blocks; ++b) {
    qsim::BlockPair pair = qsim::generate_block(m, o.n0, rng);
    qsim::write_raw((fs::path(o.out_dir) / qsim::raw_filename(b, 0)).string(), pair.sender);
    qsim::write_raw((fs::path(o.out_dir) / qsim::raw_filename(b, 1)).string(),
                    pair.receiver);
  }
  std::ofstream man(fs::path(o.out_dir) / "manifest.txt");
  man << "n0=" << o.n0 << "\nblocks=" << o.blocks << "\nloss_db=" << o.loss_db
      << "\nseed=" << o.seed << "\ncoincidence_hz=" << m.coincidence_hz() << "\n";
  if (o.qber >= 0) man << "qber_flat=" << o.qber << "\n";
  if (!man) throw std::runtime_error("simulate: cannot write manifest");
  std::cout << "wrote " << o.blocks << " block pair(s) of " << o.n0 << " events to "
            << o.out_dir << "\n";
  return 0;
}

// ------------------------------------------------------------------ run-ot

struct RunOtOpts {
  std::string role = "alice";
  std::string endpoint = "127.0.0.1:9301";
  std::string transport = "loopback";
  std::string params_file;
  std::string raw_dir;
  bool live_sim = false;
  std::string request = "1x128";
  std::string choices_hex;
  std::string secret_file;
  std::string out_file;
  bool report = false;
  bool listen = false;
  uint64_t seed = 1;
  double qber = -1.0;
  double loss_db = 0.0;
};

std::pair<uint32_t, uint32_t> parse_request(const std::string& s) {
  std::size_t x = s.find_first_of("xX*");
  if (x == std::string::npos) throw std::invalid_argument("request must be COUNTxLENGTH");
  uint32_t count = uint32_t(std::stoul(s.substr(0, x)));
  uint32_t length = uint32_t(std::stoul(s.substr(x + 1)));
  if (count == 0 || length == 0) throw std::invalid_argument("request must be positive");
  return {count, length};
}

void write_ot_file(const std::string& path, transport::Role role,
                   const std::vector<pipeline::OtResult>& res) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  for (const auto& r : res) {
    if (r.abort != AbortReason::none) continue;
    if (role == transport::Role::sender)
      os << "S " << hex_of(r.m[0]) << " " << hex_of(r.m[1]) << "\n";
    else
      os << "R " << int(r.c) << " " << hex_of(r.m[0]) << "\n";
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

void print_results(const char* label, transport::Role role,
                   const std::vector<pipeline::OtResult>& res) {
  for (const auto& r : res) {
    std::cout << label << " ot " << r.index << " abort=" << to_string(r.abort);
    if (r.abort == AbortReason::none) {
      std::cout << " qber=" << r.qber << " f=" << r.f_meas << " s=" << r.seconds;
      if (role == transport::Role::sender)
        std::cout << " m0=" << hex_of(r.m[0]) << " m1=" << hex_of(r.m[1]);
      else
        std::cout << " c=" << int(r.c) << " m=" << hex_of(r.m[0]);
    }
    std::cout << "\n";
  }
}

void print_report(const char* label, const pipeline::Pipeline& pl,
                  const std::vector<pipeline::OtResult>& res, double seconds) {
  std::ostringstream os;
  pipeline::write_stage_log(os, pl.stage_log());
  std::istringstream is(os.str());
  std::string line;
  while (std::getline(is, line)) std::cout << label << " " << line << "\n";
  double qsum = 0, fsum = 0;
  uint32_t done = 0;
  for (const auto& r : res)
    if (r.abort == AbortReason::none) {
      qsum += r.qber;
      fsum += r.f_meas;
      ++done;
    }
  std::cout << label << " qber_meas=" << (done ? qsum / done : 0.0)
            << " f_meas=" << (done ? fsum / done : 0.0)
            << " ot_per_s=" << (seconds > 0 ? done / seconds : 0.0) << "\n";
}

int exit_for(const std::vector<pipeline::OtResult>& res) {
  for (const auto& r : res)
    if (r.abort != AbortReason::none) {
      std::cerr << "protocol abort: " << to_string(r.abort) << "\n";
      return kExitAbort;
    }
  return 0;
}

int cmd_run_ot(const RunOtOpts& o) {
  auto [count, length] = parse_request(o.request);
  pipeline::PipelineConfig cfg;
  cfg.params = load_params(o.params_file);
  cfg.bootstrap_secret = load_secret(o.secret_file);

  pipeline::OtRequest req;
  req.count = count;
  req.length = length;
  if (!o.choices_hex.empty()) {
    BitVec bits = BitVec::from_bytes_msb(bytes_from_hex(o.choices_hex), count);
    for (uint32_t i = 0; i < count; ++i) req.choices.push_back(bits.get(i));
  }

  auto source_for = [&](uint8_t party) -> pipeline::RawSource {
    if (!o.raw_dir.empty()) return dir_source(o.raw_dir, party);
    if (!o.live_sim) throw std::invalid_argument("need --raw-dir or --live-sim");
    return pipeline::sim_source(model_from(o.loss_db, o.qber, o.qber >= 0),
                                seed_from(o.seed, 'S'), party);
  };

  if (o.transport == "loopback") {
    auto [ca, cb] = transport::make_loopback();
    ca->set_timeout_ms(600000);
    cb->set_timeout_ms(600000);
    pipeline::Pipeline alice(transport::Role::sender, *ca, cfg, source_for(0),
                             seed_from(o.seed, 'A'));
    pipeline::Pipeline bob(transport::Role::receiver, *cb, cfg, source_for(1),
                           seed_from(o.seed, 'B'));
    pipeline::OtRequest sreq = req;
    sreq.choices.clear();
    uint64_t ida = alice.request_ots(sreq);
    uint64_t idb = bob.request_ots(req);
    auto t0 = std::chrono::steady_clock::now();
    std::string abort_msg;
    auto fut = std::async(std::launch::async, [&] { alice.run(); });
    try {
      bob.run();
    } catch (const ProtocolAbort& e) {
      abort_msg = e.what();
    }
    try {
      fut.get();
    } catch (const ProtocolAbort& e) {
      if (abort_msg.empty()) abort_msg = e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto* ra = alice.poll(ida);
    const auto* rb = bob.poll(idb);
    if (!ra || !rb) {
      std::cerr << "run-ot: raw data exhausted before the request completed\n";
      return kExitIo;
    }
    print_results("alice", transport::Role::sender, *ra);
    print_results("bob", transport::Role::receiver, *rb);
    if (o.report) {
      print_report("alice", alice, *ra, secs);
      print_report("bob", bob, *rb, secs);
    }
    if (!o.out_file.empty()) {
      write_ot_file(o.out_file + ".alice", transport::Role::sender, *ra);
      write_ot_file(o.out_file + ".bob", transport::Role::receiver, *rb);
    }
    if (!abort_msg.empty()) {
      std::cerr << abort_msg << "\n";
      return kExitAbort;
    }
    return std::max(exit_for(*ra), exit_for(*rb));
  }

  if (o.transport != "tcp") throw std::invalid_argument("transport must be loopback|tcp");
  transport::Role role =
      (o.role == "alice" || o.role == "sender") ? transport::Role::sender
                                                : transport::Role::receiver;
  auto ch = transport::connect_tcp(role, o.endpoint, cfg.params.digest(), o.listen, 600000);
  ch->set_timeout_ms(600000);
  cfg.do_handshake = false;  // connect_tcp already ran it
  uint8_t party = role == transport::Role::sender ? 0 : 1;
  if (role == transport::Role::sender) req.choices.clear();
  pipeline::Pipeline pl(role, *ch, cfg, source_for(party), seed_from(o.seed, party ? 'B' : 'A'));
  uint64_t id = pl.request_ots(req);
  auto t0 = std::chrono::steady_clock::now();
  std::string abort_msg;
  try {
    pl.run();
  } catch (const ProtocolAbort& e) {
    abort_msg = e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto* res = pl.poll(id);
  if (!res) {
    std::cerr << "run-ot: raw data exhausted before the request completed\n";
    return kExitIo;
  }
  const char* label = role == transport::Role::sender ? "alice" : "bob";
  print_results(label, role, *res);
  if (o.report) print_report(label, pl, *res, secs);
  if (!o.out_file.empty()) write_ot_file(o.out_file, role, *res);
  if (!abort_msg.empty()) {
    std::cerr << abort_msg << "\n";
    return kExitAbort;
  }
  return exit_for(*res);
}

// ------------------------------------------------------------------- rates

struct RatesOpts {
  std::string eps = "1e-8,1e-3";
  std::string loss_grid = "0:12:0.5";
  std::string out;
};

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  std::size_t c1 = s.find(':');
  if (c1 != std::string::npos) {
    std::size_t c2 = s.find(':', c1 + 1);
    double lo = std::stod(s.substr(0, c1));
    double hi = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
    double step = c2 == std::string::npos ? 1.0 : std::stod(s.substr(c2 + 1));
    if (step <= 0) throw std::invalid_argument("grid step must be positive");
    for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
    return out;
  }
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

int cmd_rates(const RatesOpts& o) {
  std::vector<long double> eps;
  {
    std::stringstream ss(o.eps);
    std::string tok;
    while (std::getline(ss, tok, ',')) eps.push_back(std::stold(tok));
  }
  std::vector<double> losses = parse_grid(o.loss_grid);
  params::ProtocolParams p;
  qsim::ChannelModel m = qsim::ChannelModel::calibrated();
  auto rows = params::ot_rate_curve(m, p, eps, losses);
  if (o.out.empty()) {
    params::write_rate_csv(std::cout, rows);
  } else {
    std::ofstream os(o.out);
    if (!os) throw std::runtime_error("cannot open " + o.out);
    params::write_rate_csv(os, rows);
  }
  std::cout << "# block size needed at 0 dB per epsilon\n";
  for (long double e : eps) {
    uint64_t n0 = params::invert_block_size(p, e);
    std::cout << "eps=" << double(e) << " n0_required=" << n0;
    if (n0) {
      double acc = double(n0) / m.coincidence_hz();
      std::cout << " accumulation_s=" << acc;
    }
    std::cout << "\n";
  }
  return 0;
}

// ------------------------------------------------------------------- match

struct MatchOpts {
  std::string role = "alice";
  std::string endpoint = "127.0.0.1:9302";
  std::string transport = "loopback";
  std::string db_file;
  std::string template_file;
  double threshold = 0.0;
  std::string base_send;  // my OT-sender view (backs my extension-receiver role)
  std::string base_recv;  // my OT-receiver view (backs my extension-sender role)
  bool listen = false;
  uint64_t seed = 1;
};

mpc::Ring threshold_ring(double t) {
  long double s = (long double)t * 4294967296.0L;  // squared fixed point, 2^32
  if (s < 0) s = 0;
  return mpc::Ring(s);
}

std::array<uint8_t, 32> match_digest(uint32_t m, uint32_t n, mpc::Ring t) {
  std::vector<uint8_t> in;
  wire::put_u32(in, m);
  wire::put_u32(in, n);
  wire::put_u64(in, t);
  std::array<uint8_t, 32> out{};
  SHA256(in.data(), in.size(), out.data());
  return out;
}

mpc::RotSenderBatch read_base_sender(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  mpc::RotSenderBatch out;
  std::string kind, h0, h1;
  while (is >> kind >> h0 >> h1 && out.size() < mpc::kBaseCount) {
    if (kind != "S") throw std::runtime_error(path + ": expected sender-view lines");
    out.r0.push_back(BitVec::from_bytes_msb(bytes_from_hex(h0), mpc::kBaseWidth));
    out.r1.push_back(BitVec::from_bytes_msb(bytes_from_hex(h1), mpc::kBaseWidth));
  }
  if (out.size() != mpc::kBaseCount)
    throw std::runtime_error(path + ": need 128 base OTs of 128 bits");
  return out;
}

mpc::RotReceiverBatch read_base_receiver(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  mpc::RotReceiverBatch out;
  std::string kind, h;
  int c;
  while (is >> kind >> c >> h && out.size() < mpc::kBaseCount) {
    if (kind != "R") throw std::runtime_error(path + ": expected receiver-view lines");
    out.c.push_back(c & 1);
    out.r.push_back(BitVec::from_bytes_msb(bytes_from_hex(h), mpc::kBaseWidth));
  }
  if (out.size() != mpc::kBaseCount)
    throw std::runtime_error(path + ": need 128 base OTs of 128 bits");
  return out;
}

struct MatchSide {
  std::vector<mpc::Ring> tmpl;
  mpc::FpDb db;
  mpc::RotSenderBatch base_s;    // I was OT sender: feeds my ExtReceiver
  mpc::RotReceiverBatch base_r;  // I was OT receiver: feeds my ExtSender
};

// Both parties run the same script; party 0 extends its sender pool first.
mpc::MatchResult run_match_party(int party, MatchSide side, mpc::Ring threshold,
                                 FrameIo& io, Drbg& rng, mpc::OtLedger& led) {
  uint32_t k = side.db.m * side.db.n * 64;
  mpc::ExtSender es(std::move(side.base_r), &led);
  mpc::ExtReceiver er(std::move(side.base_s), &led);
  mpc::SenderPool sp;
  mpc::ReceiverPool rp;
  sp.ledger = &led;
  rp.ledger = &led;
  if (party == 0) {
    sp.rots = es.extend(k, 64, io);
    rp.rots = er.extend(rng.bits(k), 64, io);
  } else {
    rp.rots = er.extend(rng.bits(k), 64, io);
    sp.rots = es.extend(k, 64, io);
  }
  mpc::TriplePool triples{mpc::triple_gen(party, side.db.m * side.db.n, sp, rp, io, rng), 0};
  return mpc::match_fingerprint(party, side.tmpl, side.db, threshold, triples, io);
}

void print_match(const mpc::MatchResult& r, mpc::Ring threshold, const mpc::OtLedger& led) {
  for (std::size_t i = 0; i < r.distances.size(); ++i)
    std::cout << "entry " << i << " dist=" << r.distances[i]
              << " dist_real=" << double((long double)r.distances[i] / 4294967296.0L)
              << (r.verdicts[i] ? " MATCH" : " no-match") << "\n";
  std::cout << "threshold_ring=" << threshold << " base_ot_consumed=" << led.base_consumed
            << " extended_produced=" << led.extended_produced
            << " extended_consumed=" << led.extended_consumed << "\n";
}

int cmd_match(const MatchOpts& o) {
  mpc::FpDb db = mpc::read_db(o.db_file);
  mpc::FpDb tdb = mpc::read_db(o.template_file);
  if (tdb.m != 1 || tdb.n != db.n)
    throw std::invalid_argument("template must be a 1-row database of matching width");
  mpc::Ring thr = threshold_ring(o.threshold);

  if (o.transport == "loopback") {
    // demo mode: inputs are plaintext; share locally, run both parties
    Drbg srng(seed_from(o.seed, 'M'));
    auto [db0, db1] = mpc::share_db(db, srng);
    std::vector<mpc::Ring> t0(db.n), t1(db.n);
    for (uint32_t i = 0; i < db.n; ++i) std::tie(t0[i], t1[i]) = mpc::share(tdb.data[i], srng);

    MatchSide s0{std::move(t0), std::move(db0), {}, {}};
    MatchSide s1{std::move(t1), std::move(db1), {}, {}};
    if (!o.base_send.empty()) {
      s0.base_s = read_base_sender(o.base_send);
      s1.base_r = read_base_receiver(o.base_recv);
      // swap-role batch for the opposite direction, stand-in locally
      Drbg brng(seed_from(o.seed, 'b'));
      auto [bs, br] = mpc::sample_rots(mpc::kBaseCount, mpc::kBaseWidth, brng);
      s1.base_s = std::move(bs);
      s0.base_r = std::move(br);
    } else {
      std::cout << "base OTs: local simulated stand-in (seed " << o.seed << ")\n";
      Drbg brng(seed_from(o.seed, 'b'));
      auto [bs1, br1] = mpc::sample_rots(mpc::kBaseCount, mpc::kBaseWidth, brng);
      s0.base_r = std::move(br1);
      s1.base_s = std::move(bs1);
      auto [bs0, br0] = mpc::sample_rots(mpc::kBaseCount, mpc::kBaseWidth, brng);
      s0.base_s = std::move(bs0);
      s1.base_r = std::move(br0);
    }

    auto [ca, cb] = transport::make_loopback();
    ca->set_timeout_ms(600000);
    cb->set_timeout_ms(600000);
    FrameIo io0 = direct_io(*ca, transport::kLaneOt, 7);
    FrameIo io1 = direct_io(*cb, transport::kLaneOt, 7);
    Drbg r0(seed_from(o.seed, '0')), r1(seed_from(o.seed, '1'));
    mpc::OtLedger l0, l1;
    auto fut = std::async(std::launch::async, [&] {
      return run_match_party(0, std::move(s0), thr, io0, r0, l0);
    });
    mpc::MatchResult m1 = run_match_party(1, std::move(s1), thr, io1, r1, l1);
    mpc::MatchResult m0 = fut.get();
    if (m0.distances != m1.distances)
      throw std::runtime_error("match: parties disagree on revealed distances");
    print_match(m0, thr, l0);
    std::cout << "note: distances are revealed to both parties; thresholding happens "
                 "in the clear\n";
    return 0;
  }

  if (o.transport != "tcp") throw std::invalid_argument("transport must be loopback|tcp");
  // two-process mode: inputs are this party's share files
  int party = (o.role == "alice" || o.role == "sender") ? 0 : 1;
  auto role = party == 0 ? transport::Role::sender : transport::Role::receiver;
  auto ch = transport::connect_tcp(role, o.endpoint, match_digest(db.m, db.n, thr),
                                   o.listen, 600000);
  ch->set_timeout_ms(600000);
  FrameIo io = direct_io(*ch, transport::kLaneOt, 7);
  MatchSide side{std::move(tdb.data), std::move(db), read_base_sender(o.base_send),
                 read_base_receiver(o.base_recv)};
  Drbg rng(seed_from(o.seed, party ? '1' : '0'));
  mpc::OtLedger led;
  mpc::MatchResult res = run_match_party(party, std::move(side), thr, io, rng, led);
  print_match(res, thr, led);
  std::cout << "note: distances are revealed to both parties; thresholding happens "
               "in the clear\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum oblivious transfer post-processing toolkit"};
  app.require_subcommand(1);

  SimulateOpts so;
  auto* sim = app.add_subcommand("simulate", "generate paired raw measurement files");
  sim->add_option("--n0", so.n0, "events per block");
  sim->add_option("--blocks", so.blocks, "number of block pairs");
  sim->add_option("--loss-db", so.loss_db, "channel loss in dB");
  sim->add_option("--qber", so.qber, "flat QBER override (lossless model)");
  sim->add_option("--seed", so.seed, "RNG seed");
  sim->add_option("--out-dir", so.out_dir, "output directory");

  RunOtOpts ro;
  auto* run = app.add_subcommand("run-ot", "run an OT pipeline endpoint");
  run->add_option("--role", ro.role, "alice|bob");
  run->add_option("--endpoint", ro.endpoint, "host:port for tcp transport");
  run->add_option("--transport", ro.transport, "loopback|tcp");
  run->add_flag("--listen", ro.listen, "listen instead of connect (tcp)");
  run->add_option("--params-file", ro.params_file, "key=value protocol parameters");
  run->add_option("--raw-dir", ro.raw_dir, "directory of pre-recorded .qraw blocks");
  run->add_flag("--live-sim", ro.live_sim, "simulate raw data on the fly");
  run->add_option("--request", ro.request, "COUNTxLENGTH, e.g. 128x128");
  run->add_option("--choices-hex", ro.choices_hex, "receiver choice bits, MSB first");
  run->add_option("--secret-file", ro.secret_file, "pre-shared authentication secret");
  run->add_option("--out", ro.out_file, "write OT outputs for later mpc use");
  run->add_flag("--report", ro.report, "emit stage log and throughput summary");
  run->add_option("--seed", ro.seed, "RNG seed");
  run->add_option("--qber", ro.qber, "flat QBER for --live-sim");
  run->add_option("--loss-db", ro.loss_db, "channel loss for --live-sim");

  RatesOpts to;
  auto* rates = app.add_subcommand("rates", "rate and block-size tables");
  rates->add_option("--eps", to.eps, "comma list of security levels");
  rates->add_option("--loss-grid", to.loss_grid, "lo:hi:step or comma list, dB");
  rates->add_option("--out", to.out, "CSV output path (default stdout)");

  MatchOpts mo;
  auto* match = app.add_subcommand("match", "private fingerprint matching demo");
  match->add_option("--role", mo.role, "alice|bob (tcp)");
  match->add_option("--endpoint", mo.endpoint, "host:port for tcp transport");
  match->add_option("--transport", mo.transport, "loopback|tcp");
  match->add_flag("--listen", mo.listen, "listen instead of connect (tcp)");
  match->add_option("--db", mo.db_file, "database file (plaintext for loopback, share for tcp)")
      ->required();
  match->add_option("--template", mo.template_file, "1-row template file")->required();
  match->add_option("--threshold", mo.threshold, "squared-distance threshold, real units");
  match->add_option("--base-send", mo.base_send, "OT outputs where this party sent");
  match->add_option("--base-recv", mo.base_recv, "OT outputs where this party received");
  match->add_option("--seed", mo.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(so);
    if (run->parsed()) return cmd_run_ot(ro);
    if (rates->parsed()) return cmd_rates(to);
    if (match->parsed()) return cmd_match(mo);
  } catch (const ProtocolAbort& e) {
    std::cerr << e.what() << "\n";
    return kExitAbort;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
