#include "qot/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "qot/wire.hpp"

namespace qot::qsim {

double ChannelModel::transmittance() const { return std::pow(10.0, -loss_db / 10.0); }

double ChannelModel::true_coincidence_hz() const {
  double t = transmittance();
  return base_coincidence_hz * t * t;  // both photons must survive
}

double ChannelModel::coincidence_hz() const { return true_coincidence_hz() + accidental_hz; }

double ChannelModel::qber_basis(int basis) const {
  double q0 = basis == 0 ? qber_hv_0 : qber_da_0;
  double c = true_coincidence_hz();
  return (q0 * c + 0.5 * accidental_hz) / (c + accidental_hz);
}

double ChannelModel::mean_qber() const { return 0.5 * (qber_basis(0) + qber_basis(1)); }

ChannelModel ChannelModel::calibrated(double boundary_loss_db, double qber_limit) {
  ChannelModel m;
  double t = std::pow(10.0, -boundary_loss_db / 10.0);
  double c = m.base_coincidence_hz * t * t;
  double q0 = 0.5 * (m.qber_hv_0 + m.qber_da_0);
  if (qber_limit <= q0 || qber_limit >= 0.5)
    throw std::invalid_argument("calibrated: qber_limit out of range");
  m.accidental_hz = c * (qber_limit - q0) / (0.5 - qber_limit);
  return m;
}

ChannelModel ChannelModel::flat(double qber) {
  ChannelModel m;
  m.qber_hv_0 = qber;
  m.qber_da_0 = qber;
  m.accidental_hz = 0.0;
  m.loss_db = 0.0;
  return m;
}

ChannelModel channel_at(const ChannelModel& m, double loss_db) {
  ChannelModel out = m;
  out.loss_db = loss_db;
  return out;
}

double qber_from_visibility(double visibility) {
  if (visibility < 0.0 || visibility > 1.0)
    throw std::invalid_argument("visibility must lie in [0,1]");
  return (1.0 - visibility) / 2.0;
}

BlockPair generate_block(const ChannelModel& m, uint64_t n_events, Drbg& rng) {
  BlockPair bp;
  bp.sender.party = 0;
  bp.receiver.party = 1;
  double q[2] = {m.qber_basis(0), m.qber_basis(1)};
  for (uint64_t i = 0; i < n_events; ++i) {
    int ba = rng.bit();
    int bb = rng.bit();
    int oa = rng.bit();
    int ob;
    if (ba == bb) {
      ob = oa ^ (rng.unit() < q[ba] ? 1 : 0);
    } else {
      ob = rng.bit();
    }
    bp.sender.bases.push_back(ba);
    bp.sender.outcomes.push_back(oa);
    bp.receiver.bases.push_back(bb);
    bp.receiver.outcomes.push_back(ob);
  }
  return bp;
}

namespace {
constexpr uint8_t kMagic[8] = {'Q', 'O', 'T', 'R', 'A', 'W', '1', 0};
constexpr uint16_t kVersion = 1;
}  // namespace

void write_raw(const std::string& path, const Block& b) {
  if (b.bases.size() != b.outcomes.size())
    throw std::invalid_argument("write_raw: basis/outcome size mismatch");
  if (b.bases.size() > 0xFFFFFFFFull) throw std::invalid_argument("write_raw: block too large");
  std::vector<uint8_t> buf;
  buf.insert(buf.end(), kMagic, kMagic + 8);
  wire::put_u16(buf, kVersion);
  wire::put_u8(buf, b.party);
  wire::put_u8(buf, 0);
  wire::put_u32(buf, uint32_t(b.bases.size()));
  BitVec packed;
  for (uint64_t i = 0; i < b.bases.size(); ++i) {
    packed.push_back(b.bases.get(i));
    packed.push_back(b.outcomes.get(i));
  }
  auto body = packed.to_bytes_msb();
  buf.insert(buf.end(), body.begin(), body.end());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("write_raw: cannot open " + path);
  os.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!os) throw std::runtime_error("write_raw: write failed for " + path);
}

Block read_raw(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_raw: cannot open " + path);
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(is)),
                           std::istreambuf_iterator<char>());
  wire::Reader r(buf);
  auto magic = r.raw(8);
  if (!std::equal(magic.begin(), magic.end(), kMagic))
    throw wire::DecodeError("read_raw: bad magic in " + path);
  uint16_t ver = r.u16();
  if (ver != kVersion) throw wire::DecodeError("read_raw: unsupported version");
  Block b;
  b.party = r.u8();
  if (b.party > 1) throw wire::DecodeError("read_raw: bad party byte");
  (void)r.u8();
  uint32_t count = r.u32();
  uint64_t body_bytes = (uint64_t(count) * 2 + 7) / 8;
  if (r.remaining() != body_bytes) throw wire::DecodeError("read_raw: body size mismatch");
  auto body = r.raw(body_bytes);
  BitVec packed = BitVec::from_bytes_msb({body.data(), body.size()}, uint64_t(count) * 2);
  for (uint32_t i = 0; i < count; ++i) {
    b.bases.push_back(packed.get(2 * uint64_t(i)));
    b.outcomes.push_back(packed.get(2 * uint64_t(i) + 1));
  }
  return b;
}

std::string raw_filename(uint32_t block_id, uint8_t party) {
  return "block_" + std::to_string(block_id) + "_" + std::to_string(int(party)) + ".qraw";
}

}  // namespace qot::qsim
