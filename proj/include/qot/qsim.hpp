#ifndef QOT_QSIM_HPP
#define QOT_QSIM_HPP

#include <cstdint>
#include <string>

#include "qot/bitvec.hpp"
#include "qot/drbg.hpp"

namespace qot::qsim {

// Photon-pair source plus symmetric fiber channel, reduced to the numbers
// that matter downstream: a coincidence rate and per-basis error rates.
// Accidental coincidences contribute random (50% error) events, so the
// observed QBER climbs with loss even though the intrinsic error is flat.
struct ChannelModel {
  double base_coincidence_hz = 28300.0;  // detected pairs at 0 dB
  double qber_hv_0 = 0.005;              // intrinsic error, H/V basis
  double qber_da_0 = 0.012;              // intrinsic error, D/A basis
  double accidental_hz = 0.0;            // loss-independent accidental floor
  double loss_db = 0.0;                  // total symmetric channel loss
  double fiber_db_per_km = 8.47 / 25.8;

  double transmittance() const;     // per-photon, 10^(-loss_db/10)
  double true_coincidence_hz() const;
  double coincidence_hz() const;    // true + accidental
  double qber_basis(int basis) const;  // 0 = H/V, 1 = D/A
  double mean_qber() const;

  // Default instance with the accidental floor set so the mean QBER hits
  // qber_limit exactly at boundary_loss_db.
  static ChannelModel calibrated(double boundary_loss_db = 8.47,
                                 double qber_limit = 0.014);
  // Lossless, noise-free-accidentals channel with a flat target QBER in
  // both bases; used by deterministic protocol tests.
  static ChannelModel flat(double qber);
};

// Same source and fiber, evaluated at a different loss.
ChannelModel channel_at(const ChannelModel& m, double loss_db);

double qber_from_visibility(double visibility);

// One party's record of a measured block: basis and outcome per event.
struct Block {
  BitVec bases;
  BitVec outcomes;
  uint8_t party = 0;  // 0 sender, 1 receiver
  uint64_t size() const { return bases.size(); }
};

struct BlockPair {
  Block sender;
  Block receiver;
};

// Draws n_events entangled-pair measurements for both parties from one
// stream: independent fair bases each side, correlated outcomes where the
// bases agree (error probability qber_basis), independent otherwise.
BlockPair generate_block(const ChannelModel& m, uint64_t n_events, Drbg& rng);

// .qraw block files: 16-byte header (magic "QOTRAW1\0", version u16,
// party u8, reserved u8, count u32, big-endian) then two bits per event,
// basis before outcome, packed MSB-first.
void write_raw(const std::string& path, const Block& b);
Block read_raw(const std::string& path);
std::string raw_filename(uint32_t block_id, uint8_t party);

}  // namespace qot::qsim

#endif
