#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "qot/qsim.hpp"

using namespace qot;
using namespace qot::qsim;

namespace {
Seed256 seed_of(uint8_t b) {
  Seed256 s{};
  s.fill(b);
  return s;
}
}  // namespace

TEST_CASE("transmittance and coincidence follow the loss law") {
  ChannelModel m;
  m.accidental_hz = 0.0;
  CHECK(m.transmittance() == doctest::Approx(1.0));
  CHECK(m.coincidence_hz() == doctest::Approx(28300.0));
  m.loss_db = 10.0;
  CHECK(m.transmittance() == doctest::Approx(0.1));
  // both photons attenuate, so coincidences fall with the square
  CHECK(m.coincidence_hz() == doctest::Approx(283.0));
}

TEST_CASE("calibrated channel pins the QBER boundary at 8.47 dB") {
  ChannelModel m = ChannelModel::calibrated();
  CHECK(channel_at(m, 8.47).mean_qber() == doctest::Approx(0.014).epsilon(1e-12));
  CHECK(channel_at(m, 0.0).mean_qber() < 0.009);
  CHECK(channel_at(m, 8.47).mean_qber() < channel_at(m, 9.47).mean_qber());
  // intrinsic rates recovered in the lossless limit with no accidentals
  ChannelModel clean = m;
  clean.accidental_hz = 0.0;
  CHECK(clean.qber_basis(0) == doctest::Approx(0.005));
  CHECK(clean.qber_basis(1) == doctest::Approx(0.012));
  CHECK(clean.mean_qber() == doctest::Approx(0.0085));
}

TEST_CASE("accidental floor drags the QBER toward one half") {
  ChannelModel m = ChannelModel::calibrated();
  double q = channel_at(m, 30.0).mean_qber();
  CHECK(q > 0.2);
  CHECK(q < 0.5);
}

TEST_CASE("visibility conversion") {
  CHECK(qber_from_visibility(1.0) == doctest::Approx(0.0));
  CHECK(qber_from_visibility(0.972) == doctest::Approx(0.014));
  CHECK_THROWS_AS(qber_from_visibility(1.5), std::invalid_argument);
}

TEST_CASE("generated blocks show the configured error statistics") {
  ChannelModel m = ChannelModel::flat(0.02);
  Drbg rng(seed_of(21));
  const uint64_t n = 200000;
  BlockPair bp = generate_block(m, n, rng);
  REQUIRE(bp.sender.size() == n);
  REQUIRE(bp.receiver.size() == n);
  uint64_t matched = 0, matched_err = 0, mismatched = 0, mismatched_diff = 0;
  for (uint64_t i = 0; i < n; ++i) {
    if (bp.sender.bases.get(i) == bp.receiver.bases.get(i)) {
      ++matched;
      matched_err += bp.sender.outcomes.get(i) != bp.receiver.outcomes.get(i);
    } else {
      ++mismatched;
      mismatched_diff += bp.sender.outcomes.get(i) != bp.receiver.outcomes.get(i);
    }
  }
  // bases agree half the time (binomial, > 4 sigma margins throughout)
  CHECK(std::abs(double(matched) - n / 2.0) < 1000);
  // matched-basis error rate ~ 2%
  double p_err = double(matched_err) / double(matched);
  CHECK(std::abs(p_err - 0.02) < 0.002);
  // mismatched bases are uncorrelated
  double p_diff = double(mismatched_diff) / double(mismatched);
  CHECK(std::abs(p_diff - 0.5) < 0.01);
}

TEST_CASE("basis-dependent error rates are respected") {
  ChannelModel m;
  m.qber_hv_0 = 0.0;
  m.qber_da_0 = 0.1;
  m.accidental_hz = 0.0;
  Drbg rng(seed_of(22));
  BlockPair bp = generate_block(m, 100000, rng);
  uint64_t err_hv = 0, n_hv = 0, err_da = 0, n_da = 0;
  for (uint64_t i = 0; i < bp.sender.size(); ++i) {
    if (bp.sender.bases.get(i) != bp.receiver.bases.get(i)) continue;
    bool err = bp.sender.outcomes.get(i) != bp.receiver.outcomes.get(i);
    if (bp.sender.bases.get(i) == 0) {
      ++n_hv;
      err_hv += err;
    } else {
      ++n_da;
      err_da += err;
    }
  }
  CHECK(err_hv == 0);
  CHECK(std::abs(double(err_da) / double(n_da) - 0.1) < 0.01);
}

TEST_CASE("raw block files round-trip and reject corruption") {
  ChannelModel m = ChannelModel::flat(0.01);
  Drbg rng(seed_of(23));
  BlockPair bp = generate_block(m, 1003, rng);  // odd size exercises padding
  auto dir = std::filesystem::temp_directory_path();
  auto path = (dir / raw_filename(7, 1)).string();
  CHECK(raw_filename(7, 1) == "block_7_1.qraw");
  write_raw(path, bp.receiver);
  Block back = read_raw(path);
  CHECK(back.party == 1);
  CHECK(back.bases == bp.receiver.bases);
  CHECK(back.outcomes == bp.receiver.outcomes);
  // header size check: 16 bytes + ceil(2*1003/8)
  CHECK(std::filesystem::file_size(path) == 16 + (2 * 1003 + 7) / 8);

  // magic corruption must be detected
  {
    FILE* f = std::fopen(path.c_str(), "r+b");
    REQUIRE(f);
    std::fputc('X', f);
    std::fclose(f);
  }
  CHECK_THROWS(read_raw(path));
  std::filesystem::remove(path);
}
