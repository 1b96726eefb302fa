#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qot/params.hpp"
#include "qot/qsim.hpp"

using namespace qot::params;

namespace {
bool close_rel(long double a, long double b, long double rel) {
  return std::fabs(a - b) <= rel * std::fabs(b);
}
}  // namespace

TEST_CASE("default parameters validate and derived counts match hand recount") {
  ProtocolParams p;
  p.validate();
  // floor(0.35 * 3.2e6), floor(0.495 * 0.35 * 3.2e6), floor(0.495 * 0.65 * 3.2e6)
  DerivedCounts c = derived_counts(p);
  CHECK(c.n_test == 1'120'000);
  CHECK(c.n_check == 554'400);
  CHECK(c.n_raw == 1'029'600);
}

TEST_CASE("derived counts floor on a small odd block") {
  ProtocolParams p;
  p.n0 = 1001;
  DerivedCounts c = derived_counts(p);
  CHECK(c.n_test == 350);   // floor(350.35)
  CHECK(c.n_check == 173);  // floor(173.42...)
  CHECK(c.n_raw == 322);    // floor(322.07...)
}

TEST_CASE("validation rejects out-of-range parameters") {
  ProtocolParams p;
  p.alpha = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = ProtocolParams{};
  p.p_max = 0.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = ProtocolParams{};
  p.p_max = 0.49;  // p_max + delta1 >= 1/2 - delta2
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = ProtocolParams{};
  p.n_out = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("binary entropy and KL divergence reference points") {
  CHECK(binary_entropy(0.5L) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(binary_entropy(0.0L) == 0.0L);
  CHECK(binary_entropy(1.0L) == 0.0L);
  // h(0.25) and h(0.11) evaluated with 40-digit arithmetic
  CHECK(close_rel(binary_entropy(0.25L), 0.8112781244591328L, 1e-15L));
  CHECK(close_rel(binary_entropy(0.11L), 0.499915958164528L, 1e-14L));
  CHECK(kl_divergence_binary(0.5L, 0.5L) == doctest::Approx(0.0));
  // D(0.495 || 0.5) = 0.495 ln(0.99) + 0.505 ln(1.01)
  long double ref = 0.495L * std::log(0.99L) + 0.505L * std::log(1.01L);
  CHECK(close_rel(kl_divergence_binary(0.495L, 0.5L), ref, 1e-15L));
  CHECK_THROWS_AS(kl_divergence_binary(0.5L, 0.0L), std::invalid_argument);
}

TEST_CASE("key rate bracket and asymptotic rate at the default point") {
  ProtocolParams p;
  // frozen with 40-digit arithmetic from the same closed forms
  CHECK(close_rel(key_rate_bracket(p, p.f_ec), 2.104986236890545e-4L, 1e-9L));
  CHECK(close_rel(asymptotic_key_rate(p), 6.772793217195329e-5L, 1e-9L));
  // rate must decrease when the error-correction penalty grows
  CHECK(key_rate_bracket(p, 1.2) < key_rate_bracket(p, 1.0));
}

TEST_CASE("security budget at n = 128 matches the frozen evaluation") {
  ProtocolParams p;
  SecurityBudget b = epsilon_budget(p, 128);
  CHECK(close_rel(b.term_sample, 8.421748959111286e-10L, 1e-9L));
  CHECK(b.term_tail < 1e-40L);
  CHECK(close_rel(b.term_pa, 9.744604999580255e-28L, 1e-3L));
  CHECK(b.eps_correct < 1e-28L);
  CHECK(close_rel(b.eps_total, 8.421748959111286e-10L, 1e-8L));
  // same order-of-magnitude neighborhood as the published total
  CHECK(std::fabs(std::round(std::log10(b.eps_total)) -
                   std::round(std::log10(p.eps_total_target))) <= 1.0L);
}

TEST_CASE("security budget is monotone in n and in N0") {
  ProtocolParams p;
  CHECK(epsilon_budget(p, 256).eps_total > epsilon_budget(p, 128).eps_total);
  ProtocolParams small = p;
  small.n0 = 1'000'000;
  CHECK(epsilon_budget(small, 128).eps_total > epsilon_budget(p, 128).eps_total);
}

TEST_CASE("max_secure_length brackets the PA term at a third of the budget") {
  ProtocolParams p;
  DerivedCounts c = derived_counts(p);
  uint64_t n = max_secure_length(c.n_raw, p, p.f_ec, p.eps_total_target);
  REQUIRE(n > 0);
  // n satisfies the sub-budget, n+1 does not
  auto pa_term = [&](uint64_t len) {
    return std::exp2((long double)len - (long double)c.n_raw * key_rate_bracket(p, p.f_ec) -
                      1.0L);
  };
  CHECK(pa_term(n) <= p.eps_total_target / 3.0L);
  CHECK(pa_term(n + 1) > p.eps_total_target / 3.0L);
  CHECK(n >= 128);
  // hopeless bracket -> zero
  CHECK(max_secure_length(100, p, p.f_ec, 1e-9L) == 0);
}

TEST_CASE("block-size inversion is exact at the threshold") {
  ProtocolParams p;
  long double target = 1e-8L;
  uint64_t n0 = invert_block_size(p, target);
  REQUIRE(n0 > 0);
  ProtocolParams at = p;
  at.n0 = n0;
  CHECK(epsilon_budget(at, p.n_out).eps_total <= target);
  at.n0 = n0 - 1;
  CHECK(epsilon_budget(at, p.n_out).eps_total > target);
  // frozen 40-digit evaluation of the same inversion
  CHECK(n0 == 2'827'320);
}

TEST_CASE("rate curve emits the documented CSV header and feasibility edge") {
  ProtocolParams p;
  auto ch = qot::qsim::ChannelModel::calibrated();
  auto rows = ot_rate_curve(ch, p, {1e-8L}, {0.0, 8.0, 9.0});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].feasible);
  CHECK(rows[1].feasible);
  CHECK_FALSE(rows[2].feasible);  // past the 8.47 dB QBER boundary
  CHECK(rows[0].ot_per_s == doctest::Approx(28300.0 / 2'827'320).epsilon(1e-3));
  std::ostringstream os;
  write_rate_csv(os, rows);
  CHECK(os.str().rfind("eps,loss_db,fiber_km,n0,qber,ot_per_s,feasible\n", 0) == 0);
}

TEST_CASE("config text round-trips and rejects unknown keys") {
  ProtocolParams p;
  p.n0 = 320'000;
  p.p_max = 0.009;
  ProtocolParams q = ProtocolParams::from_config_text(p.to_config_text());
  CHECK(q.n0 == p.n0);
  CHECK(q.p_max == p.p_max);
  CHECK(q.digest() == p.digest());
  CHECK(ProtocolParams{}.digest() != p.digest());
  CHECK_THROWS_AS(ProtocolParams::from_config_text("bogus_key=1\n"), std::invalid_argument);
  // comments and blank lines are tolerated
  ProtocolParams r = ProtocolParams::from_config_text("# comment\n\nn_out=192\n");
  CHECK(r.n_out == 192);
}
