#ifndef QOT_PARAMS_HPP
#define QOT_PARAMS_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qot::qsim {
struct ChannelModel;
}

namespace qot::params {

// Everything the two parties must agree on before a session starts.
// Defaults reproduce the reference operating point of the protocol.
struct ProtocolParams {
  double alpha = 0.35;        // parameter-estimation sample ratio
  double f_ec = 1.0270;       // error-correction efficiency assumed for planning
  uint64_t n0 = 3'200'000;    // shared entangled states per block
  double p_max = 0.014;       // maximum tolerated QBER
  double delta1 = 1.34e-2;    // statistical tolerance 1
  double delta2 = 5e-3;       // statistical tolerance 2
  long double eps_ir = 0;     // undetected-IR-failure probability (default 2^-96)
  long double eps_bind = 0;   // commitment binding parameter (default 2^-253)
  uint32_t n_out = 128;       // final OT string length, bits
  long double eps_total_target = 2.35e-8L;

  ProtocolParams();
  static ProtocolParams table_defaults() { return ProtocolParams{}; }

  void validate() const;  // throws std::invalid_argument
  std::array<uint8_t, 32> digest() const;

  // Flat key=value config (alpha, f_ec, n0, p_max, delta1, delta2, eps_ir,
  // eps_bind, n_out, eps_total_target). Unknown keys rejected.
  static ProtocolParams from_config_text(const std::string& text);
  std::string to_config_text() const;
};

struct DerivedCounts {
  uint64_t n_test;   // floor(alpha * N0)
  uint64_t n_check;  // floor((1/2 - delta2) * alpha * N0)
  uint64_t n_raw;    // floor((1/2 - delta2) * (1 - alpha) * N0)
};
DerivedCounts derived_counts(const ProtocolParams& p);

struct SecurityBudget {
  long double eps_correct;  // 2^-(N_raw-n)/2 + 2 eps_IR
  long double eps_sender;   // three-term statistical sender-security bound
  long double eps_total;    // eps_correct + eps_sender
  // term breakdown of eps_sender
  long double term_sample;  // sqrt(2) (e^... + e^...)^(1/2)
  long double term_tail;    // e^(-D_KL(1/2-d2 || 1/2)(1-a)N0)
  long double term_pa;      // (1/2) 2^(n - N_raw * bracket)
  long double eps_bind;     // commitment contribution, reported separately
};

long double binary_entropy(long double p);
long double kl_divergence_binary(long double p, long double q);

// Inner bracket of the asymptotic key-rate expression:
//   1/2 - d2 - h((p_max + d1)/(1/2 - d2)) - f * h(p_max + d1)
long double key_rate_bracket(const ProtocolParams& p, double f);
long double asymptotic_key_rate(const ProtocolParams& p);

SecurityBudget epsilon_budget(const ProtocolParams& p, uint64_t n);

// Largest n whose privacy-amplification term, with f := f_actual, stays
// below an equal-thirds share of eps_target; 0 when no n >= 1 qualifies.
uint64_t max_secure_length(uint64_t n_raw, const ProtocolParams& p, double f_actual,
                           long double eps_target);

struct RatePoint {
  long double eps;
  double loss_db;
  double fiber_km;
  uint64_t n0;        // block size needed to reach eps (0 if infeasible)
  double qber;        // mean channel QBER at this loss
  double ot_per_s;    // coincidence rate / n0 (0 if infeasible)
  bool feasible;      // qber <= p_max and an n0 exists
};

std::vector<RatePoint> ot_rate_curve(const qot::qsim::ChannelModel& source,
                                     const ProtocolParams& p,
                                     const std::vector<long double>& eps_grid,
                                     const std::vector<double>& loss_grid);

// Smallest N0 with eps_total(n = p.n_out) <= eps_target; 0 if none below cap.
uint64_t invert_block_size(const ProtocolParams& p, long double eps_target,
                           uint64_t n0_cap = uint64_t(1) << 40);

void write_rate_csv(std::ostream& os, const std::vector<RatePoint>& rows);

}  // namespace qot::params

#endif
