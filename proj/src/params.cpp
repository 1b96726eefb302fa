#include "qot/params.hpp"

#include <openssl/sha.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qot/qsim.hpp"

namespace qot::params {

ProtocolParams::ProtocolParams() {
  eps_ir = std::exp2(-96.0L);
  eps_bind = std::exp2(-253.0L);
}

void ProtocolParams::validate() const {
  auto bad = [](const std::string& m) { throw std::invalid_argument("params: " + m); };
  if (!(alpha > 0.0 && alpha < 1.0)) bad("alpha must lie in (0,1)");
  if (!(f_ec >= 1.0)) bad("f_ec must be >= 1");
  if (n0 == 0) bad("n0 must be positive");
  if (!(p_max > 0.0 && p_max < 0.5)) bad("p_max must lie in (0,0.5)");
  if (!(delta1 > 0.0 && delta1 < 0.5)) bad("delta1 must lie in (0,0.5)");
  if (!(delta2 > 0.0 && delta2 < 0.5)) bad("delta2 must lie in (0,0.5)");
  if (!(p_max + delta1 < 0.5 - delta2)) bad("p_max + delta1 must stay below 1/2 - delta2");
  if (!(eps_ir > 0.0L && eps_ir < 1.0L)) bad("eps_ir must lie in (0,1)");
  if (!(eps_bind > 0.0L && eps_bind < 1.0L)) bad("eps_bind must lie in (0,1)");
  if (n_out == 0) bad("n_out must be positive");
  if (!(eps_total_target > 0.0L && eps_total_target < 1.0L))
    bad("eps_total_target must lie in (0,1)");
}

std::array<uint8_t, 32> ProtocolParams::digest() const {
  std::string canon = to_config_text();
  std::array<uint8_t, 32> out{};
  SHA256(reinterpret_cast<const uint8_t*>(canon.data()), canon.size(), out.data());
  return out;
}

namespace {
std::string fmt_ld(long double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.21Lg", v);
  return buf;
}
std::string fmt_d(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string ProtocolParams::to_config_text() const {
  std::ostringstream os;
  os << "alpha=" << fmt_d(alpha) << "\n"
     << "f_ec=" << fmt_d(f_ec) << "\n"
     << "n0=" << n0 << "\n"
     << "p_max=" << fmt_d(p_max) << "\n"
     << "delta1=" << fmt_d(delta1) << "\n"
     << "delta2=" << fmt_d(delta2) << "\n"
     << "eps_ir=" << fmt_ld(eps_ir) << "\n"
     << "eps_bind=" << fmt_ld(eps_bind) << "\n"
     << "n_out=" << n_out << "\n"
     << "eps_total_target=" << fmt_ld(eps_total_target) << "\n";
  return os.str();
}

ProtocolParams ProtocolParams::from_config_text(const std::string& text) {
  ProtocolParams p;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("params config: missing '=' in line: " + line);
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto ktrim = key.find_last_not_of(" \t");
    key = key.substr(0, ktrim == std::string::npos ? 0 : ktrim + 1);
    auto vtrim = val.find_first_not_of(" \t");
    val = vtrim == std::string::npos ? "" : val.substr(vtrim);
    try {
      if (key == "alpha") p.alpha = std::stod(val);
      else if (key == "f_ec") p.f_ec = std::stod(val);
      else if (key == "n0") p.n0 = std::stoull(val);
      else if (key == "p_max") p.p_max = std::stod(val);
      else if (key == "delta1") p.delta1 = std::stod(val);
      else if (key == "delta2") p.delta2 = std::stod(val);
      else if (key == "eps_ir") p.eps_ir = std::stold(val);
      else if (key == "eps_bind") p.eps_bind = std::stold(val);
      else if (key == "n_out") p.n_out = uint32_t(std::stoul(val));
      else if (key == "eps_total_target") p.eps_total_target = std::stold(val);
      else throw std::invalid_argument("params config: unknown key: " + key);
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("params config: bad value for " + key + ": " + val);
    }
  }
  p.validate();
  return p;
}

namespace {
// floor() that forgives sub-milli representation error in products of
// decimal parameters (0.495 * 0.65 * 3.2e6 must floor to 1029600).
uint64_t floor_stable(long double x) {
  long double r = std::round(x);
  if (std::fabs(x - r) < 1e-3L && r >= 0.0L) return (uint64_t)r;
  return (uint64_t)std::floor(x);
}
}  // namespace

DerivedCounts derived_counts(const ProtocolParams& p) {
  long double a = p.alpha, d2 = p.delta2, n0 = (long double)p.n0;
  DerivedCounts c;
  c.n_test = floor_stable(a * n0);
  c.n_check = floor_stable((0.5L - d2) * a * n0);
  c.n_raw = floor_stable((0.5L - d2) * (1.0L - a) * n0);
  return c;
}

long double binary_entropy(long double p) {
  if (p <= 0.0L || p >= 1.0L) return 0.0L;
  return -p * std::log2(p) - (1.0L - p) * std::log2(1.0L - p);
}

long double kl_divergence_binary(long double p, long double q) {
  if (p < 0.0L || p > 1.0L || q <= 0.0L || q >= 1.0L)
    throw std::invalid_argument("kl_divergence_binary: arguments out of range");
  long double s = 0.0L;
  if (p > 0.0L) s += p * std::log(p / q);
  if (p < 1.0L) s += (1.0L - p) * std::log((1.0L - p) / (1.0L - q));
  return s;
}

long double key_rate_bracket(const ProtocolParams& p, double f) {
  long double d2 = p.delta2;
  long double pe = (long double)p.p_max + (long double)p.delta1;
  return 0.5L - d2 - binary_entropy(pe / (0.5L - d2)) - (long double)f * binary_entropy(pe);
}

long double asymptotic_key_rate(const ProtocolParams& p) {
  return (1.0L - (long double)p.alpha) * (0.5L - (long double)p.delta2) *
         key_rate_bracket(p, p.f_ec);
}

SecurityBudget epsilon_budget(const ProtocolParams& p, uint64_t n) {
  DerivedCounts c = derived_counts(p);
  long double a = p.alpha, d1 = p.delta1, d2 = p.delta2, n0 = (long double)p.n0;
  SecurityBudget b{};
  b.eps_bind = p.eps_bind;

  // correctness: 2^{-(N_raw - n)/2} + 2 eps_IR
  long double gap = ((long double)c.n_raw - (long double)n) / 2.0L;
  b.eps_correct = std::exp2(-gap) + 2.0L * p.eps_ir;

  long double inner = std::exp(-0.5L * (1.0L - a) * (1.0L - a) * (long double)c.n_test * d1 * d1) +
                      std::exp(-0.5L * (long double)c.n_check * d1 * d1);
  b.term_sample = std::sqrt(2.0L) * std::sqrt(inner);
  b.term_tail = std::exp(-kl_divergence_binary(0.5L - d2, 0.5L) * (1.0L - a) * n0);
  long double bracket = key_rate_bracket(p, p.f_ec);
  // log-domain: 2^{n - N_raw * bracket - 1}
  b.term_pa = std::exp2((long double)n - (long double)c.n_raw * bracket - 1.0L);
  b.eps_sender = b.term_sample + b.term_tail + b.term_pa;
  b.eps_total = b.eps_correct + b.eps_sender;
  return b;
}

uint64_t max_secure_length(uint64_t n_raw, const ProtocolParams& p, double f_actual,
                           long double eps_target) {
  ProtocolParams q = p;
  q.f_ec = f_actual;
  long double bracket = key_rate_bracket(q, f_actual);
  if (bracket <= 0.0L) return 0;
  // (1/2) 2^{n - n_raw*bracket} <= eps_target/3
  long double nmax =
      std::floor((long double)n_raw * bracket + 1.0L + std::log2(eps_target / 3.0L));
  if (nmax < 1.0L) return 0;
  return (uint64_t)nmax;
}

uint64_t invert_block_size(const ProtocolParams& p, long double eps_target, uint64_t n0_cap) {
  auto ok = [&](uint64_t n0) {
    ProtocolParams q = p;
    q.n0 = n0;
    return epsilon_budget(q, p.n_out).eps_total <= eps_target;
  };
  uint64_t hi = 1024;
  while (hi < n0_cap && !ok(hi)) hi *= 2;
  if (!ok(hi)) return 0;
  uint64_t lo = hi / 2;
  while (lo + 1 < hi) {
    uint64_t mid = lo + (hi - lo) / 2;
    if (ok(mid)) hi = mid; else lo = mid;
  }
  return hi;
}

std::vector<RatePoint> ot_rate_curve(const qot::qsim::ChannelModel& source,
                                     const ProtocolParams& p,
                                     const std::vector<long double>& eps_grid,
                                     const std::vector<double>& loss_grid) {
  std::vector<RatePoint> rows;
  rows.reserve(eps_grid.size() * loss_grid.size());
  for (long double eps : eps_grid) {
    for (double loss : loss_grid) {
      qot::qsim::ChannelModel ch = qot::qsim::channel_at(source, loss);
      RatePoint r{};
      r.eps = eps;
      r.loss_db = loss;
      r.fiber_km = loss / source.fiber_db_per_km;
      r.qber = ch.mean_qber();
      if (r.qber <= p.p_max) {
        r.n0 = invert_block_size(p, eps);
        if (r.n0 > 0) {
          r.feasible = true;
          r.ot_per_s = ch.coincidence_hz() / double(r.n0);
        }
      }
      rows.push_back(r);
    }
  }
  return rows;
}

void write_rate_csv(std::ostream& os, const std::vector<RatePoint>& rows) {
  os << "eps,loss_db,fiber_km,n0,qber,ot_per_s,feasible\n";
  for (const auto& r : rows) {
    char buf[192];
    std::snprintf(buf, sizeof buf, "%.6Lg,%.4g,%.4g,%llu,%.6g,%.6g,%d\n", r.eps, r.loss_db,
                  r.fiber_km, (unsigned long long)r.n0, r.qber, r.ot_per_s, r.feasible ? 1 : 0);
    os << buf;
  }
}

}  // namespace qot::params
