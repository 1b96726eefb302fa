#ifndef QOT_ABORT_HPP
#define QOT_ABORT_HPP

#include <stdexcept>
#include <string>

namespace qot {

// Enumerated protocol abort reasons; transmitted to the peer and surfaced
// to the operator instead of a bare "abort".
enum class AbortReason {
  none,
  commitment,        // opened tuple fails commitment verification
  p_exceeded,        // observed test error rate above p_max
  check_size,        // |I_s| below N_check
  insufficient_raw,  // cannot assemble I_0 or I_1 of size N_raw
  protocol_violation,
  auth_fail,         // authentication tag mismatch
  ir_fail,           // error-correction verification failed
  ir_stuck,          // reconciliation exceeded its round limit
  pa_bound,          // requested output length above the secure maximum
  qkd_qber,          // QKD lane error rate above its threshold
  params_mismatch,   // parameter digests differ at session start
};

const char* to_string(AbortReason r);
AbortReason abort_reason_from_u8(uint8_t v);

// Thrown to tear down a session; the pipeline converts it into an aborted
// session record (never into released key material).
struct ProtocolAbort : std::runtime_error {
  AbortReason reason;
  explicit ProtocolAbort(AbortReason r, const std::string& detail = "")
      : std::runtime_error(std::string("protocol abort: ") + to_string(r) +
                           (detail.empty() ? "" : (": " + detail))),
        reason(r) {}
};

}  // namespace qot

#endif
