#include "qot/abort.hpp"

#include <cstdint>

namespace qot {

const char* to_string(AbortReason r) {
  switch (r) {
    case AbortReason::none: return "none";
    case AbortReason::commitment: return "commitment";
    case AbortReason::p_exceeded: return "p_exceeded";
    case AbortReason::check_size: return "check_size";
    case AbortReason::insufficient_raw: return "insufficient_raw";
    case AbortReason::protocol_violation: return "protocol_violation";
    case AbortReason::auth_fail: return "auth_fail";
    case AbortReason::ir_fail: return "ir_fail";
    case AbortReason::ir_stuck: return "ir_stuck";
    case AbortReason::pa_bound: return "pa_bound";
    case AbortReason::qkd_qber: return "qkd_qber";
    case AbortReason::params_mismatch: return "params_mismatch";
  }
  return "unknown";
}

AbortReason abort_reason_from_u8(uint8_t v) {
  if (v > uint8_t(AbortReason::params_mismatch)) return AbortReason::protocol_violation;
  return AbortReason(v);
}

}  // namespace qot
