#ifndef QOT_FRAMEIO_HPP
#define QOT_FRAMEIO_HPP

#include <functional>

#include "qot/transport.hpp"

namespace qot {

// Indirection between protocol engines and the transport so the pipeline
// can absorb every frame into the active auth context on both directions.
struct FrameIo {
  std::function<void(const transport::Frame&)> send;
  std::function<transport::Frame()> recv;
};

// Plain pass-through wrapper over a channel, for module-level tests.
FrameIo direct_io(transport::Channel& ch, uint8_t lane, uint64_t session_id);

}  // namespace qot

#endif
