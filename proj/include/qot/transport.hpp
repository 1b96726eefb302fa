#ifndef QOT_TRANSPORT_HPP
#define QOT_TRANSPORT_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qot::transport {

enum class Role : uint8_t { sender = 0, receiver = 1 };
inline const char* to_string(Role r) { return r == Role::sender ? "sender" : "receiver"; }

inline constexpr uint16_t kProtocolVersion = 1;
inline constexpr std::size_t kMaxPayload = 16u << 20;
inline constexpr uint8_t kLaneOt = 0;
inline constexpr uint8_t kLaneQkd = 1;

// Wire layout: length u32 (bytes after itself), lane u8, type_tag 8 ASCII
// bytes, session_id u64, payload. Big-endian throughout.
struct Frame {
  uint8_t lane = kLaneOt;
  std::array<char, 8> type_tag{};
  uint64_t session_id = 0;
  std::vector<uint8_t> payload;

  void set_tag(const char* tag);
  std::string tag_string() const;
  bool tag_is(const char* tag) const;

  std::vector<uint8_t> encode() const;  // full frame including length prefix
};

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TransportTimeout : TransportError {
  TransportTimeout() : TransportError("transport: receive timed out") {}
};

// Reliable ordered duplex frame channel. One reader and one writer may run
// concurrently; send is atomic per frame.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(const Frame& f) = 0;
  virtual Frame recv() = 0;  // blocks up to the timeout
  virtual void close() = 0;
  virtual void set_timeout_ms(int ms) = 0;
};

// In-process pair of channels backed by two bounded queues.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_loopback();

// TCP endpoints: "host:port". The sender handshake carries version, role,
// and the 32-byte parameter digest; role conflicts and version or digest
// mismatches fail the connect.
std::unique_ptr<Channel> connect_tcp(Role role, const std::string& endpoint,
                                     const std::array<uint8_t, 32>& params_digest,
                                     bool listen, int timeout_ms = 30000);

// Loopback equivalent of the handshake so both transports run the same
// protocol-layer code path.
void handshake(Channel& ch, Role role, const std::array<uint8_t, 32>& params_digest);

}  // namespace qot::transport

#endif
