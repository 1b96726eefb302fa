#include "qot/transport.hpp"

#include "qot/frameio.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

#include "qot/abort.hpp"
#include "qot/wire.hpp"

namespace qot::transport {

void Frame::set_tag(const char* tag) {
  type_tag.fill('\0');
  std::size_t n = std::strlen(tag);
  if (n > 8) throw std::invalid_argument("frame tag too long");
  std::memcpy(type_tag.data(), tag, n);
}

std::string Frame::tag_string() const {
  std::size_t n = 8;
  while (n > 0 && type_tag[n - 1] == '\0') --n;
  return std::string(type_tag.data(), n);
}

bool Frame::tag_is(const char* tag) const {
  std::array<char, 8> t{};
  std::size_t n = std::strlen(tag);
  if (n > 8) return false;
  std::memcpy(t.data(), tag, n);
  return t == type_tag;
}

std::vector<uint8_t> Frame::encode() const {
  if (payload.size() > kMaxPayload) throw TransportError("transport: payload exceeds 16 MiB");
  std::vector<uint8_t> out;
  out.reserve(4 + 17 + payload.size());
  wire::put_u32(out, uint32_t(1 + 8 + 8 + payload.size()));
  wire::put_u8(out, lane);
  for (char c : type_tag) out.push_back(uint8_t(c));
  wire::put_u64(out, session_id);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

namespace {

Frame decode_body(std::vector<uint8_t> body) {
  if (body.size() < 17) throw TransportError("transport: short frame");
  Frame f;
  f.lane = body[0];
  if (f.lane > kLaneQkd)
    throw ProtocolAbort(AbortReason::protocol_violation, "unknown lane byte");
  std::memcpy(f.type_tag.data(), body.data() + 1, 8);
  uint64_t sid = 0;
  for (int i = 0; i < 8; ++i) sid = (sid << 8) | body[9 + i];
  f.session_id = sid;
  f.payload.assign(body.begin() + 17, body.end());
  return f;
}

class LoopbackQueue {
 public:
  void push(std::vector<uint8_t> bytes) {
    std::unique_lock lk(m_);
    if (closed_) throw TransportError("transport: channel closed");
    q_.push_back(std::move(bytes));
    cv_.notify_one();
  }
  std::vector<uint8_t> pop(int timeout_ms) {
    std::unique_lock lk(m_);
    if (!cv_.wait_for(lk, std::chrono::milliseconds(timeout_ms),
                      [&] { return !q_.empty() || closed_; })) {
      throw TransportTimeout{};
    }
    if (q_.empty()) throw TransportError("transport: channel closed");
    auto b = std::move(q_.front());
    q_.pop_front();
    return b;
  }
  void close() {
    std::unique_lock lk(m_);
    closed_ = true;
    cv_.notify_all();
  }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  std::deque<std::vector<uint8_t>> q_;
  bool closed_ = false;
};

class LoopbackChannel : public Channel {
 public:
  LoopbackChannel(std::shared_ptr<LoopbackQueue> tx, std::shared_ptr<LoopbackQueue> rx)
      : tx_(std::move(tx)), rx_(std::move(rx)) {}
  ~LoopbackChannel() override { close(); }

  void send(const Frame& f) override { tx_->push(f.encode()); }
  Frame recv() override {
    auto bytes = rx_->pop(timeout_ms_);
    if (bytes.size() < 4) throw TransportError("transport: truncated frame");
    uint32_t len = (uint32_t(bytes[0]) << 24) | (uint32_t(bytes[1]) << 16) |
                   (uint32_t(bytes[2]) << 8) | bytes[3];
    if (bytes.size() - 4 != len) throw TransportError("transport: length mismatch");
    return decode_body({bytes.begin() + 4, bytes.end()});
  }
  void close() override {
    tx_->close();
    rx_->close();
  }
  void set_timeout_ms(int ms) override { timeout_ms_ = ms; }

 private:
  std::shared_ptr<LoopbackQueue> tx_, rx_;
  int timeout_ms_ = 30000;
};

class TcpChannel : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) {}
  ~TcpChannel() override { close(); }

  void send(const Frame& f) override {
    auto bytes = f.encode();
    std::size_t off = 0;
    while (off < bytes.size()) {
      ssize_t n = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
      if (n <= 0) throw TransportError("transport: send failed");
      off += std::size_t(n);
    }
  }

  Frame recv() override {
    uint8_t hdr[4];
    read_exact(hdr, 4);
    uint32_t len = (uint32_t(hdr[0]) << 24) | (uint32_t(hdr[1]) << 16) |
                   (uint32_t(hdr[2]) << 8) | hdr[3];
    if (len < 17 || len > kMaxPayload + 17) throw TransportError("transport: bad frame length");
    std::vector<uint8_t> body(len);
    read_exact(body.data(), body.size());
    return decode_body(std::move(body));
  }

  void close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }
  void set_timeout_ms(int ms) override { timeout_ms_ = ms; }

 private:
  void read_exact(uint8_t* dst, std::size_t n) {
    std::size_t off = 0;
    while (off < n) {
      pollfd p{fd_, POLLIN, 0};
      int pr = ::poll(&p, 1, timeout_ms_);
      if (pr == 0) throw TransportTimeout{};
      if (pr < 0) throw TransportError("transport: poll failed");
      ssize_t r = ::recv(fd_, dst + off, n - off, 0);
      if (r == 0) throw TransportError("transport: peer closed");
      if (r < 0) throw TransportError("transport: recv failed");
      off += std::size_t(r);
    }
  }

  int fd_;
  int timeout_ms_ = 30000;
};

int tcp_listen_accept(const std::string& host, const std::string& port, int timeout_ms) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.empty() ? nullptr : host.c_str(), port.c_str(), &hints, &res) != 0)
    throw TransportError("transport: cannot resolve listen address");
  int lfd = -1;
  for (addrinfo* a = res; a; a = a->ai_next) {
    lfd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (lfd < 0) continue;
    int one = 1;
    setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(lfd, a->ai_addr, a->ai_addrlen) == 0 && ::listen(lfd, 1) == 0) break;
    ::close(lfd);
    lfd = -1;
  }
  freeaddrinfo(res);
  if (lfd < 0) throw TransportError("transport: bind/listen failed");
  pollfd p{lfd, POLLIN, 0};
  int pr = ::poll(&p, 1, timeout_ms);
  if (pr <= 0) {
    ::close(lfd);
    throw TransportTimeout{};
  }
  int fd = ::accept(lfd, nullptr, nullptr);
  ::close(lfd);
  if (fd < 0) throw TransportError("transport: accept failed");
  return fd;
}

int tcp_connect(const std::string& host, const std::string& port, int timeout_ms) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0)
    throw TransportError("transport: cannot resolve endpoint");
  int fd = -1;
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  while (fd < 0 && std::chrono::steady_clock::now() < deadline) {
    for (addrinfo* a = res; a; a = a->ai_next) {
      fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
      ::close(fd);
      fd = -1;
    }
    if (fd < 0) usleep(100000);  // listener may not be up yet
  }
  freeaddrinfo(res);
  if (fd < 0) throw TransportError("transport: connect failed");
  return fd;
}

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_loopback() {
  auto a = std::make_shared<LoopbackQueue>();
  auto b = std::make_shared<LoopbackQueue>();
  return {std::make_unique<LoopbackChannel>(a, b), std::make_unique<LoopbackChannel>(b, a)};
}

void handshake(Channel& ch, Role role, const std::array<uint8_t, 32>& params_digest) {
  Frame hello;
  hello.set_tag("HELLO");
  wire::put_u16(hello.payload, kProtocolVersion);
  wire::put_u8(hello.payload, uint8_t(role));
  wire::put_bytes(hello.payload, params_digest);
  ch.send(hello);

  Frame peer = ch.recv();
  if (!peer.tag_is("HELLO"))
    throw ProtocolAbort(AbortReason::protocol_violation, "expected HELLO");
  wire::Reader r(peer.payload);
  uint16_t ver = r.u16();
  uint8_t peer_role = r.u8();
  auto digest = r.raw(32);
  r.expect_end();
  if (ver != kProtocolVersion)
    throw TransportError("transport: version mismatch, local " +
                         std::to_string(kProtocolVersion) + " peer " + std::to_string(ver));
  if (peer_role == uint8_t(role))
    throw TransportError(std::string("transport: role conflict, both sides are ") +
                         to_string(role));
  if (!std::equal(digest.begin(), digest.end(), params_digest.begin()))
    throw ProtocolAbort(AbortReason::params_mismatch, "parameter digests differ");
}

std::unique_ptr<Channel> connect_tcp(Role role, const std::string& endpoint,
                                     const std::array<uint8_t, 32>& params_digest,
                                     bool listen, int timeout_ms) {
  auto colon = endpoint.rfind(':');
  if (colon == std::string::npos)
    throw TransportError("transport: endpoint must be host:port");
  std::string host = endpoint.substr(0, colon);
  std::string port = endpoint.substr(colon + 1);
  int fd = listen ? tcp_listen_accept(host, port, timeout_ms) : tcp_connect(host, port, timeout_ms);
  auto ch = std::make_unique<TcpChannel>(fd);
  ch->set_timeout_ms(timeout_ms);
  handshake(*ch, role, params_digest);
  return ch;
}

}  // namespace qot::transport

namespace qot {

FrameIo direct_io(transport::Channel& ch, uint8_t lane, uint64_t session_id) {
  FrameIo io;
  io.send = [&ch, lane, session_id](const transport::Frame& f) {
    transport::Frame out = f;
    out.lane = lane;
    out.session_id = session_id;
    ch.send(out);
  };
  io.recv = [&ch] { return ch.recv(); };
  return io;
}

}  // namespace qot
