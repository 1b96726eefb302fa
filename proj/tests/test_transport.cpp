#include <doctest.h>

#include <future>
#include <thread>

#include "qot/abort.hpp"
#include "qot/drbg.hpp"
#include "qot/transport.hpp"

using namespace qot;
using namespace qot::transport;

namespace {
Seed256 seed_of(uint8_t b) {
  Seed256 s{};
  s.fill(b);
  return s;
}

Frame make_frame(Drbg& g) {
  Frame f;
  f.lane = g.bit() ? kLaneQkd : kLaneOt;
  f.set_tag(g.bit() ? "CASC_PAR" : "PA_SEED");
  f.session_id = g.u64();
  f.payload = g.bytes(g.below(300));
  return f;
}

bool same_frame(const Frame& a, const Frame& b) {
  return a.lane == b.lane && a.type_tag == b.type_tag && a.session_id == b.session_id &&
         a.payload == b.payload;
}
}  // namespace

TEST_CASE("frame tag helpers") {
  Frame f;
  f.set_tag("AUTH_TAG");
  CHECK(f.tag_is("AUTH_TAG"));
  CHECK_FALSE(f.tag_is("PA_SEED"));
  CHECK(f.tag_string() == "AUTH_TAG");
  f.set_tag("HI");
  CHECK(f.tag_string() == "HI");
  CHECK_THROWS_AS(f.set_tag("NINECHARS"), std::invalid_argument);
}

TEST_CASE("frame encoding layout") {
  Frame f;
  f.lane = kLaneQkd;
  f.set_tag("PA_SEED");
  f.session_id = 0x0102030405060708ull;
  f.payload = {0xAA, 0xBB};
  auto bytes = f.encode();
  REQUIRE(bytes.size() == 4 + 17 + 2);
  // length counts everything after itself
  CHECK(bytes[3] == 19);
  CHECK(bytes[4] == kLaneQkd);
  CHECK(bytes[5] == 'P');
  CHECK(bytes[12] == '\0');
  CHECK(bytes[13] == 0x01);
  CHECK(bytes[21] == 0xAA);
}

TEST_CASE("loopback delivers 1000 random frames in order, byte-identical") {
  auto [a, b] = make_loopback();
  Drbg g(seed_of(61));
  std::vector<Frame> sent;
  for (int i = 0; i < 1000; ++i) {
    sent.push_back(make_frame(g));
    a->send(sent.back());
  }
  for (int i = 0; i < 1000; ++i) {
    Frame got = b->recv();
    CHECK(same_frame(got, sent[i]));
  }
}

TEST_CASE("zero-length payload is legal; oversize payload is rejected before send") {
  auto [a, b] = make_loopback();
  Frame f;
  f.set_tag("AUTH_TAG");
  a->send(f);
  CHECK(b->recv().payload.empty());
  f.payload.resize(kMaxPayload + 1);
  CHECK_THROWS_AS(a->send(f), TransportError);
}

TEST_CASE("recv times out when nothing arrives") {
  auto [a, b] = make_loopback();
  b->set_timeout_ms(50);
  CHECK_THROWS_AS(b->recv(), TransportTimeout);
}

TEST_CASE("handshake accepts complementary roles and rejects conflicts") {
  std::array<uint8_t, 32> digest{};
  digest.fill(0x5A);
  {
    auto [a, b] = make_loopback();
    auto fut = std::async(std::launch::async,
                          [&] { handshake(*b, Role::receiver, digest); });
    handshake(*a, Role::sender, digest);
    fut.get();  // no throw
  }
  {
    auto [a, b] = make_loopback();
    auto fut = std::async(std::launch::async, [&] {
      try {
        handshake(*b, Role::sender, digest);
        return false;
      } catch (const TransportError&) {
        return true;
      }
    });
    CHECK_THROWS_AS(handshake(*a, Role::sender, digest), TransportError);
    CHECK(fut.get());
  }
}

TEST_CASE("handshake rejects parameter digest mismatch") {
  std::array<uint8_t, 32> d1{}, d2{};
  d2[0] = 1;
  auto [a, b] = make_loopback();
  auto fut = std::async(std::launch::async, [&] {
    try {
      handshake(*b, Role::receiver, d2);
    } catch (const ProtocolAbort& e) {
      return e.reason;
    }
    return AbortReason::none;
  });
  try {
    handshake(*a, Role::sender, d1);
    CHECK(false);
  } catch (const ProtocolAbort& e) {
    CHECK(e.reason == AbortReason::params_mismatch);
  }
  CHECK(fut.get() == AbortReason::params_mismatch);
}

TEST_CASE("tcp transport matches loopback behavior") {
  std::array<uint8_t, 32> digest{};
  digest.fill(0x77);
  const std::string endpoint = "127.0.0.1:39617";
  auto server = std::async(std::launch::async, [&] {
    return connect_tcp(Role::sender, endpoint, digest, /*listen=*/true, 10000);
  });
  auto client = connect_tcp(Role::receiver, endpoint, digest, /*listen=*/false, 10000);
  auto srv = server.get();

  Drbg g(seed_of(62));
  for (int i = 0; i < 200; ++i) {
    Frame f = make_frame(g);
    srv->send(f);
    CHECK(same_frame(client->recv(), f));
    Frame back = make_frame(g);
    client->send(back);
    CHECK(same_frame(srv->recv(), back));
  }
  srv->close();
  client->close();
}

TEST_CASE("tcp handshake rejects role conflict") {
  std::array<uint8_t, 32> digest{};
  const std::string endpoint = "127.0.0.1:39619";
  auto server = std::async(std::launch::async, [&] {
    try {
      connect_tcp(Role::sender, endpoint, digest, true, 10000);
      return false;
    } catch (const TransportError&) {
      return true;
    }
  });
  bool client_failed = false;
  try {
    connect_tcp(Role::sender, endpoint, digest, false, 10000);
  } catch (const TransportError&) {
    client_failed = true;
  }
  CHECK(server.get());
  CHECK(client_failed);
}
