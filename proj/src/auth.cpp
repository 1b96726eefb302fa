#include "qot/auth.hpp"

#include <algorithm>
#include <cstring>

namespace qot::auth {

std::vector<uint8_t> SecretStore::consume(std::size_t n) {
  if (available() < n) throw InsufficientSecret{};
  std::vector<uint8_t> out(pool_.begin() + std::ptrdiff_t(consumed_),
                           pool_.begin() + std::ptrdiff_t(consumed_ + n));
  log_.emplace_back(consumed_, n);
  // scrub the handed-out bytes so accidental reuse is loud
  std::memset(pool_.data() + consumed_, 0, n);
  consumed_ += n;
  return out;
}

void SecretStore::replenish(std::span<const uint8_t> key) {
  pool_.insert(pool_.end(), key.begin(), key.end());
}

namespace {
Gf128 key_element(SecretStore& store) {
  auto bytes = store.consume(16);
  return Gf128::from_bytes(std::span<const uint8_t, 16>(bytes.data(), 16));
}
}  // namespace

AuthContext::AuthContext(uint64_t key_handle, SecretStore& store)
    : handle_(key_handle), point_(key_element(store)) {}

void AuthContext::absorb_block(const Gf128& b) { state_ = point_.mul(state_ ^ b); }

void AuthContext::absorb(std::span<const uint8_t> message) {
  if (finalized_) throw std::logic_error("auth: absorb after finalize");
  Gf128 len{};
  len.lo = uint64_t(message.size());
  len.hi = message_count_ + 1;  // binds ordering; nonzero so empty messages register
  absorb_block(len);
  std::size_t off = 0;
  while (off < message.size()) {
    uint8_t block[16] = {0};
    std::size_t take = std::min<std::size_t>(16, message.size() - off);
    std::memcpy(block, message.data() + off, take);
    absorb_block(Gf128::from_bytes(std::span<const uint8_t, 16>(block, 16)));
    off += take;
  }
  ++message_count_;
}

Tag AuthContext::finalize_tag(SecretStore& store) {
  if (finalized_) throw std::logic_error("auth: finalize twice");
  Gf128 mask = key_element(store);
  finalized_ = true;
  return (state_ ^ mask).to_bytes();
}

bool verify_exchange(const Tag& local, const Tag& remote) {
  uint8_t diff = 0;
  for (std::size_t i = 0; i < local.size(); ++i) diff |= uint8_t(local[i] ^ remote[i]);
  return diff == 0;
}

}  // namespace qot::auth
