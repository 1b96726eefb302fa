#ifndef QOT_AUTH_HPP
#define QOT_AUTH_HPP

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qot/gf128.hpp"

namespace qot::auth {

using Tag = std::array<uint8_t, 16>;

inline constexpr std::size_t kPerTagQuota = 32;  // 16-byte point + 16-byte mask

struct InsufficientSecret : std::runtime_error {
  InsufficientSecret() : std::runtime_error("auth: secret pool depleted") {}
};

// Consume-once reservoir of pre-shared (and QKD-replenished) secret bytes.
// Both parties must consume in identical order; the log makes that checkable.
class SecretStore {
 public:
  explicit SecretStore(std::vector<uint8_t> initial = {}, std::size_t low_watermark = 256)
      : pool_(std::move(initial)), low_watermark_(low_watermark) {}

  std::size_t available() const { return pool_.size() - consumed_; }
  std::size_t consumed_offset() const { return consumed_; }
  bool needs_replenish() const { return available() < low_watermark_; }
  std::size_t low_watermark() const { return low_watermark_; }

  std::vector<uint8_t> consume(std::size_t n);
  void replenish(std::span<const uint8_t> key);

  // (offset, length) of every consumption, in order.
  const std::vector<std::pair<std::size_t, std::size_t>>& consumption_log() const {
    return log_;
  }

 private:
  std::vector<uint8_t> pool_;
  std::size_t consumed_ = 0;
  std::size_t low_watermark_;
  std::vector<std::pair<std::size_t, std::size_t>> log_;
};

// One-time Wegman-Carter MAC context over a message sequence. The hash is
// polynomial evaluation in GF(2^128); each message contributes a length
// block followed by its zero-padded 16-byte blocks, so the absorption is
// unambiguous under any re-chunking. The evaluation point is drawn at
// construction, the output mask at finalization.
class AuthContext {
 public:
  AuthContext(uint64_t key_handle, SecretStore& store);

  uint64_t handle() const { return handle_; }
  uint64_t message_count() const { return message_count_; }
  bool finalized() const { return finalized_; }

  void absorb(std::span<const uint8_t> message);
  Tag finalize_tag(SecretStore& store);

 private:
  void absorb_block(const Gf128& b);

  uint64_t handle_;
  Gf128Mult point_;
  Gf128 state_{};
  uint64_t message_count_ = 0;
  bool finalized_ = false;
};

// Constant-shape tag comparison; true means accept.
bool verify_exchange(const Tag& local, const Tag& remote);

}  // namespace qot::auth

#endif
