#include "qot/drbg.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <stdexcept>

namespace qot {

struct Drbg::Impl {
  EVP_CIPHER_CTX* ctx = nullptr;
};

static void check(int ok, const char* what) {
  if (ok != 1) throw std::runtime_error(std::string("openssl failure: ") + what);
}

Drbg::Drbg(const Seed256& seed) : impl_(new Impl) {
  impl_->ctx = EVP_CIPHER_CTX_new();
  if (!impl_->ctx) throw std::runtime_error("EVP_CIPHER_CTX_new failed");
  uint8_t iv[16] = {0};
  check(EVP_EncryptInit_ex(impl_->ctx, EVP_aes_256_ctr(), nullptr, seed.data(), iv),
        "aes-256-ctr init");
}

Drbg::Drbg(Drbg&& o) noexcept
    : impl_(o.impl_), buf_(o.buf_), pos_(o.pos_), bitbuf_(o.bitbuf_), bitcount_(o.bitcount_) {
  o.impl_ = nullptr;
}

Drbg& Drbg::operator=(Drbg&& o) noexcept {
  if (this != &o) {
    if (impl_) {
      if (impl_->ctx) EVP_CIPHER_CTX_free(impl_->ctx);
      delete impl_;
    }
    impl_ = o.impl_;
    buf_ = o.buf_;
    pos_ = o.pos_;
    bitbuf_ = o.bitbuf_;
    bitcount_ = o.bitcount_;
    o.impl_ = nullptr;
  }
  return *this;
}

Drbg::~Drbg() {
  if (impl_) {
    if (impl_->ctx) EVP_CIPHER_CTX_free(impl_->ctx);
    delete impl_;
  }
}

void Drbg::refill() {
  static const std::array<uint8_t, 4096> zeros{};
  int outl = 0;
  check(EVP_EncryptUpdate(impl_->ctx, buf_.data(), &outl, zeros.data(), (int)zeros.size()),
        "aes-256-ctr update");
  pos_ = 0;
}

void Drbg::fill(std::span<uint8_t> out) {
  std::size_t off = 0;
  while (off < out.size()) {
    if (pos_ == buf_.size()) refill();
    std::size_t take = std::min(out.size() - off, buf_.size() - pos_);
    std::memcpy(out.data() + off, buf_.data() + pos_, take);
    pos_ += take;
    off += take;
  }
}

std::vector<uint8_t> Drbg::bytes(std::size_t n) {
  std::vector<uint8_t> v(n);
  fill(v);
  return v;
}

Seed256 Drbg::seed256() {
  Seed256 s;
  fill(s);
  return s;
}

bool Drbg::bit() {
  if (bitcount_ == 0) {
    bitbuf_ = u64();
    bitcount_ = 64;
  }
  bool b = bitbuf_ & 1;
  bitbuf_ >>= 1;
  --bitcount_;
  return b;
}

uint64_t Drbg::u64() {
  uint8_t b[8];
  fill(b);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | b[i];
  return v;
}

uint64_t Drbg::below(uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Drbg::below: zero bound");
  // rejection sampling over the largest multiple of bound
  uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % bound);
  uint64_t v;
  do {
    v = u64();
  } while (v >= limit);
  return v % bound;
}

double Drbg::unit() { return double(u64() >> 11) * 0x1.0p-53; }

BitVec Drbg::bits(std::size_t n) {
  BitVec v(n);
  auto raw = bytes((n + 7) / 8);
  for (std::size_t i = 0; i < n; ++i)
    if (raw[i >> 3] & (1u << (i & 7))) v.set(i, true);
  return v;
}

Seed256 Drbg::derive(const Seed256& parent, std::string_view label) {
  SHA256_CTX c;
  SHA256_Init(&c);
  SHA256_Update(&c, parent.data(), parent.size());
  SHA256_Update(&c, label.data(), label.size());
  Seed256 out;
  SHA256_Final(out.data(), &c);
  return out;
}

}  // namespace qot
