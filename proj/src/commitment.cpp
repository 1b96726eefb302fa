#include "qot/commitment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <stdexcept>

namespace qot::commitment {

Word768 shift_right_one(const Word768& v) {
  Word768 out{};
  uint8_t carry = 0;
  for (std::size_t i = 0; i < kOutBytes; ++i) {
    out[i] = uint8_t((v[i] >> 1) | (carry << 7));
    carry = v[i] & 1u;
  }
  return out;
}

namespace {
bool all_equal(const Word768& v, uint8_t b) {
  return std::all_of(v.begin(), v.end(), [b](uint8_t x) { return x == b; });
}
}  // namespace

PublicString PublicString::sample(Drbg& rng) {
  Word768 r1;
  do {
    rng.fill(r1);
  } while (all_equal(r1, 0x00) || all_equal(r1, 0xFF));
  return from_r1(r1);
}

PublicString PublicString::from_r1(const Word768& r1) {
  if (all_equal(r1, 0x00) || all_equal(r1, 0xFF))
    throw std::invalid_argument("PublicString: excluded r1 value");
  PublicString p;
  p.r1 = r1;
  p.r2 = shift_right_one(r1);
  return p;
}

Word768 expand_seed(const std::array<uint8_t, kSeedBytes>& x) {
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (!ctx) throw std::runtime_error("expand_seed: EVP ctx");
  if (EVP_EncryptInit_ex(ctx, EVP_aes_256_ecb(), nullptr, x.data(), nullptr) != 1) {
    EVP_CIPHER_CTX_free(ctx);
    throw std::runtime_error("expand_seed: init");
  }
  EVP_CIPHER_CTX_set_padding(ctx, 0);
  Word768 out{};
  uint8_t block[16] = {0};
  for (uint8_t ctr = 0; ctr < 6; ++ctr) {
    block[15] = ctr;  // big-endian counter, fits in the last byte
    int len = 0;
    if (EVP_EncryptUpdate(ctx, out.data() + 16 * ctr, &len, block, 16) != 1 || len != 16) {
      EVP_CIPHER_CTX_free(ctx);
      throw std::runtime_error("expand_seed: update");
    }
  }
  EVP_CIPHER_CTX_free(ctx);
  return out;
}

Commitment commit(const PublicString& pub, const Opening& open) {
  Commitment c = expand_seed(open.x);
  if (open.b1)
    for (std::size_t i = 0; i < kOutBytes; ++i) c[i] ^= pub.r1[i];
  if (open.b2)
    for (std::size_t i = 0; i < kOutBytes; ++i) c[i] ^= pub.r2[i];
  return c;
}

bool verify_open(const PublicString& pub, const Commitment& c, const Opening& open) {
  return commit(pub, open) == c;
}

Precommitment precommit(Drbg& rng, const PublicString& pub) {
  Precommitment pre;
  rng.fill(pre.hidden.x);
  pre.hidden.b1 = rng.bit();
  pre.hidden.b2 = rng.bit();
  pre.c = commit(pub, pre.hidden);
  return pre;
}

std::pair<bool, bool> online_commit(const Precommitment& pre, bool b1, bool b2) {
  return {pre.hidden.b1 != b1, pre.hidden.b2 != b2};
}

ChainResult open_chain(const PublicString& pub, const Commitment& c,
                       const Opening& hidden_open, std::pair<bool, bool> mask) {
  ChainResult r;
  if (!verify_open(pub, c, hidden_open)) return r;
  r.accept = true;
  r.b1 = hidden_open.b1 != mask.first;
  r.b2 = hidden_open.b2 != mask.second;
  return r;
}

void put_opening(std::vector<uint8_t>& out, const Opening& o) {
  out.insert(out.end(), o.x.begin(), o.x.end());
  out.push_back(uint8_t((o.b1 ? 1 : 0) | (o.b2 ? 2 : 0)));
}

Opening get_opening(std::span<const uint8_t> in) {
  if (in.size() != kOpeningBytes) throw std::invalid_argument("opening: bad length");
  Opening o;
  std::copy(in.begin(), in.begin() + kSeedBytes, o.x.begin());
  uint8_t bits = in[kSeedBytes];
  if (bits & ~3u) throw std::invalid_argument("opening: reserved bits set");
  o.b1 = bits & 1u;
  o.b2 = bits & 2u;
  return o;
}

}  // namespace qot::commitment
