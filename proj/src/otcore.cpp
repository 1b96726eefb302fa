#include "qot/otcore.hpp"

#include <algorithm>
#include <stdexcept>

namespace qot::otcore {

TestSelection choose_test_set(Drbg& rng, uint64_t n0, double alpha) {
  uint64_t n_test = uint64_t(double(n0) * alpha);
  if (n_test < 1 || n_test > n0)
    throw std::invalid_argument("choose_test_set: degenerate test size");
  TestSelection sel;
  if (n_test * 3 > n0) {
    // dense subset: partial shuffle of the full index range
    std::vector<uint32_t> all(n0);
    for (uint64_t i = 0; i < n0; ++i) all[i] = uint32_t(i);
    rng.shuffle(all);
    sel.i_t.assign(all.begin(), all.begin() + std::ptrdiff_t(n_test));
  } else {
    // sparse subset: rejection sampling against a seen-mask
    std::vector<bool> mark(n0, false);
    sel.i_t.reserve(n_test);
    while (sel.i_t.size() < n_test) {
      uint32_t x = uint32_t(rng.below(n0));
      if (mark[x]) continue;
      mark[x] = true;
      sel.i_t.push_back(x);
    }
  }
  std::sort(sel.i_t.begin(), sel.i_t.end());
  return sel;
}

EstimationResult estimate(const TestSelection& test, const qsim::Block& sender_block,
                          const commitment::PublicString& pub,
                          const std::vector<commitment::Commitment>& commitments,
                          const std::vector<commitment::Opening>& openings,
                          uint64_t n_check, double p_max) {
  if (commitments.size() != test.i_t.size() || openings.size() != test.i_t.size())
    throw std::invalid_argument("estimate: opening count mismatch");
  EstimationResult res;
  for (std::size_t k = 0; k < test.i_t.size(); ++k) {
    if (!commitment::verify_open(pub, commitments[k], openings[k])) {
      res.verdict = Verdict::abort_commitment;
      return res;
    }
  }
  for (std::size_t k = 0; k < test.i_t.size(); ++k) {
    uint32_t j = test.i_t[k];
    bool theta_b = openings[k].b1;
    bool x_b = openings[k].b2;
    if (sender_block.bases.get(j) != theta_b) continue;
    res.i_s.push_back(j);
    if (sender_block.outcomes.get(j) != x_b) ++res.errors;
  }
  if (res.i_s.size() < n_check) {
    res.verdict = Verdict::abort_check_size;
    return res;
  }
  res.p_hat = double(res.errors) / double(res.i_s.size());
  if (res.p_hat > p_max) {
    res.verdict = Verdict::abort_p_exceeded;
    return res;
  }
  res.verdict = Verdict::proceed;
  return res;
}

std::optional<IndexSplit> build_split(const BitVec& theta_a, const BitVec& theta_b,
                                      const std::vector<uint32_t>& i_t, uint64_t n_raw,
                                      Drbg& rng, std::optional<uint8_t> forced_c) {
  if (theta_a.size() != theta_b.size())
    throw std::invalid_argument("build_split: basis string size mismatch");
  std::vector<bool> excluded(theta_a.size(), false);
  for (uint32_t j : i_t) excluded[j] = true;
  std::vector<uint32_t> match, mismatch;
  for (uint64_t j = 0; j < theta_a.size(); ++j) {
    if (excluded[j]) continue;
    if (theta_a.get(j) == theta_b.get(j)) match.push_back(uint32_t(j));
    else mismatch.push_back(uint32_t(j));
  }
  if (match.size() < n_raw || mismatch.size() < n_raw) return std::nullopt;

  rng.shuffle(match);
  rng.shuffle(mismatch);
  IndexSplit split;
  split.i0.assign(match.begin(), match.begin() + std::ptrdiff_t(n_raw));
  split.i1.assign(mismatch.begin(), mismatch.begin() + std::ptrdiff_t(n_raw));
  std::sort(split.i0.begin(), split.i0.end());
  std::sort(split.i1.begin(), split.i1.end());
  split.c = forced_c ? (*forced_c & 1) : uint8_t(rng.bit());
  split.ordered_pair[0] = split.c == 0 ? split.i0 : split.i1;
  split.ordered_pair[1] = split.c == 0 ? split.i1 : split.i0;
  return split;
}

BitVec extract_raw(const BitVec& outcomes, const std::vector<uint32_t>& indices) {
  BitVec out;
  for (uint32_t j : indices) {
    if (j >= outcomes.size()) throw std::out_of_range("extract_raw: index out of range");
    out.push_back(outcomes.get(j));
  }
  return out;
}

}  // namespace qot::otcore
