#include "qot/wire.hpp"

namespace qot::wire {

void put_index_set(std::vector<uint8_t>& out, const std::vector<uint32_t>& sorted) {
  put_u32(out, uint32_t(sorted.size()));
  uint32_t prev = 0;
  bool first = true;
  for (uint32_t v : sorted) {
    if (!first && v <= prev) throw std::invalid_argument("index set not strictly ascending");
    put_u32(out, first ? v : v - prev);
    prev = v;
    first = false;
  }
}

std::vector<uint32_t> get_index_set(Reader& r) {
  uint32_t n = r.u32();
  std::vector<uint32_t> out;
  out.reserve(n);
  uint64_t prev = 0;
  for (uint32_t i = 0; i < n; ++i) {
    uint32_t gap = r.u32();
    uint64_t v = i == 0 ? gap : prev + gap;
    if (i != 0 && gap == 0) throw DecodeError("zero gap in index set");
    if (v > 0xFFFFFFFFull) throw DecodeError("index set overflow");
    out.push_back(uint32_t(v));
    prev = v;
  }
  return out;
}

}  // namespace qot::wire
