#include "couplab/rng.hpp"

#include <cmath>

namespace couplab {

namespace philox {

namespace {

constexpr uint32_t kMul0 = 0xD2511F53u;
constexpr uint32_t kMul1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(Counter& x, const Key& k) {
  uint64_t p0 = uint64_t(kMul0) * x[0];
  uint64_t p1 = uint64_t(kMul1) * x[2];
  uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
  uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
  x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
}

}  // namespace

Counter block(Counter ctr, Key key) {
  for (int r = 0; r < 9; ++r) {
    round_once(ctr, key);
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  round_once(ctr, key);
  return ctr;
}

}  // namespace philox

uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

NoiseStream::NoiseStream(uint64_t seed, uint64_t stream, uint64_t trajectory) {
  uint64_t h = mix64(seed);
  h = mix64(h ^ stream);
  h = mix64(h ^ trajectory);
  key_ = {uint32_t(h), uint32_t(h >> 32)};
}

namespace {

// 53-bit uniform in (0,1] from two 32-bit words; never 0, so log() is safe.
inline double u53(uint32_t a, uint32_t b) {
  uint64_t v = (uint64_t(a >> 5) << 26) | uint64_t(b >> 6);
  return double(v + 1) * 0x1p-53;
}

}  // namespace

void NoiseStream::normals(uint64_t step, std::span<double> out) const {
  constexpr double two_pi = 6.283185307179586476925286766559;
  size_t i = 0;
  uint32_t blk = 0;
  while (i < out.size()) {
    philox::Counter c =
        philox::block({uint32_t(step), uint32_t(step >> 32), blk++, 0u}, key_);
    double u1 = u53(c[0], c[1]);
    double u2 = u53(c[2], c[3]);
    double rad = std::sqrt(-2.0 * std::log(u1));
    out[i++] = rad * std::cos(two_pi * u2);
    if (i < out.size()) out[i++] = rad * std::sin(two_pi * u2);
  }
}

double NoiseStream::uniform(uint64_t step, uint32_t slot) const {
  philox::Counter c = philox::block(
      {uint32_t(step), uint32_t(step >> 32), slot, 0x55555555u}, key_);
  return u53(c[0], c[1]);
}

}  // namespace couplab
