#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace couplab {

// Philox4x32-10 counter-based generator. Stateless: output depends only on
// (key, counter), so trajectory/step substreams are reproducible regardless
// of execution order.
namespace philox {

using Counter = std::array<uint32_t, 4>;
using Key = std::array<uint32_t, 2>;

Counter block(Counter ctr, Key key);

}  // namespace philox

// One noise substream, keyed by (seed, stream, trajectory). Each simulation
// step owns a disjoint counter range; normals(step, out) fills out with
// independent N(0,1) draws via Box-Muller on 53-bit uniforms.
class NoiseStream {
 public:
  NoiseStream(uint64_t seed, uint64_t stream, uint64_t trajectory);

  void normals(uint64_t step, std::span<double> out) const;
  double uniform(uint64_t step, uint32_t slot) const;  // (0,1]

 private:
  philox::Key key_;
};

uint64_t mix64(uint64_t z);  // splitmix64 finalizer

}  // namespace couplab
