#ifndef CTGIBBS_RNG_HPP
#define CTGIBBS_RNG_HPP

#include <cmath>
#include <cstdint>

namespace ctgibbs {

// SplitMix64 finaliser.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/*
 * Counter-based generator: output k of stream (seed, stream) is a pure
 * function mix64-chain(seed, stream, k). Streams never share state, so
 * ensembles sharded by path index produce identical draws no matter how
 * the work is scheduled across threads.
 */
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix64(seed ^ mix64(stream ^ 0x5851f42d4c957f2dULL))) {}

  static CounterRng for_path(std::uint64_t seed, std::uint64_t path_index) {
    return CounterRng(seed, path_index + 1);
  }

  std::uint64_t next_u64() { return mix64(key_ ^ mix64(++counter_)); }

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ctgibbs

#endif  // CTGIBBS_RNG_HPP
