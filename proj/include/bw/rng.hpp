#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace bw {

/* Deterministic 64-bit generator (splitmix64 core).  Every randomized
   fixture in the library draws from one of these so that a seed fully
   determines all outputs, independent of platform or standard-library
   distribution internals. */
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /* Independent child stream; advances this stream by one draw. */
  SplitRng split() { return SplitRng(next_u64() ^ 0x6a09e667f3bcc909ULL); }

  /* Uniform in [0,1) with 53 random bits. */
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /* Standard normal via Box-Muller; two draws per variate, no cache. */
  double normal() {
    double u1 = uniform01(), u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /* Uniform integer in [lo, hi] inclusive. */
  int uniform_int(int lo, int hi) {
    return lo + int(uniform01() * double(hi - lo + 1));
  }

  /* Fisher-Yates permutation of {0,...,n-1}. */
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(p[i], p[uniform_int(0, i)]);
    return p;
  }

 private:
  std::uint64_t state_;
};

}  // namespace bw
