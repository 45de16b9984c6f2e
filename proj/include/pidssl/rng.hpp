#ifndef PIDSSL_RNG_HPP
#define PIDSSL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace pidssl {

// Stream tags used when deriving substreams. Every random draw in the
// project flows from one master seed through Rng::stream, so parallel and
// serial execution see identical values.
enum StreamTag : std::uint64_t {
  kStreamInit = 1,     // parameter initialization
  kStreamShuffle = 2,  // epoch permutations
  kStreamAugment = 3,  // per-sample view generation
  kStreamGaussTarget = 4,
  kStreamSynth = 5,    // synthetic dataset
  kStreamProbe = 6,
  kStreamDiag = 7,
  kStreamTest = 8,     // reserved for test fixtures
};

// SplitMix64-based generator. Not cryptographic; chosen for exact
// reproducibility across platforms (no libstdc++ distribution calls).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Derive an independent stream from a seed plus a path of words,
  // e.g. Rng::stream({seed, kStreamAugment, phase, epoch, sample}).
  static Rng stream(std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = 0x9e3779b97f4a7c15ULL;
    for (std::uint64_t w : path) {
      s ^= w + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
      s = scramble(s);
    }
    return Rng(s);
  }

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return scramble(state_);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller. The sine partner is discarded so each
  // call consumes exactly two uniforms.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Uniform integer in [0, n) via multiply-high; avoids modulo bias paths
  // that differ between standard libraries.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Fisher-Yates permutation of 0..n-1.
  std::vector<std::uint32_t> permutation(std::uint32_t n) {
    std::vector<std::uint32_t> p(n);
    for (std::uint32_t i = 0; i < n; ++i) p[i] = i;
    for (std::uint32_t i = n; i > 1; --i) {
      std::uint32_t j = static_cast<std::uint32_t>(below(i));
      std::uint32_t tmp = p[i - 1];
      p[i - 1] = p[j];
      p[j] = tmp;
    }
    return p;
  }

 private:
  static std::uint64_t scramble(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace pidssl

#endif
