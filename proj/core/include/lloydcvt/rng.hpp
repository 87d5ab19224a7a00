#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lloydcvt {

// Counter-based pseudo-random stream: output i is a pure function of
// (seed, stream, i), so adding draws to one stream never perturbs another
// and replay is exact across platforms. The kernel is the splitmix64
// finalizer over an affine counter walk.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(mix64(seed + 0x9e3779b97f4a7c15ULL) ^
             mix64(stream * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL)) {}

  std::uint64_t next_u64() noexcept {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix64(key_ ^ counter_);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; two counter increments per call,
  // no cached spare, so the draw count stays a pure function of the
  // call sequence.
  double normal() noexcept {
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double exponential(double rate) noexcept {
    double u = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    return -std::log(u) / rate;
  }

  std::uint64_t seed_key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stream tags. Purpose-keyed streams keep e.g. Monte Carlo integration
// draws independent from splitting draws under one user seed.
namespace streams {
constexpr std::uint64_t kSample = 0x01;
constexpr std::uint64_t kCellStats = 0x02;
constexpr std::uint64_t kSplit = 0x03;
constexpr std::uint64_t kInit = 0x04;
constexpr std::uint64_t kProbe = 0x05;
constexpr std::uint64_t kRadial = 0x06;
constexpr std::uint64_t kHessFd = 0x07;
constexpr std::uint64_t kTail = 0x08;

// Distinct sub-stream per restart / ladder level.
inline std::uint64_t sub(std::uint64_t tag, std::uint64_t index) noexcept {
  return tag + (index << 8);
}
}  // namespace streams

}  // namespace lloydcvt
