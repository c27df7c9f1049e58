#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace lowsnr {

/// Fixed stream labels; each component draws from its own derived seed so it
/// can be reproduced independently of the others.
namespace stream {
inline constexpr std::string_view kFading = "fading";
inline constexpr std::string_view kNoise = "noise";
inline constexpr std::string_view kBlock = "block";
inline constexpr std::string_view kSign = "sign";
inline constexpr std::string_view kMonteCarlo = "mi";
}  // namespace stream

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for stream `label` (and sub-stream `index`) under a 64-bit master seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0) noexcept;

/// mt19937_64 with platform-independent transforms (the std distributions
/// are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master, std::string_view label, std::uint64_t index = 0)
      : engine_(derive_seed(master, label, index)) {}

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) noexcept { return uniform() < p; }
  double sign() noexcept { return (engine_() >> 63) ? -1.0 : 1.0; }
  /// Circularly symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance = 1.0) noexcept;
  /// Real standard normal.
  double normal() noexcept;

 private:
  std::mt19937_64 engine_;
};

}  // namespace lowsnr
