#include "lowsnr/rng.hpp"

#include <cmath>
#include <numbers>

namespace lowsnr {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(master ^ splitmix64(h + splitmix64(index)));
}

std::complex<double> Rng::complex_normal(double variance) noexcept {
  // |z|^2 ~ Exp(variance), phase uniform.
  const double u = 1.0 - uniform();
  const double r = std::sqrt(-variance * std::log(u));
  const double theta = 2.0 * std::numbers::pi * uniform();
  return std::polar(r, theta);
}

double Rng::normal() noexcept {
  const double u = 1.0 - uniform();
  const double theta = 2.0 * std::numbers::pi * uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(theta);
}

}  // namespace lowsnr
