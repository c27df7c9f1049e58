#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "lowsnr/spectra.hpp"

namespace lowsnr {

enum class MemoryRegime { QuicklyForgetting, SlowlyForgetting, SpectralLine };

std::string to_string(MemoryRegime regime);

/// Low-SNR capacity asymptote of the peak-limited non-coherent channel.
struct CapacityAsymptote {
  MemoryRegime regime = MemoryRegime::QuicklyForgetting;
  std::optional<double> phi;
  std::optional<double> kappa;         // lim C / SNR^2 (density laws)
  std::optional<double> alpha_star;    // optimal duty cycle (density laws)
  std::optional<double> linear_slope;  // lim C / SNR (spectral lines): sum of jumps
  std::optional<double> phi_series_value;
};

/// phi = (1/2) int f^2 - 1/2.
double phi_integral(const FadingModel& model);

struct PhiSeriesOptions {
  /// Truncation error bound when the model supplies a tail bound; otherwise
  /// terms below 1e-3 * tol * partial sum count as stagnant.
  double tol = 1e-7;
  /// Partial sums past this ceiling without stagnating are reported as divergent.
  double ceiling = 1e4;
  std::size_t max_terms = 100'000'000;
  /// Consecutive small terms required by the stagnation test.
  std::size_t stagnation_run = 20;
};

/// phi = sum_{v >= 1} |R(v)|^2, truncated by a model tail bound when one is
/// known, otherwise by a stagnation test.
double phi_series(const FadingModel& model, const PhiSeriesOptions& opts = {});

/// Branch formulas as functions of phi alone.
double kappa_of_phi(double phi);
double alpha_star_of_phi(double phi);
MemoryRegime regime_of_phi(double phi);

/// Density laws: phi by integral, cross-checked against the series within
/// 1e-6. Laws with spectral lines: regime SpectralLine with the line mass as slope.
CapacityAsymptote capacity_asymptote(const FadingModel& model);

/// Coefficient of SNR^2 in the upper bound: (alpha - alpha^2)/2 + phi alpha.
double upper_bound_g(double phi, double alpha);

/// S(b) = sum_{i != j <= b} |R(i - j)|^2 via S(b+1) = S(b) + 2 sum_{eta <= b} |R(eta)|^2.
double s_of_b(const FadingModel& model, std::size_t b);
/// Same quantity by the literal double sum; O(b^2).
double s_of_b_double_sum(const FadingModel& model, std::size_t b);

/// Per-symbol second-order coefficient of the block on-off scheme:
/// (alpha - alpha^2 + alpha S(b)/b) / 2.
double block_coefficient(const FadingModel& model, std::size_t b, double alpha);
/// Same expansion for IID on-off inputs: (alpha - alpha^2 + alpha^2 S(b)/b) / 2.
double iid_coefficient(const FadingModel& model, std::size_t b, double alpha);

/// Closed forms in terms of the memory sum ratio s = S(b)/b (s = 2 phi as b -> infinity).
double block_coefficient_from_ratio(double s_over_b, double alpha);
double iid_coefficient_from_ratio(double s_over_b, double alpha);

struct AlphaMaximum {
  double alpha = 0.0;
  double value = 0.0;
};

/// Maximizes a quadratic-in-alpha objective over [0, 1] on a 1e-4 grid plus
/// the closed-form candidates {phi + 1/2, 1, 1/(2(1 - 2 phi))} (clamped).
template <class Objective>
AlphaMaximum maximize_alpha(Objective&& objective, double phi);

/// Second-order comparison of the block scheme and IID on-off inputs in the
/// b -> infinity limit.
struct IidGap {
  AlphaMaximum block;  // equals kappa with alpha = alpha_star
  AlphaMaximum iid;
  double gap = 0.0;
};
IidGap iid_gap(double phi);

// ---------------------------------------------------------------------------

template <class Objective>
AlphaMaximum maximize_alpha(Objective&& objective, double phi) {
  AlphaMaximum best{0.0, objective(0.0)};
  auto consider = [&](double a) {
    a = a < 0.0 ? 0.0 : (a > 1.0 ? 1.0 : a);
    const double v = objective(a);
    if (v > best.value) best = {a, v};
  };
  constexpr int kSteps = 10000;
  for (int i = 0; i <= kSteps; ++i) consider(static_cast<double>(i) / kSteps);
  consider(phi + 0.5);
  consider(1.0);
  if (phi < 0.5) consider(1.0 / (2.0 * (1.0 - 2.0 * phi)));
  return best;
}

}  // namespace lowsnr
