#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lowsnr/spectra.hpp"

namespace lowsnr {

/// One-step prediction of H_0 from its past observed through IID
/// N_C(0, delta^2) noise.
struct PredictionQuery {
  FadingModel model;
  double noise_variance = 0.0;             // delta^2 >= 0
  std::optional<std::size_t> past_length;  // nullopt = infinite past
};

enum class PredictionMethod { ClosedForm, FinitePast };

struct PredictionResult {
  double error = 1.0;  // epsilon^2 in [0, 1]
  double noise_variance = 0.0;
  PredictionMethod method = PredictionMethod::ClosedForm;
  std::optional<std::size_t> past_length;
  /// Set when near-zero eigenvalues were clipped in the finite-past solve.
  bool regularized = false;
};

/// exp{ int log f }; 0 when the log-integral diverges to -infinity.
PredictionResult noiseless_pred_error(const FadingModel& model);

/// exp{ int log(f + delta^2) } - delta^2 for delta^2 > 0.
PredictionResult noisy_pred_error(const FadingModel& model, double noise_variance);

/// Linear MMSE 1 - r^H (T_n + delta^2 I)^{-1} r from n noisy past samples.
PredictionResult finite_past_pred_error(const FadingModel& model, double noise_variance,
                                        std::size_t n);

/// Routes a query: finite past to the Toeplitz solve, infinite past to the
/// closed forms (delta^2 = 0 uses the noiseless formula).
PredictionResult predict(const PredictionQuery& query);

/// (1 - eps^2(1/rho)) / rho, evaluated without the catastrophic cancellation
/// of the literal formula at small rho.
double memory_ratio(const FadingModel& model, double rho);

struct PhiLimitOptions {
  /// Ratios growing monotonically past this bound are reported as divergent.
  double growth_bound = 1e6;
};

struct PhiLimitEstimate {
  double phi = 0.0;
  /// |quadratic - linear| extrapolant at rho = 0; the trust signal.
  double spread = 0.0;
  std::vector<double> ratios;
};

/// Extrapolates memory_ratio to rho -> 0 with a quadratic through the last
/// three grid points. `rho_grid` must be strictly decreasing in (0, 1].
PhiLimitEstimate phi_via_limit(const FadingModel& model, std::span<const double> rho_grid,
                               const PhiLimitOptions& opts = {});

}  // namespace lowsnr
