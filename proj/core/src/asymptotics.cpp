#include "lowsnr/asymptotics.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <variant>

#include "lowsnr/error.hpp"
#include "lowsnr/quadrature.hpp"

namespace lowsnr {

namespace {

struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

void require_square_integrable(const FadingModel& model) {
  if (!model.has_density()) {
    throw Error(ErrorCode::NoDensity, "phi is undefined for spectra with lines (" + model.describe() + ")");
  }
  if (model.density_square_integrable() != Verdict::Yes) {
    throw Error(ErrorCode::ConditionTwelveFails,
                "int f^2 verdict is '" + to_string(model.density_square_integrable()) + "' for " +
                    model.describe());
  }
}

void require_alpha(std::size_t b, double alpha) {
  if (b == 0) throw Error(ErrorCode::DomainError, "block length must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::DomainError, "alpha must lie in [0, 1]");
}

}  // namespace

std::string to_string(MemoryRegime regime) {
  switch (regime) {
    case MemoryRegime::QuicklyForgetting: return "quickly_forgetting";
    case MemoryRegime::SlowlyForgetting: return "slowly_forgetting";
    case MemoryRegime::SpectralLine: return "spectral_line";
  }
  return "unknown";
}

double phi_integral(const FadingModel& model) {
  require_square_integrable(model);
  double square = 0.0;
  if (const auto* t = std::get_if<params::TabulatedDensity>(&model.params())) {
    // Exact for the piecewise-linear interpolant.
    for (std::size_t i = 0; i + 1 < t->grid.size(); ++i) {
      const double h = t->grid[i + 1] - t->grid[i];
      const double a = t->values[i], b = t->values[i + 1];
      square += h * (a * a + a * b + b * b) / 3.0;
    }
  } else {
    square = quad::integrate([&](double l) { const double f = model.density(l); return f * f; },
                             model.breakpoints())
                 .value;
  }
  return std::max(0.0, 0.5 * square - 0.5);
}

double phi_series(const FadingModel& model, const PhiSeriesOptions& opts) {
  if (!(opts.tol > 0.0)) throw Error(ErrorCode::DomainError, "series tolerance must be positive");

  // Model-supplied bound on sum_{v > n} |R(v)|^2, when one is known.
  std::function<double(std::size_t)> tail_bound;
  switch (model.kind()) {
    case ModelKind::Memoryless:
      return 0.0;
    case ModelKind::TabulatedAutocorr: {
      const auto& lags = std::get<params::TabulatedAutocorr>(model.params()).lags;
      NeumaierSum s;
      for (std::size_t m = 1; m < lags.size(); ++m) s.add(std::norm(lags[m]));
      return s.value();
    }
    case ModelKind::AR1: {
      const double a2 = std::norm(std::get<params::Ar1>(model.params()).a);
      tail_bound = [a2](std::size_t n) { return std::pow(a2, static_cast<double>(n + 1)) / (1.0 - a2); };
      break;
    }
    case ModelKind::BandLimited: {
      const double c = std::get<params::BandLimited>(model.params()).cutoff;
      const double k = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi * c * c);
      tail_bound = [k](std::size_t n) { return n == 0 ? HUGE_VAL : k / static_cast<double>(n); };
      break;
    }
    default:
      break;
  }

  NeumaierSum s;
  std::size_t small_run = 0;
  for (std::size_t v = 1; v <= opts.max_terms; ++v) {
    const double term = std::norm(model.autocorr(static_cast<long>(v)));
    s.add(term);
    const double partial = s.value();
    if (tail_bound) {
      if (tail_bound(v) < opts.tol) return partial;
      continue;
    }
    if (partial > opts.ceiling) {
      throw Error(ErrorCode::Diverges,
                  "partial sums of |R(v)|^2 exceed " + std::to_string(opts.ceiling) + " for " + model.describe());
    }
    // Stagnation: consecutive terms negligible against the partial sum.
    small_run = term < 1e-3 * opts.tol * std::max(partial, 1e-300) || term == 0.0 ? small_run + 1 : 0;
    if (small_run >= opts.stagnation_run) return partial;
  }
  throw Error(ErrorCode::NonConvergent, "series did not settle within max_terms");
}

double kappa_of_phi(double phi) {
  if (phi < 0.5) return (2.0 * phi + 1.0) * (2.0 * phi + 1.0) / 8.0;
  return phi;
}

double alpha_star_of_phi(double phi) { return phi < 0.5 ? phi + 0.5 : 1.0; }

MemoryRegime regime_of_phi(double phi) {
  return phi >= 0.5 ? MemoryRegime::SlowlyForgetting : MemoryRegime::QuicklyForgetting;
}

CapacityAsymptote capacity_asymptote(const FadingModel& model) {
  CapacityAsymptote out;
  if (!model.lines().empty()) {
    out.regime = MemoryRegime::SpectralLine;
    out.linear_slope = model.line_mass();
    return out;
  }
  const double phi = phi_integral(model);
  const double series = phi_series(model);
  if (std::abs(phi - series) > 1e-6) {
    throw Error(ErrorCode::CrossCheckFailed, "phi integral " + std::to_string(phi) + " vs series " +
                                                 std::to_string(series) + " for " + model.describe());
  }
  out.phi = phi;
  out.phi_series_value = series;
  out.regime = regime_of_phi(phi);
  out.kappa = kappa_of_phi(phi);
  out.alpha_star = alpha_star_of_phi(phi);
  return out;
}

double upper_bound_g(double phi, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::DomainError, "alpha must lie in [0, 1]");
  if (!(phi >= 0.0)) throw Error(ErrorCode::DomainError, "phi must be non-negative");
  return 0.5 * (alpha - alpha * alpha) + phi * alpha;
}

double s_of_b(const FadingModel& model, std::size_t b) {
  if (b == 0) throw Error(ErrorCode::DomainError, "block length must be >= 1");
  double s = 0.0;
  double partial = 0.0;  // sum_{eta=1}^{k} |R(eta)|^2
  for (std::size_t k = 1; k < b; ++k) {
    partial += std::norm(model.autocorr(static_cast<long>(k)));
    s += 2.0 * partial;
  }
  return s;
}

double s_of_b_double_sum(const FadingModel& model, std::size_t b) {
  if (b == 0) throw Error(ErrorCode::DomainError, "block length must be >= 1");
  double s = 0.0;
  for (std::size_t i = 1; i <= b; ++i) {
    for (std::size_t j = 1; j <= b; ++j) {
      if (i == j) continue;
      s += std::norm(model.autocorr(static_cast<long>(i) - static_cast<long>(j)));
    }
  }
  return s;
}

double block_coefficient_from_ratio(double s_over_b, double alpha) {
  return 0.5 * (alpha - alpha * alpha + alpha * s_over_b);
}

double iid_coefficient_from_ratio(double s_over_b, double alpha) {
  return 0.5 * (alpha - alpha * alpha + alpha * alpha * s_over_b);
}

double block_coefficient(const FadingModel& model, std::size_t b, double alpha) {
  require_alpha(b, alpha);
  return block_coefficient_from_ratio(s_of_b(model, b) / static_cast<double>(b), alpha);
}

double iid_coefficient(const FadingModel& model, std::size_t b, double alpha) {
  require_alpha(b, alpha);
  return iid_coefficient_from_ratio(s_of_b(model, b) / static_cast<double>(b), alpha);
}

IidGap iid_gap(double phi) {
  if (!(phi >= 0.0)) throw Error(ErrorCode::DomainError, "phi must be non-negative");
  IidGap out;
  out.block = maximize_alpha([phi](double a) { return upper_bound_g(phi, a); }, phi);
  out.iid = maximize_alpha([phi](double a) { return iid_coefficient_from_ratio(2.0 * phi, a); }, phi);
  out.gap = out.block.value - out.iid.value;
  return out;
}

}  // namespace lowsnr
