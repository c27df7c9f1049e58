#include "lowsnr/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lowsnr/error.hpp"
#include "lowsnr/quadrature.hpp"

namespace lowsnr {

namespace {

// log f below this is treated as -infinity.
constexpr double kLogFloor = -1e4;
// A log-integral below this makes exp() vanish at every tolerance in use.
constexpr double kDivergentLogIntegral = -60.0;

void require_density(const FadingModel& model) {
  if (!model.has_density()) {
    throw Error(ErrorCode::NoDensity,
                "closed-form prediction needs an absolutely continuous spectrum (" + model.describe() + ")");
  }
}

// log1p(x) - x, accurate for small x >= 0.
double log1p_minus_x(double x) {
  if (x < 1e-3) {
    const double x2 = x * x;
    return x2 * (-0.5 + x * (1.0 / 3 + x * (-0.25 + x * (0.2 + x * (-1.0 / 6)))));
  }
  return std::log1p(x) - x;
}

double log_noisy_integral(const FadingModel& model, double rho) {
  return quad::integrate([&](double l) { return std::log1p(rho * model.density(l)); },
                         model.breakpoints())
      .value;
}

}  // namespace

PredictionResult noiseless_pred_error(const FadingModel& model) {
  require_density(model);
  const double log_int = quad::integrate(
                             [&](double l) {
                               const double f = model.density(l);
                               return f > 0.0 ? std::max(std::log(f), kLogFloor) : kLogFloor;
                             },
                             model.breakpoints())
                             .value;
  PredictionResult out;
  out.noise_variance = 0.0;
  out.method = PredictionMethod::ClosedForm;
  out.error = log_int < kDivergentLogIntegral ? 0.0 : std::min(1.0, std::exp(log_int));
  return out;
}

PredictionResult noisy_pred_error(const FadingModel& model, double noise_variance) {
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
    throw Error(ErrorCode::DomainError, "noisy prediction needs delta^2 > 0");
  }
  require_density(model);
  // exp{int log(f + d)} - d  ==  d * expm1(int log1p(f / d)).
  const double rho = 1.0 / noise_variance;
  const double log_int = log_noisy_integral(model, rho);
  PredictionResult out;
  out.noise_variance = noise_variance;
  out.method = PredictionMethod::ClosedForm;
  out.error = std::clamp(std::expm1(log_int) / rho, 0.0, 1.0);
  return out;
}

PredictionResult finite_past_pred_error(const FadingModel& model, double noise_variance,
                                        std::size_t n) {
  if (n == 0) throw Error(ErrorCode::DomainError, "past length must be >= 1");
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw Error(ErrorCode::DomainError, "delta^2 must be >= 0");
  }
  Eigen::MatrixXcd t = toeplitz_cov(model, n);
  t.diagonal().array() += noise_variance;
  Eigen::VectorXcd r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = model.autocorr(static_cast<long>(i + 1));

  PredictionResult out;
  out.noise_variance = noise_variance;
  out.method = PredictionMethod::FinitePast;
  out.past_length = n;

  double explained = 0.0;
  bool solved = false;
  if (noise_variance > 0.0) {
    Eigen::LLT<Eigen::MatrixXcd> llt(t);
    if (llt.info() == Eigen::Success) {
      explained = r.dot(llt.solve(r)).real();
      solved = true;
    }
  }
  if (!solved) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(t);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const Eigen::VectorXcd proj = es.eigenvectors().adjoint() * r;
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
      if (ev[k] < 1e-12) {
        out.regularized = true;
        continue;
      }
      explained += std::norm(proj[k]) / ev[k];
    }
  }
  out.error = std::clamp(1.0 - explained, 0.0, 1.0);
  return out;
}

PredictionResult predict(const PredictionQuery& query) {
  if (query.past_length) return finite_past_pred_error(query.model, query.noise_variance, *query.past_length);
  if (query.noise_variance == 0.0) return noiseless_pred_error(query.model);
  return noisy_pred_error(query.model, query.noise_variance);
}

double memory_ratio(const FadingModel& model, double rho) {
  if (!(rho > 0.0)) throw Error(ErrorCode::DomainError, "rho must be positive");
  require_density(model);
  // int log1p(rho f) = rho + J with J = int (log1p(rho f) - rho f), using int f = 1.
  const double j = quad::integrate([&](double l) { return log1p_minus_x(rho * model.density(l)); },
                                   model.breakpoints(), 1e-7 * rho * rho)
                       .value;
  const double u = rho + j;
  // rho - expm1(u) = -j - (expm1(u) - u)
  double em1_minus_u;
  if (std::abs(u) < 1e-3) {
    em1_minus_u = u * u * (0.5 + u * (1.0 / 6 + u * (1.0 / 24 + u * (1.0 / 120 + u / 720))));
  } else {
    em1_minus_u = std::expm1(u) - u;
  }
  return (-j - em1_minus_u) / (rho * rho);
}

PhiLimitEstimate phi_via_limit(const FadingModel& model, std::span<const double> rho_grid,
                               const PhiLimitOptions& opts) {
  require_density(model);
  if (model.density_square_integrable() != Verdict::Yes) {
    throw Error(ErrorCode::ConditionTwelveFails,
                "int f^2 verdict is '" + to_string(model.density_square_integrable()) + "' for " +
                    model.describe());
  }
  if (rho_grid.size() < 3) throw Error(ErrorCode::DomainError, "rho grid needs at least 3 points");
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    if (!(rho_grid[i] > 0.0 && rho_grid[i] <= 1.0) || (i > 0 && !(rho_grid[i] < rho_grid[i - 1]))) {
      throw Error(ErrorCode::DomainError, "rho grid must be strictly decreasing within (0, 1]");
    }
  }
  PhiLimitEstimate out;
  for (double rho : rho_grid) out.ratios.push_back(memory_ratio(model, rho));

  const std::size_t n = rho_grid.size();
  bool increasing = true;
  for (std::size_t i = 1; i < n; ++i) increasing = increasing && out.ratios[i] > out.ratios[i - 1];
  if (increasing && out.ratios.back() > opts.growth_bound) {
    throw Error(ErrorCode::NonConvergent, "memory ratio grows without bound as rho -> 0");
  }

  const double x0 = rho_grid[n - 3], x1 = rho_grid[n - 2], x2 = rho_grid[n - 1];
  const double y0 = out.ratios[n - 3], y1 = out.ratios[n - 2], y2 = out.ratios[n - 1];
  // Lagrange interpolants evaluated at rho = 0.
  const double quad = y0 * (x1 * x2) / ((x0 - x1) * (x0 - x2)) +
                      y1 * (x0 * x2) / ((x1 - x0) * (x1 - x2)) +
                      y2 * (x0 * x1) / ((x2 - x0) * (x2 - x1));
  const double lin = (y2 * x1 - y1 * x2) / (x1 - x2);
  out.phi = quad;
  out.spread = std::abs(quad - lin);
  return out;
}

}  // namespace lowsnr
