#pragma once

#include <complex>
#include <functional>
#include <span>

namespace lowsnr::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

inline constexpr double kDefaultAbsTol = 1e-10;

/// Adaptive Gauss-Kronrod integration of `f` over consecutive intervals of
/// `breakpoints` (sorted, at least two entries). Integrand discontinuities
/// must sit on breakpoints. Throws QuadratureFailure when the error estimate
/// exceeds `abs_tol` (scaled by the L1 norm for large integrands).
Result integrate(const std::function<double(double)>& f, std::span<const double> breakpoints,
                 double abs_tol = kDefaultAbsTol);

std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f,
                                       std::span<const double> breakpoints,
                                       double abs_tol = kDefaultAbsTol);

}  // namespace lowsnr::quad
