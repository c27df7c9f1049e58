#include "lowsnr/quadrature.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lowsnr/error.hpp"

namespace lowsnr::quad {

namespace {

constexpr unsigned kMaxDepth = 18;

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

Result integrate(const std::function<double(double)>& f, std::span<const double> breakpoints,
                 double abs_tol) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  if (breakpoints.size() < 2) {
    throw Error(ErrorCode::DomainError, "quadrature needs at least two breakpoints");
  }
  Result total;
  double l1_total = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i];
    const double b = breakpoints[i + 1];
    if (!(b > a)) continue;
    double err = 0.0;
    double l1 = 0.0;
    // Boost's tolerance is relative to the L1 norm of the integrand.
    const double v = GK::integrate(f, a, b, kMaxDepth, 1e-10, &err, &l1);
    total.value += v;
    total.error += err;
    l1_total += l1;
  }
  if (!std::isfinite(total.value) || total.error > std::max(abs_tol, 1e-9 * l1_total)) {
    throw Error(ErrorCode::QuadratureFailure,
                "error estimate " + fmt_g(total.error) + " exceeds tolerance " + fmt_g(std::max(abs_tol, 1e-9 * l1_total)));
  }
  return total;
}

std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f,
                                       std::span<const double> breakpoints, double abs_tol) {
  const Result re = integrate([&](double x) { return f(x).real(); }, breakpoints, abs_tol);
  const Result im = integrate([&](double x) { return f(x).imag(); }, breakpoints, abs_tol);
  return {re.value, im.value};
}

}  // namespace lowsnr::quad
