#include "lowsnr/spectra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "lowsnr/error.hpp"
#include "lowsnr/quadrature.hpp"

namespace lowsnr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::complex<double> kI{0.0, 1.0};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt_complex(std::complex<double> z) {
  if (z.imag() == 0.0) return fmt_num(z.real());
  std::string s = fmt_num(z.real());
  if (z.imag() >= 0.0) s += "+";
  return s + fmt_num(z.imag()) + "i";
}

// Five-point Gauss-Legendre nodes and weights on [-1, 1].
constexpr std::array<double, 5> kGlNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                         0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGlWeights{0.2369268850561891, 0.4786286704993665,
                                           0.5688888888888889, 0.4786286704993665,
                                           0.2369268850561891};

template <class F>
auto gauss5(F&& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  decltype(f(a)) acc{};
  for (std::size_t i = 0; i < kGlNodes.size(); ++i) acc += kGlWeights[i] * f(mid + half * kGlNodes[i]);
  return half * acc;
}

// int_{x0}^{x1} (linear from f0 to f1) * exp(i w x) dx
std::complex<double> linear_segment_fourier(double x0, double x1, double f0, double f1, double w) {
  const double h = x1 - x0;
  if (std::abs(w * h) < 0.5) {
    return gauss5(
        [&](double x) { return (f0 + (f1 - f0) * (x - x0) / h) * std::exp(kI * (w * x)); }, x0, x1);
  }
  const std::complex<double> e0 = std::exp(kI * (w * x0));
  const std::complex<double> e1 = std::exp(kI * (w * x1));
  const std::complex<double> iw = kI * w;
  const std::complex<double> i0 = (e1 - e0) / iw;
  const std::complex<double> i1 = h * e1 / iw - (e1 - e0) / (iw * iw);
  return f0 * i0 + (f1 - f0) / h * i1;
}

double table_interp(const params::TabulatedDensity& t, double lambda) {
  const auto& g = t.grid;
  if (lambda <= g.front()) return t.values.front();
  if (lambda >= g.back()) return t.values.back();
  const auto it = std::upper_bound(g.begin(), g.end(), lambda);
  const std::size_t j = static_cast<std::size_t>(it - g.begin());
  const double x0 = g[j - 1], x1 = g[j];
  const double w = (lambda - x0) / (x1 - x0);
  return (1.0 - w) * t.values[j - 1] + w * t.values[j];
}

double acf_table_density(const params::TabulatedAutocorr& t, double lambda) {
  double f = t.lags[0].real();
  for (std::size_t m = 1; m < t.lags.size(); ++m) {
    f += 2.0 * std::real(t.lags[m] * std::exp(-kI * (kTwoPi * static_cast<double>(m) * lambda)));
  }
  return f;
}

// Exact int g^2 for the piecewise-linear interpolant of (x[idx], y[idx]),
// divided by the squared mass of the same interpolant.
double subtable_square_integral(const params::TabulatedDensity& t, std::size_t stride) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < t.grid.size(); i += stride) idx.push_back(i);
  if (idx.back() != t.grid.size() - 1) idx.push_back(t.grid.size() - 1);
  double mass = 0.0, sq = 0.0;
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
    const double h = t.grid[idx[k + 1]] - t.grid[idx[k]];
    const double a = t.values[idx[k]], b = t.values[idx[k + 1]];
    mass += 0.5 * h * (a + b);
    sq += h * (a * a + a * b + b * b) / 3.0;
  }
  return sq / (mass * mass);
}

Verdict judge_refinement(const std::vector<double>& est) {
  for (double v : est) {
    if (!std::isfinite(v)) return Verdict::No;
  }
  const double d1 = est[1] - est[0];
  const double d3 = est[3] - est[2];
  if (std::abs(d3) <= 1e-10 * std::max(1.0, std::abs(est[3]))) return Verdict::Yes;
  if (std::abs(d3) <= 0.5 * std::abs(d1)) return Verdict::Yes;
  // Divergence factor between the coarsest and the finest estimate.
  constexpr double kDivergenceFactor = 4.0;
  if (est[3] > kDivergenceFactor * est[0]) return Verdict::No;
  if (d3 > 0.0 && std::abs(d3) >= std::abs(d1)) return Verdict::No;
  return Verdict::Undetermined;
}

void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Memoryless: return "memoryless";
    case ModelKind::AR1: return "ar1";
    case ModelKind::BandLimited: return "bandlimited";
    case ModelKind::TabulatedDensity: return "table";
    case ModelKind::TabulatedAutocorr: return "acf_table";
    case ModelKind::LinePlusResidual: return "line";
  }
  return "unknown";
}

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Yes: return "yes";
    case Verdict::No: return "no";
    case Verdict::Undetermined: return "undetermined";
  }
  return "undetermined";
}

FadingModel::FadingModel(ModelParams p) : params_(std::make_shared<const ModelParams>(std::move(p))) {
  finish();
}

void FadingModel::finish() {
  breakpoints_ = std::visit(
      Overloaded{
          [](const params::Memoryless&) { return std::vector<double>{-0.5, 0.5}; },
          [](const params::Ar1& p) {
            std::vector<double> b{-0.5, 0.5};
            if (std::abs(p.a) > 0.0) {
              // The peak has half-width about (1 - |a|) / (2 pi); refine around it.
              const double peak = std::arg(p.a) / kTwoPi;
              const double width = (1.0 - std::abs(p.a)) / kTwoPi;
              for (double k : {0.0, 1.0, -1.0, 8.0, -8.0, 64.0, -64.0}) {
                double x = peak + k * width;
                x -= std::floor(x + 0.5);  // wrap into [-1/2, 1/2)
                if (x > -0.5 && x < 0.5) b.push_back(x);
              }
              std::sort(b.begin(), b.end());
              b.erase(std::unique(b.begin(), b.end()), b.end());
            }
            return b;
          },
          [](const params::BandLimited& p) {
            if (p.cutoff >= 0.5) return std::vector<double>{-0.5, 0.5};
            return std::vector<double>{-0.5, -p.cutoff, p.cutoff, 0.5};
          },
          [](const params::TabulatedDensity& p) { return p.grid; },
          [](const params::TabulatedAutocorr& p) {
            const std::size_t panels = std::max<std::size_t>(2, 4 * p.lags.size());
            std::vector<double> b(panels + 1);
            for (std::size_t i = 0; i <= panels; ++i) b[i] = -0.5 + static_cast<double>(i) / panels;
            return b;
          },
          [](const params::LinePlusResidual& p) {
            return p.residual ? p.residual->breakpoints() : std::vector<double>{-0.5, 0.5};
          },
      },
      *params_);
  verdict_ = has_density_part() ? square_integrability(*this).verdict : Verdict::Undetermined;
}

FadingModel FadingModel::memoryless() { return FadingModel(params::Memoryless{}); }

FadingModel FadingModel::ar1(std::complex<double> a) {
  require(std::isfinite(a.real()) && std::isfinite(a.imag()) && std::abs(a) < 1.0,
          ErrorCode::ParamOutOfRange, "AR1 coefficient needs |a| < 1");
  return FadingModel(params::Ar1{a});
}

FadingModel FadingModel::band_limited(double cutoff) {
  require(cutoff > 0.0 && cutoff <= 0.5, ErrorCode::ParamOutOfRange,
          "band-limited cutoff lambda_c must lie in (0, 1/2]");
  return FadingModel(params::BandLimited{cutoff});
}

FadingModel FadingModel::tabulated_density(std::vector<double> grid, std::vector<double> values,
                                           const ModelOptions& opts) {
  require(grid.size() >= 2 && grid.size() == values.size(), ErrorCode::ParamOutOfRange,
          "density table needs at least two (lambda, value) rows");
  require(std::abs(grid.front() + 0.5) <= 1e-12 && std::abs(grid.back() - 0.5) <= 1e-12,
          ErrorCode::ParamOutOfRange, "density table grid must cover [-0.5, 0.5]");
  grid.front() = -0.5;
  grid.back() = 0.5;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    require(grid[i + 1] > grid[i], ErrorCode::ParamOutOfRange,
            "density table grid must be strictly increasing");
  }
  double mass = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(std::isfinite(values[i]) && values[i] >= 0.0, ErrorCode::ParamOutOfRange,
            "density table has a negative or non-finite sample");
    if (i + 1 < values.size()) mass += 0.5 * (grid[i + 1] - grid[i]) * (values[i] + values[i + 1]);
  }
  require(std::abs(mass - 1.0) <= opts.normalization_tol, ErrorCode::NotNormalized,
          "density table integrates to " + fmt_num(mass));
  for (double& v : values) v /= mass;
  return FadingModel(params::TabulatedDensity{std::move(grid), std::move(values)});
}

FadingModel FadingModel::tabulated_autocorr(std::vector<std::complex<double>> lags,
                                            const ModelOptions& opts) {
  require(!lags.empty(), ErrorCode::ParamOutOfRange, "autocorrelation table is empty");
  require(std::abs(lags[0].imag()) <= 1e-12 && lags[0].real() > 0.0, ErrorCode::ParamOutOfRange,
          "R(0) must be real and positive");
  require(std::abs(lags[0].real() - 1.0) <= opts.normalization_tol, ErrorCode::NotNormalized,
          "R(0) = " + fmt_num(lags[0].real()));
  const double r0 = lags[0].real();
  for (auto& r : lags) r /= r0;
  lags[0] = 1.0;
  params::TabulatedAutocorr t{std::move(lags)};
  const std::size_t probes = 64 * t.lags.size();
  for (std::size_t i = 0; i < probes; ++i) {
    const double lambda = -0.5 + static_cast<double>(i) / probes;
    require(acf_table_density(t, lambda) >= -1e-10, ErrorCode::ParamOutOfRange,
            "autocorrelation table is not positive semidefinite");
  }
  return FadingModel(std::move(t));
}

FadingModel FadingModel::line_plus_residual(std::vector<SpectralLine> lines,
                                            std::shared_ptr<const FadingModel> residual) {
  require(!lines.empty(), ErrorCode::ParamOutOfRange, "line model needs at least one line");
  double total = 0.0;
  for (const auto& l : lines) {
    require(l.mass > 0.0 && std::isfinite(l.mass), ErrorCode::ParamOutOfRange,
            "spectral line masses must be positive");
    require(l.location >= -0.5 && l.location < 0.5, ErrorCode::ParamOutOfRange,
            "spectral line location must lie in [-1/2, 1/2)");
    total += l.mass;
  }
  require(total <= 1.0 + 1e-12, ErrorCode::ParamOutOfRange,
          "spectral line masses sum to " + fmt_num(total) + " > 1");
  if (total >= 1.0 - 1e-12) {
    residual.reset();
  } else {
    require(residual != nullptr, ErrorCode::ParamOutOfRange,
            "line masses sum below one, a residual law is required");
    require(residual->kind() != ModelKind::LinePlusResidual, ErrorCode::ParamOutOfRange,
            "residual law must have a density");
  }
  return FadingModel(params::LinePlusResidual{std::move(lines), std::move(residual)});
}

FadingModel FadingModel::constant() { return line_plus_residual({{0.0, 1.0}}, nullptr); }

FadingModel make_model(ModelParams p, const ModelOptions& opts) {
  return std::visit(
      Overloaded{
          [](params::Memoryless) { return FadingModel::memoryless(); },
          [](params::Ar1 q) { return FadingModel::ar1(q.a); },
          [](params::BandLimited q) { return FadingModel::band_limited(q.cutoff); },
          [&](params::TabulatedDensity q) {
            return FadingModel::tabulated_density(std::move(q.grid), std::move(q.values), opts);
          },
          [&](params::TabulatedAutocorr q) {
            return FadingModel::tabulated_autocorr(std::move(q.lags), opts);
          },
          [](params::LinePlusResidual q) {
            return FadingModel::line_plus_residual(std::move(q.lines), std::move(q.residual));
          },
      },
      std::move(p));
}

ModelKind FadingModel::kind() const { return static_cast<ModelKind>(params_->index()); }

bool FadingModel::has_density() const { return kind() != ModelKind::LinePlusResidual; }

bool FadingModel::has_density_part() const {
  if (const auto* p = std::get_if<params::LinePlusResidual>(params_.get())) return p->residual != nullptr;
  return true;
}

std::span<const SpectralLine> FadingModel::lines() const {
  if (const auto* p = std::get_if<params::LinePlusResidual>(params_.get())) return p->lines;
  return {};
}

double FadingModel::line_mass() const {
  double total = 0.0;
  for (const auto& l : lines()) total += l.mass;
  return std::min(total, 1.0);
}

double FadingModel::density_weight() const { return has_density_part() ? 1.0 - line_mass() : 0.0; }

std::complex<double> FadingModel::autocorr(long m) const {
  return std::visit(
      Overloaded{
          [m](const params::Memoryless&) { return std::complex<double>(m == 0 ? 1.0 : 0.0); },
          [m](const params::Ar1& p) {
            if (m == 0) return std::complex<double>(1.0);
            const std::complex<double> r = std::pow(p.a, static_cast<int>(std::abs(m)));
            return m > 0 ? r : std::conj(r);
          },
          [m](const params::BandLimited& p) {
            if (m == 0) return std::complex<double>(1.0);
            const double x = kTwoPi * p.cutoff * static_cast<double>(m);
            return std::complex<double>(std::sin(x) / x);
          },
          [m](const params::TabulatedDensity& p) {
            if (m == 0) return std::complex<double>(1.0);
            const double w = kTwoPi * static_cast<double>(std::abs(m));
            std::complex<double> acc{};
            for (std::size_t i = 0; i + 1 < p.grid.size(); ++i) {
              acc += linear_segment_fourier(p.grid[i], p.grid[i + 1], p.values[i], p.values[i + 1], w);
            }
            return m > 0 ? acc : std::conj(acc);
          },
          [m](const params::TabulatedAutocorr& p) {
            const auto k = static_cast<std::size_t>(std::abs(m));
            if (k >= p.lags.size()) return std::complex<double>(0.0);
            return m >= 0 ? p.lags[k] : std::conj(p.lags[k]);
          },
          [m](const params::LinePlusResidual& p) {
            std::complex<double> r{};
            double total = 0.0;
            for (const auto& l : p.lines) {
              r += l.mass * std::exp(kI * (kTwoPi * static_cast<double>(m) * l.location));
              total += l.mass;
            }
            if (p.residual) r += (1.0 - total) * p.residual->autocorr(m);
            return r;
          },
      },
      *params_);
}

double FadingModel::density(double lambda) const {
  return std::visit(
      Overloaded{
          [](const params::Memoryless&) { return 1.0; },
          [lambda](const params::Ar1& p) {
            // |1 - a e^{-i theta}|^2 = (1 - r)^2 + 4 r sin^2((theta - arg a) / 2), free of cancellation.
            const double r = std::abs(p.a);
            const double s = std::sin(0.5 * (kTwoPi * lambda - std::arg(p.a)));
            return (1.0 - r) * (1.0 + r) / ((1.0 - r) * (1.0 - r) + 4.0 * r * s * s);
          },
          [lambda](const params::BandLimited& p) {
            return std::abs(lambda) <= p.cutoff ? 1.0 / (2.0 * p.cutoff) : 0.0;
          },
          [lambda](const params::TabulatedDensity& p) { return table_interp(p, lambda); },
          [lambda](const params::TabulatedAutocorr& p) {
            return std::max(0.0, acf_table_density(p, lambda));
          },
          [lambda](const params::LinePlusResidual& p) -> double {
            if (!p.residual) throw Error(ErrorCode::NoDensity, "purely atomic spectrum has no density");
            double total = 0.0;
            for (const auto& l : p.lines) total += l.mass;
            return (1.0 - total) * p.residual->density(lambda);
          },
      },
      *params_);
}

std::string FadingModel::describe() const {
  return std::visit(
      Overloaded{
          [](const params::Memoryless&) { return std::string("memoryless"); },
          [](const params::Ar1& p) { return "ar1:a=" + fmt_complex(p.a); },
          [](const params::BandLimited& p) { return "bandlimited:lambda_c=" + fmt_num(p.cutoff); },
          [](const params::TabulatedDensity& p) {
            return "table:points=" + std::to_string(p.grid.size());
          },
          [](const params::TabulatedAutocorr& p) {
            return "acf_table:lags=" + std::to_string(p.lags.size());
          },
          [](const params::LinePlusResidual& p) {
            std::string s = "line:";
            for (std::size_t i = 0; i < p.lines.size(); ++i) {
              if (i) s += ";";
              s += "mass=" + fmt_num(p.lines[i].mass) + "@" + fmt_num(p.lines[i].location);
            }
            s += ";residual=" + (p.residual ? p.residual->describe() : std::string("none"));
            return s;
          },
      },
      *params_);
}

Eigen::MatrixXcd toeplitz_cov(const FadingModel& model, std::size_t n, std::size_t cap) {
  if (n == 0) throw Error(ErrorCode::DomainError, "toeplitz_cov needs n >= 1");
  if (n > cap) {
    throw Error(ErrorCode::DimensionTooLarge,
                "n = " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
  }
  std::vector<std::complex<double>> r(n);
  for (std::size_t m = 0; m < n; ++m) r[m] = model.autocorr(static_cast<long>(m));
  Eigen::MatrixXcd t(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      t(i, j) = i >= j ? r[i - j] : std::conj(r[j - i]);
    }
  }
  return t;
}

SquareIntegrability square_integrability(const FadingModel& model) {
  SquareIntegrability out;
  if (!model.has_density_part()) return out;
  if (const auto* t = std::get_if<params::TabulatedDensity>(&model.params())) {
    // Coarsen the table by 8, 4, 2, 1: the finest level is the table itself.
    if (t->grid.size() < 17) return out;
    for (std::size_t stride : {8u, 4u, 2u, 1u}) out.estimates.push_back(subtable_square_integral(*t, stride));
  } else {
    const double w = model.density_weight();
    const auto& bp = model.breakpoints();
    for (int level = 0; level < 4; ++level) {
      const int panels = 8 << level;
      double acc = 0.0;
      for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        const double h = (bp[i + 1] - bp[i]) / panels;
        for (int k = 0; k < panels; ++k) {
          const double a = bp[i] + k * h;
          acc += gauss5([&](double x) { const double f = model.density(x); return f * f; }, a, a + h);
        }
      }
      // Estimates refer to the normalized density part.
      out.estimates.push_back(acc / (w * w));
    }
  }
  out.verdict = judge_refinement(out.estimates);
  return out;
}

double density_mass(const FadingModel& model) {
  if (!model.has_density_part()) return 0.0;
  return quad::integrate([&](double x) { return model.density(x); }, model.breakpoints()).value;
}

ValidationReport validate(const FadingModel& model) {
  ValidationReport rep;
  rep.has_density = model.has_density();
  rep.spectral_line = !model.lines().empty();
  rep.line_mass = model.line_mass();
  rep.density_mass = density_mass(model);
  const double total = rep.density_mass + rep.line_mass;
  rep.unit_mass_ok = std::abs(total - 1.0) <= 1e-8;
  if (!rep.unit_mass_ok) rep.failures.push_back("total spectral mass " + fmt_num(total) + " != 1");
  if (std::abs(model.autocorr(0) - 1.0) > 1e-10) rep.failures.push_back("R(0) != 1");

  rep.min_eigenvalue = 1.0;
  for (std::size_t n = 1; n <= 64; n *= 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(toeplitz_cov(model, n), Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, es.eigenvalues().minCoeff());
  }
  rep.psd_ok = rep.min_eigenvalue >= -1e-9;
  if (!rep.psd_ok) rep.failures.push_back("Toeplitz covariance not PSD");

  if (model.has_density_part()) {
    const auto sq = square_integrability(model);
    rep.square_integrable = sq.verdict;
    rep.square_integral_estimates = sq.estimates;
  }
  return rep;
}

}  // namespace lowsnr
