#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace lowsnr {

/// Fading laws on the unit-variance circularly symmetric Gaussian family.
///
/// A law is given by its autocorrelation R(m) = E[H_{k+m} H_k^*] and its
/// spectral distribution on [-1/2, 1/2): an absolutely continuous part with
/// density f plus a finite set of spectral lines (jumps).  R(m) is the m-th
/// Fourier coefficient of that measure, R(m) = int e^{i 2 pi m lambda} dF.

enum class ModelKind { Memoryless, AR1, BandLimited, TabulatedDensity, TabulatedAutocorr, LinePlusResidual };

/// Numerical verdict on whether int f^2 is finite. A heuristic, never a proof.
enum class Verdict { Yes, No, Undetermined };

std::string to_string(ModelKind kind);
std::string to_string(Verdict verdict);

struct SpectralLine {
  double location = 0.0;  // in [-1/2, 1/2)
  double mass = 0.0;      // > 0
};

class FadingModel;

namespace params {

struct Memoryless {};

struct Ar1 {
  std::complex<double> a;
};

struct BandLimited {
  double cutoff = 0.5;  // lambda_c in (0, 1/2]
};

/// Density samples on a strictly increasing grid from -1/2 to 1/2,
/// interpolated piecewise-linearly.
struct TabulatedDensity {
  std::vector<double> grid;
  std::vector<double> values;
};

/// Autocorrelation lags R(0), ..., R(M); R(m) = 0 for |m| > M.
struct TabulatedAutocorr {
  std::vector<std::complex<double>> lags;
};

/// Spectral lines plus a residual law carrying weight 1 - sum(mass).
/// `residual` may be null only when the line masses sum to one.
struct LinePlusResidual {
  std::vector<SpectralLine> lines;
  std::shared_ptr<const FadingModel> residual;
};

}  // namespace params

using ModelParams = std::variant<params::Memoryless, params::Ar1, params::BandLimited,
                                 params::TabulatedDensity, params::TabulatedAutocorr,
                                 params::LinePlusResidual>;

struct ModelOptions {
  /// Relative mass error tolerated (then renormalized) for tabulated inputs.
  double normalization_tol = 1e-4;
};

/// Immutable, validated fading law. Cheap to copy.
class FadingModel {
 public:
  static FadingModel memoryless();
  static FadingModel ar1(std::complex<double> a);
  static FadingModel band_limited(double cutoff);
  static FadingModel tabulated_density(std::vector<double> grid, std::vector<double> values,
                                       const ModelOptions& opts = {});
  static FadingModel tabulated_autocorr(std::vector<std::complex<double>> lags,
                                        const ModelOptions& opts = {});
  /// Pass a null residual for a purely atomic spectrum.
  static FadingModel line_plus_residual(std::vector<SpectralLine> lines,
                                        std::shared_ptr<const FadingModel> residual);
  /// Unit-mass spectral line at lambda = 0: H_k = H for all k.
  static FadingModel constant();

  ModelKind kind() const;
  const ModelParams& params() const { return *params_; }

  /// True iff the spectral distribution is absolutely continuous.
  bool has_density() const;
  /// True iff a non-trivial absolutely continuous part exists.
  bool has_density_part() const;
  Verdict density_square_integrable() const { return verdict_; }

  std::complex<double> autocorr(long m) const;
  /// Absolutely continuous part F'(lambda); spectral lines are excluded.
  /// Throws NoDensity for purely atomic laws.
  double density(double lambda) const;

  std::span<const SpectralLine> lines() const;
  double line_mass() const;
  /// Weight of the absolutely continuous part, 1 - line_mass().
  double density_weight() const;

  /// Sorted points in [-1/2, 1/2] (ends included) where the density may be
  /// non-smooth; quadrature rules split there.
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  /// Short comma-free label, e.g. "ar1:a=0.5".
  std::string describe() const;

 private:
  explicit FadingModel(ModelParams p);
  void finish();

  std::shared_ptr<const ModelParams> params_;
  std::vector<double> breakpoints_;
  Verdict verdict_ = Verdict::Undetermined;
};

/// Builds the model named by the parameter record; same checks as the
/// named factories.
FadingModel make_model(ModelParams p, const ModelOptions& opts = {});

/// n x n Hermitian Toeplitz covariance of (H_1, ..., H_n): entry (i, j) is R(i - j).
inline constexpr std::size_t kDefaultToeplitzCap = 4096;
Eigen::MatrixXcd toeplitz_cov(const FadingModel& model, std::size_t n,
                              std::size_t cap = kDefaultToeplitzCap);

struct SquareIntegrability {
  Verdict verdict = Verdict::Undetermined;
  std::vector<double> estimates;  // int f^2 on successively refined grids
};

/// Grid-refinement verdict on int f^2 < infinity (for the density part).
SquareIntegrability square_integrability(const FadingModel& model);

struct ValidationReport {
  double density_mass = 0.0;  // integral of the density part
  double line_mass = 0.0;
  bool unit_mass_ok = false;
  double min_eigenvalue = 0.0;  // smallest over toeplitz_cov(n), n = 1, 2, 4, ..., 64
  bool psd_ok = false;
  bool has_density = false;
  bool spectral_line = false;
  Verdict square_integrable = Verdict::Undetermined;
  std::vector<double> square_integral_estimates;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

ValidationReport validate(const FadingModel& model);

/// Integral of the density part over [-1/2, 1/2] (quadrature).
double density_mass(const FadingModel& model);

}  // namespace lowsnr
