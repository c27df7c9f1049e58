#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lowsnr/spectra.hpp"

namespace lowsnr {

using ComplexSeq = std::vector<std::complex<double>>;

/// Block-constant-magnitude input: x_k = U_{floor(k/b)} D_k with U in {A, 0}
/// (P[U = A] = alpha) and IID signs D in {+1, -1}.
struct BlockScheme {
  enum class PhaseAlphabet { BinaryReal };

  double amplitude = 1.0;  // A > 0
  double alpha = 1.0;      // duty cycle in [0, 1]
  std::size_t block_length = 1;
  PhaseAlphabet phase_alphabet = PhaseAlphabet::BinaryReal;

  /// Throws ParamOutOfRange on A <= 0, alpha outside [0, 1] or b = 0.
  void check() const;
};

/// Fading sample path of length n. AR1 uses the exact recursion from a
/// stationary start, spectral lines are synthesized as random phasors and
/// other laws go through circulant spectral synthesis of length >= 8n.
ComplexSeq gen_fading(const FadingModel& model, std::size_t n, std::uint64_t seed);

ComplexSeq gen_inputs(const BlockScheme& scheme, std::size_t n, std::uint64_t seed);

struct ChannelTrace {
  ComplexSeq x, h, z, y;
  double sigma2 = 1.0;
  std::optional<double> amplitude;  // peak A, when the input came from a scheme
  std::uint64_t seed = 0;
  std::string model;

  /// A^2 / sigma^2 when the peak amplitude is known.
  std::optional<double> snr() const;
};

/// y_k = h_k x_k + z_k with fresh fading and N_C(0, sigma2) noise.
ChannelTrace apply_channel(std::span<const std::complex<double>> x, const FadingModel& model,
                           double sigma2, std::uint64_t seed,
                           std::optional<double> amplitude = std::nullopt);

/// Columnar text export: `#` header lines, then `k,re_x,im_x,re_h,im_h,re_y,im_y`.
void write_trace(std::ostream& out, const ChannelTrace& trace);

struct LagEstimate {
  long lag = 0;
  std::complex<double> value;
  double std_error_re = 0.0;  // delete-a-group jackknife
  double std_error_im = 0.0;
};

/// (1/(n-m)) sum_k h_{k+m} h_k^* for m = 0..m_max; needs n >= 10 m_max.
std::vector<LagEstimate> empirical_autocorr(std::span<const std::complex<double>> h, std::size_t m_max);

/// Non-conjugate second moment (1/n) sum_k h_k^2; zero for circularly
/// symmetric processes.
LagEstimate empirical_pseudo_moment(std::span<const std::complex<double>> h);

/// Eigenvalues used by gen_fading's circulant synthesis (length N), after
/// the clipping check. Exposed for tests.
std::vector<double> circulant_eigenvalues(const FadingModel& model, std::size_t size);

}  // namespace lowsnr
