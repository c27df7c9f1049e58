#include "lowsnr/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <ostream>

#include <fftw3.h>

#include "lowsnr/error.hpp"
#include "lowsnr/rng.hpp"

namespace lowsnr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kClipTolerance = 1e-8;
constexpr std::size_t kJackknifeGroups = 50;

// FFTW planning is not thread-safe.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place unnormalized DFT; sign = FFTW_FORWARD (e^{-i}) or FFTW_BACKWARD (e^{+i}).
void dft_in_place(std::vector<std::complex<double>>& data, int sign) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), ptr, ptr, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
}

ComplexSeq circulant_synthesis(const FadingModel& model, std::size_t n, Rng& rng) {
  const std::size_t size = std::bit_ceil(std::max<std::size_t>(8 * n, 16));
  const std::vector<double> eig = circulant_eigenvalues(model, size);
  ComplexSeq buf(size);
  const double scale = 1.0 / std::sqrt(static_cast<double>(size));
  for (std::size_t k = 0; k < size; ++k) buf[k] = std::sqrt(eig[k]) * scale * rng.complex_normal();
  dft_in_place(buf, FFTW_BACKWARD);
  buf.resize(n);
  return buf;
}

ComplexSeq gen_density_part(const FadingModel& model, std::size_t n, Rng& rng) {
  ComplexSeq h(n);
  switch (model.kind()) {
    case ModelKind::Memoryless:
      for (auto& v : h) v = rng.complex_normal();
      return h;
    case ModelKind::AR1: {
      const std::complex<double> a = std::get<params::Ar1>(model.params()).a;
      const double innov = std::sqrt(1.0 - std::norm(a));
      h[0] = rng.complex_normal();
      for (std::size_t k = 1; k < n; ++k) h[k] = a * h[k - 1] + innov * rng.complex_normal();
      return h;
    }
    default:
      return circulant_synthesis(model, n, rng);
  }
}

std::string fmt12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct JackknifeResult {
  std::complex<double> value;
  double se_re = 0.0;
  double se_im = 0.0;
};

// Mean of products[k] with a delete-a-group jackknife over contiguous groups.
template <class Product>
JackknifeResult jackknife_mean(std::size_t count, Product&& product) {
  const std::size_t groups = std::min(kJackknifeGroups, count);
  std::vector<std::complex<double>> group_sum(groups);
  std::vector<std::size_t> group_count(groups);
  std::complex<double> total{};
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t g = k * groups / count;
    const std::complex<double> p = product(k);
    group_sum[g] += p;
    ++group_count[g];
    total += p;
  }
  JackknifeResult out;
  out.value = total / static_cast<double>(count);
  if (groups < 2) return out;
  std::vector<std::complex<double>> loo(groups);
  std::complex<double> mean_loo{};
  for (std::size_t g = 0; g < groups; ++g) {
    loo[g] = (total - group_sum[g]) / static_cast<double>(count - group_count[g]);
    mean_loo += loo[g];
  }
  mean_loo /= static_cast<double>(groups);
  double vr = 0.0, vi = 0.0;
  for (const auto& v : loo) {
    vr += (v.real() - mean_loo.real()) * (v.real() - mean_loo.real());
    vi += (v.imag() - mean_loo.imag()) * (v.imag() - mean_loo.imag());
  }
  const double f = static_cast<double>(groups - 1) / static_cast<double>(groups);
  out.se_re = std::sqrt(f * vr);
  out.se_im = std::sqrt(f * vi);
  return out;
}

}  // namespace

void BlockScheme::check() const {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw Error(ErrorCode::ParamOutOfRange, "peak amplitude A must be positive");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::ParamOutOfRange, "alpha must lie in [0, 1]");
  if (block_length == 0) throw Error(ErrorCode::ParamOutOfRange, "block length must be >= 1");
}

std::vector<double> circulant_eigenvalues(const FadingModel& model, std::size_t size) {
  if (size < 2) throw Error(ErrorCode::DomainError, "circulant size must be >= 2");
  std::vector<double> eig(size);
  if (const auto* t = std::get_if<params::TabulatedAutocorr>(&model.params())) {
    if (2 * t->lags.size() > size) {
      throw Error(ErrorCode::EmbeddingFailure, "circulant too short for the autocorrelation table");
    }
    ComplexSeq c(size);
    c[0] = t->lags[0];
    for (std::size_t j = 1; j < t->lags.size(); ++j) {
      c[j] = t->lags[j];
      c[size - j] = std::conj(t->lags[j]);
    }
    dft_in_place(c, FFTW_FORWARD);
    for (std::size_t k = 0; k < size; ++k) eig[k] = c[k].real();
  } else {
    // Sampled spectral density, renormalized so the synthesized variance is one.
    double mean = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
      const double lambda = (k < size / 2 ? static_cast<double>(k) : static_cast<double>(k) - size) / size;
      eig[k] = model.density(lambda);
      mean += eig[k];
    }
    mean /= static_cast<double>(size);
    if (!(mean > 0.0)) throw Error(ErrorCode::EmbeddingFailure, "sampled density vanishes on the grid");
    for (auto& g : eig) g /= mean;
  }
  for (auto& g : eig) {
    if (g < -kClipTolerance) {
      throw Error(ErrorCode::EmbeddingFailure, "circulant eigenvalue " + fmt12(g) + " below -1e-8");
    }
    g = std::max(g, 0.0);
  }
  return eig;
}

ComplexSeq gen_fading(const FadingModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::DomainError, "sequence length must be >= 1");
  Rng rng(seed, stream::kFading);
  if (model.kind() != ModelKind::LinePlusResidual) return gen_density_part(model, n, rng);

  const auto& p = std::get<params::LinePlusResidual>(model.params());
  ComplexSeq h(n);
  for (const auto& line : p.lines) {
    const std::complex<double> g = std::sqrt(line.mass) * rng.complex_normal();
    if (line.location == 0.0) {
      for (auto& v : h) v += g;
    } else {
      for (std::size_t k = 0; k < n; ++k) {
        h[k] += g * std::exp(std::complex<double>(0.0, kTwoPi * line.location * static_cast<double>(k)));
      }
    }
  }
  if (p.residual) {
    Rng sub(seed, stream::kFading, 1);
    const ComplexSeq r = gen_density_part(*p.residual, n, sub);
    const double w = std::sqrt(model.density_weight());
    for (std::size_t k = 0; k < n; ++k) h[k] += w * r[k];
  }
  return h;
}

ComplexSeq gen_inputs(const BlockScheme& scheme, std::size_t n, std::uint64_t seed) {
  scheme.check();
  Rng block_rng(seed, stream::kBlock);
  Rng sign_rng(seed, stream::kSign);
  ComplexSeq x(n);
  double magnitude = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k % scheme.block_length == 0) magnitude = block_rng.bernoulli(scheme.alpha) ? scheme.amplitude : 0.0;
    x[k] = magnitude * sign_rng.sign();
  }
  return x;
}

std::optional<double> ChannelTrace::snr() const {
  if (!amplitude) return std::nullopt;
  return (*amplitude) * (*amplitude) / sigma2;
}

ChannelTrace apply_channel(std::span<const std::complex<double>> x, const FadingModel& model,
                           double sigma2, std::uint64_t seed, std::optional<double> amplitude) {
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::DomainError, "noise variance sigma^2 must be positive");
  if (x.empty()) throw Error(ErrorCode::DomainError, "input sequence is empty");
  ChannelTrace t;
  t.x.assign(x.begin(), x.end());
  t.h = gen_fading(model, x.size(), seed);
  Rng noise(seed, stream::kNoise);
  t.z.resize(x.size());
  t.y.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    t.z[k] = noise.complex_normal(sigma2);
    t.y[k] = t.h[k] * t.x[k] + t.z[k];
  }
  t.sigma2 = sigma2;
  t.amplitude = amplitude;
  t.seed = seed;
  t.model = model.describe();
  return t;
}

void write_trace(std::ostream& out, const ChannelTrace& t) {
  out << "# model=" << t.model << "\n";
  out << "# sigma2=" << fmt12(t.sigma2) << "\n";
  out << "# A=" << (t.amplitude ? fmt12(*t.amplitude) : std::string("none")) << "\n";
  out << "# snr=" << (t.snr() ? fmt12(*t.snr()) : std::string("none")) << "\n";
  out << "# seed=" << t.seed << "\n";
  out << "k,re_x,im_x,re_h,im_h,re_y,im_y\n";
  for (std::size_t k = 0; k < t.x.size(); ++k) {
    out << k << ',' << fmt12(t.x[k].real()) << ',' << fmt12(t.x[k].imag()) << ',' << fmt12(t.h[k].real())
        << ',' << fmt12(t.h[k].imag()) << ',' << fmt12(t.y[k].real()) << ',' << fmt12(t.y[k].imag())
        << '\n';
  }
}

std::vector<LagEstimate> empirical_autocorr(std::span<const std::complex<double>> h, std::size_t m_max) {
  if (h.size() < 10 * std::max<std::size_t>(m_max, 1)) {
    throw Error(ErrorCode::TooShort, "need at least 10 * m_max samples");
  }
  std::vector<LagEstimate> out;
  for (std::size_t m = 0; m <= m_max; ++m) {
    const std::size_t count = h.size() - m;
    const auto r = jackknife_mean(count, [&](std::size_t k) { return h[k + m] * std::conj(h[k]); });
    out.push_back({static_cast<long>(m), r.value, r.se_re, r.se_im});
  }
  return out;
}

LagEstimate empirical_pseudo_moment(std::span<const std::complex<double>> h) {
  if (h.size() < 10) throw Error(ErrorCode::TooShort, "need at least 10 samples");
  const auto r = jackknife_mean(h.size(), [&](std::size_t k) { return h[k] * h[k]; });
  return {0, r.value, r.se_re, r.se_im};
}

}  // namespace lowsnr
