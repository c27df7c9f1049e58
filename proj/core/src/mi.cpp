#include "lowsnr/mi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <ostream>
#include <thread>

#include "lowsnr/error.hpp"
#include "lowsnr/rng.hpp"

namespace lowsnr {

namespace {

const double kLogPi = std::log(std::numbers::pi);

// Global-phase-invariant key: rotate so the first non-zero entry is real
// positive, then quantize.
std::vector<long long> phase_class_key(const Eigen::VectorXcd& x) {
  std::complex<double> rot{1.0, 0.0};
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > 0.0) {
      rot = std::conj(x[i]) / std::abs(x[i]);
      break;
    }
  }
  std::vector<long long> key;
  key.reserve(2 * static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const std::complex<double> v = x[i] * rot;
    key.push_back(std::llround(v.real() * 1e12));
    key.push_back(std::llround(v.imag() * 1e12));
  }
  return key;
}

std::vector<std::complex<double>> lag_table(const FadingModel& model, std::size_t b) {
  std::vector<std::complex<double>> r(b);
  for (std::size_t m = 0; m < b; ++m) r[m] = model.autocorr(static_cast<long>(m));
  return r;
}

std::complex<double> lag(const std::vector<std::complex<double>>& r, long d) {
  return d >= 0 ? r[static_cast<std::size_t>(d)] : std::conj(r[static_cast<std::size_t>(-d)]);
}

struct RunningStats {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  // Chan et al. pairwise merge.
  void merge(const RunningStats& o) {
    if (o.n == 0) return;
    const std::size_t total = n + o.n;
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.n) / static_cast<double>(total);
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / static_cast<double>(total);
    n = total;
  }
};

std::string fmt12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

void DiscreteInputLaw::check() const {
  if (support.empty() || support.size() != probabilities.size()) {
    throw Error(ErrorCode::ParamOutOfRange, "law needs matching support and probabilities");
  }
  if (!(amplitude > 0.0)) throw Error(ErrorCode::ParamOutOfRange, "law amplitude must be positive");
  double total = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (!(probabilities[i] > 0.0)) throw Error(ErrorCode::ParamOutOfRange, "probabilities must be positive");
    if (static_cast<std::size_t>(support[i].size()) != dim()) {
      throw Error(ErrorCode::ParamOutOfRange, "support vectors differ in length");
    }
    if (support[i].cwiseAbs().maxCoeff() > amplitude * (1.0 + 1e-12)) {
      throw Error(ErrorCode::ParamOutOfRange, "support point violates the peak constraint");
    }
    total += probabilities[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::ParamOutOfRange, "probabilities do not sum to one");
}

DiscreteInputLaw scheme_to_law(const BlockScheme& scheme) {
  scheme.check();
  const std::size_t b = scheme.block_length;
  if (b > kMaxMiBlock) {
    throw Error(ErrorCode::BlockTooLarge, "b = " + std::to_string(b) + " exceeds " + std::to_string(kMaxMiBlock));
  }
  DiscreteInputLaw law;
  law.amplitude = scheme.amplitude;
  if (scheme.alpha < 1.0) {
    law.support.push_back(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(b)));
    law.probabilities.push_back(1.0 - scheme.alpha);
  }
  if (scheme.alpha > 0.0) {
    const std::size_t patterns = std::size_t{1} << b;
    const double p = scheme.alpha / static_cast<double>(patterns);
    for (std::size_t bits = 0; bits < patterns; ++bits) {
      Eigen::VectorXcd x(static_cast<Eigen::Index>(b));
      for (std::size_t k = 0; k < b; ++k) x[static_cast<Eigen::Index>(k)] = ((bits >> k) & 1U) ? -scheme.amplitude : scheme.amplitude;
      law.support.push_back(std::move(x));
      law.probabilities.push_back(p);
    }
  }
  return law;
}

Eigen::MatrixXcd cond_covariance(const Eigen::VectorXcd& x, const FadingModel& model, double sigma2) {
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::DomainError, "sigma^2 must be positive");
  if (x.size() == 0) throw Error(ErrorCode::DomainError, "empty input vector");
  const auto b = static_cast<std::size_t>(x.size());
  const auto r = lag_table(model, b);
  Eigen::MatrixXcd c(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      c(i, j) = lag(r, static_cast<long>(i - j)) * x[i] * std::conj(x[j]);
    }
    c(i, i) += sigma2;
  }
  return c;
}

double second_order_coeff_exact(const DiscreteInputLaw& law, const FadingModel& model) {
  law.check();
  const auto b = static_cast<Eigen::Index>(law.dim());
  const auto r = lag_table(model, static_cast<std::size_t>(b));
  Eigen::MatrixXd fourth = Eigen::MatrixXd::Zero(b, b);  // E|X_i|^2 |X_j|^2
  Eigen::MatrixXcd second = Eigen::MatrixXcd::Zero(b, b);  // E X_i X_j^*
  for (std::size_t p = 0; p < law.support.size(); ++p) {
    const Eigen::VectorXcd& x = law.support[p];
    const Eigen::VectorXd mag2 = x.cwiseAbs2();
    fourth.noalias() += law.probabilities[p] * (mag2 * mag2.transpose());
    second.noalias() += law.probabilities[p] * (x * x.adjoint());
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) {
      const double w = std::norm(lag(r, static_cast<long>(i - j)));
      acc += w * (fourth(i, j) - std::norm(second(i, j)));
    }
  }
  const double a4 = std::pow(law.amplitude, 4);
  return acc / (2.0 * a4);
}

OutputDensity::OutputDensity(const DiscreteInputLaw& law, const FadingModel& model, double sigma2) {
  law.check();
  if (law.dim() > kMaxMiBlock) {
    throw Error(ErrorCode::BlockTooLarge, "block length exceeds " + std::to_string(kMaxMiBlock));
  }
  dim_ = law.dim();
  std::map<std::vector<long long>, std::size_t> index;
  class_index_.resize(law.support.size());
  for (std::size_t p = 0; p < law.support.size(); ++p) {
    auto key = phase_class_key(law.support[p]);
    auto [it, inserted] = index.try_emplace(std::move(key), classes_.size());
    if (inserted) {
      Class c;
      c.chol.compute(cond_covariance(law.support[p], model, sigma2));
      if (c.chol.info() != Eigen::Success) {
        throw Error(ErrorCode::DomainError, "conditional covariance is not positive definite");
      }
      c.log_det = 2.0 * c.chol.matrixLLT().diagonal().real().array().log().sum();
      classes_.push_back(std::move(c));
    }
    class_index_[p] = it->second;
    classes_[it->second].weight += law.probabilities[p];
  }
  for (auto& c : classes_) c.log_weight = std::log(c.weight);
}

double OutputDensity::log_conditional(std::size_t c, const Eigen::VectorXcd& y) const {
  const Class& k = classes_[c];
  const Eigen::VectorXcd w = k.chol.matrixL().solve(y);
  return -static_cast<double>(dim_) * kLogPi - k.log_det - w.squaredNorm();
}

double OutputDensity::log_density_from(std::span<const double> log_conditionals) const {
  double peak = -HUGE_VAL;
  for (std::size_t c = 0; c < classes_.size(); ++c) peak = std::max(peak, classes_[c].log_weight + log_conditionals[c]);
  double acc = 0.0;
  for (std::size_t c = 0; c < classes_.size(); ++c) acc += std::exp(classes_[c].log_weight + log_conditionals[c] - peak);
  return peak + std::log(acc);
}

double OutputDensity::log_density(const Eigen::VectorXcd& y) const {
  std::vector<double> lc(classes_.size());
  for (std::size_t c = 0; c < classes_.size(); ++c) lc[c] = log_conditional(c, y);
  return log_density_from(lc);
}

double log_output_density(const Eigen::VectorXcd& y, const DiscreteInputLaw& law, const FadingModel& model,
                          double sigma2) {
  return OutputDensity(law, model, sigma2).log_density(y);
}

MIEstimate mi_monte_carlo(const BlockScheme& scheme, const FadingModel& model, double sigma2,
                          std::size_t n_samples, std::uint64_t seed, const MonteCarloOptions& opts) {
  scheme.check();
  if (scheme.block_length > kMaxMiBlock) {
    throw Error(ErrorCode::BlockTooLarge, "b = " + std::to_string(scheme.block_length) + " exceeds " +
                                              std::to_string(kMaxMiBlock));
  }
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::DomainError, "sigma^2 must be positive");
  if (n_samples < kMinMiSamples) {
    throw Error(ErrorCode::DomainError, "need at least " + std::to_string(kMinMiSamples) + " samples");
  }
  const std::size_t partitions = std::max<std::size_t>(1, opts.partitions);

  const DiscreteInputLaw law = scheme_to_law(scheme);
  const OutputDensity density(law, model, sigma2);
  const auto b = static_cast<Eigen::Index>(scheme.block_length);

  // Fading block h = S v with S S^H = T_b; S from the eigendecomposition so
  // singular (line) spectra are handled.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(toeplitz_cov(model, scheme.block_length));
  const Eigen::MatrixXcd fading_sqrt =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  std::vector<double> cumulative(law.probabilities.size());
  double run = 0.0;
  for (std::size_t i = 0; i < cumulative.size(); ++i) cumulative[i] = (run += law.probabilities[i]);
  cumulative.back() = 1.0;

  std::vector<RunningStats> stats(partitions);
  auto worker = [&](std::size_t part) {
    const std::size_t count = n_samples / partitions + (part < n_samples % partitions ? 1 : 0);
    Rng rng(seed, stream::kMonteCarlo, part);
    Eigen::VectorXcd v(b), y(b);
    std::vector<double> lc(density.num_classes());
    RunningStats& s = stats[part];
    for (std::size_t it = 0; it < count; ++it) {
      const double u = rng.uniform();
      const auto idx = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      const std::size_t pick = std::min(idx, cumulative.size() - 1);
      const Eigen::VectorXcd& x = law.support[pick];
      for (Eigen::Index k = 0; k < b; ++k) v[k] = rng.complex_normal();
      y = x.cwiseProduct(fading_sqrt * v);
      for (Eigen::Index k = 0; k < b; ++k) y[k] += rng.complex_normal(sigma2);
      for (std::size_t c = 0; c < lc.size(); ++c) lc[c] = density.log_conditional(c, y);
      s.add(lc[density.class_of(pick)] - density.log_density_from(lc));
    }
  };

  std::size_t threads = opts.threads ? opts.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, partitions);
  if (threads <= 1) {
    for (std::size_t p = 0; p < partitions; ++p) worker(p);
  } else {
    for (std::size_t start = 0; start < partitions; start += threads) {
      std::vector<std::jthread> pool;
      for (std::size_t p = start; p < std::min(partitions, start + threads); ++p) pool.emplace_back(worker, p);
    }
  }

  RunningStats total;
  for (const auto& s : stats) total.merge(s);

  MIEstimate est;
  est.b = scheme.block_length;
  est.snr = scheme.amplitude * scheme.amplitude / sigma2;
  est.alpha = scheme.alpha;
  est.estimate = total.mean;
  const double var = total.n > 1 ? total.m2 / static_cast<double>(total.n - 1) : 0.0;
  est.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(total.n));
  est.n_samples = total.n;
  est.seed = seed;
  est.partitions = partitions;
  return est;
}

CoefficientFit fit_coefficient(std::span<const MIEstimate> points) {
  std::vector<double> snrs;
  for (const auto& p : points) {
    if (!(p.snr > 0.0 && p.snr <= 0.5)) throw Error(ErrorCode::DomainError, "fit needs 0 < SNR <= 0.5");
    if (std::find(snrs.begin(), snrs.end(), p.snr) == snrs.end()) snrs.push_back(p.snr);
  }
  if (snrs.size() < 3) throw Error(ErrorCode::DomainError, "fit needs at least 3 distinct SNR values");
  const auto [lo, hi] = std::minmax_element(snrs.begin(), snrs.end());
  if (*hi < 2.0 * *lo) throw Error(ErrorCode::IllConditioned, "SNR values span less than a factor of 2");

  const bool weighted = std::all_of(points.begin(), points.end(), [](const MIEstimate& p) { return p.std_error > 0.0; });
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    const double w = weighted ? 1.0 / p.std_error : 1.0;
    design(i, 0) = w * p.snr * p.snr;
    design(i, 1) = w * p.snr * p.snr * p.snr;
    rhs[i] = w * p.estimate;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::Vector2d beta = qr.solve(rhs);
  Eigen::Matrix2d cov = (design.transpose() * design).inverse();
  if (!weighted) {
    const double rss = (design * beta - rhs).squaredNorm();
    cov *= n > 2 ? rss / static_cast<double>(n - 2) : 0.0;
  }
  return {beta[0], std::sqrt(std::max(cov(0, 0), 0.0)), beta[1]};
}

void write_estimates_csv(std::ostream& out, std::span<const MIEstimate> estimates) {
  out << "b,snr,alpha,estimate,std_error,n_samples,seed\n";
  for (const auto& e : estimates) {
    out << e.b << ',' << fmt12(e.snr) << ',' << fmt12(e.alpha) << ',' << fmt12(e.estimate) << ','
        << fmt12(e.std_error) << ',' << e.n_samples << ',' << e.seed << '\n';
  }
}

}  // namespace lowsnr
