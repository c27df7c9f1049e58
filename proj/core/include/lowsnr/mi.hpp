#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lowsnr/simulate.hpp"
#include "lowsnr/spectra.hpp"

namespace lowsnr {

/// Mixture enumeration over 2^b sign patterns caps the block length.
inline constexpr std::size_t kMaxMiBlock = 12;

/// Finite-support law of an input block (X_1, ..., X_b) with peak amplitude A.
struct DiscreteInputLaw {
  std::vector<Eigen::VectorXcd> support;
  std::vector<double> probabilities;
  double amplitude = 1.0;

  std::size_t dim() const { return support.empty() ? 0 : static_cast<std::size_t>(support.front().size()); }
  /// Probabilities sum to one within 1e-12 and every entry obeys |x_k| <= A.
  void check() const;
};

/// Support {0} and {A d : d in {+1,-1}^b} with masses 1 - alpha and alpha / 2^b;
/// zero-mass points are dropped.
DiscreteInputLaw scheme_to_law(const BlockScheme& scheme);

/// R(i - j) x_i x_j^* + sigma2 [i == j]: covariance of Y given X = x.
Eigen::MatrixXcd cond_covariance(const Eigen::VectorXcd& x, const FadingModel& model, double sigma2);

/// Coefficient of SNR^2 in I(X; Y) for one block:
/// (1/(2 A^4)) (sum |R(i-j)|^2 E[|X_i|^2 |X_j|^2] - sum |R(i-j)|^2 |E[X_i X_j^*]|^2).
double second_order_coeff_exact(const DiscreteInputLaw& law, const FadingModel& model);

/// Gaussian-mixture output density p(y) = sum_x P(x) N_C(y; 0, C_x). Support
/// points equal up to a global phase share C_x and are merged; each class
/// keeps one Cholesky factor.
class OutputDensity {
 public:
  OutputDensity(const DiscreteInputLaw& law, const FadingModel& model, double sigma2);

  std::size_t num_classes() const { return classes_.size(); }
  std::size_t class_of(std::size_t support_index) const { return class_index_[support_index]; }
  double class_weight(std::size_t c) const { return classes_[c].weight; }

  /// log N_C(y; 0, C) for class c.
  double log_conditional(std::size_t c, const Eigen::VectorXcd& y) const;
  /// log p(y) by log-sum-exp over classes.
  double log_density(const Eigen::VectorXcd& y) const;

  /// log p(y) reusing already computed per-class conditionals.
  double log_density_from(std::span<const double> log_conditionals) const;

 private:
  struct Class {
    Eigen::LLT<Eigen::MatrixXcd> chol;
    double log_det = 0.0;
    double weight = 0.0;
    double log_weight = 0.0;
  };
  std::vector<Class> classes_;
  std::vector<std::size_t> class_index_;
  std::size_t dim_ = 0;
};

double log_output_density(const Eigen::VectorXcd& y, const DiscreteInputLaw& law, const FadingModel& model,
                          double sigma2);

/// Monte Carlo estimate of I(X_1^b; Y_1^b) in nats per block.
struct MIEstimate {
  std::size_t b = 1;
  double snr = 0.0;  // A^2 / sigma^2
  double alpha = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::size_t partitions = 1;
};

struct MonteCarloOptions {
  /// Sample partitions, each with its own sub-seed; results depend on this
  /// count but not on how many threads run them.
  std::size_t partitions = 4;
  /// 0 = std::thread::hardware_concurrency().
  std::size_t threads = 0;
};

inline constexpr std::size_t kMinMiSamples = 10'000;

MIEstimate mi_monte_carlo(const BlockScheme& scheme, const FadingModel& model, double sigma2,
                          std::size_t n_samples, std::uint64_t seed, const MonteCarloOptions& opts = {});

struct CoefficientFit {
  double coefficient = 0.0;  // of SNR^2
  double std_error = 0.0;
  double cubic = 0.0;        // nuisance SNR^3 term
};

/// Weighted least squares of estimate ~ c SNR^2 + d SNR^3 (weights 1/std_error^2;
/// unweighted when any std_error is zero).
CoefficientFit fit_coefficient(std::span<const MIEstimate> points);

/// CSV rows `b,snr,alpha,estimate,std_error,n_samples,seed` after a header.
void write_estimates_csv(std::ostream& out, std::span<const MIEstimate> estimates);

}  // namespace lowsnr
