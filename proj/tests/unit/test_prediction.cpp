#include <gtest/gtest.h>

#include <cmath>

#include "lowsnr/asymptotics.hpp"
#include "lowsnr/error.hpp"
#include "lowsnr/prediction.hpp"
#include "oracles.hpp"

using namespace lowsnr;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected lowsnr::Error";
  return ErrorCode::UsageError;
}

const std::vector<double> kRhoGrid{1e-1, 1e-2, 1e-3};

}  // namespace

TEST(Noiseless, Examples) {
  EXPECT_NEAR(noiseless_pred_error(FadingModel::memoryless()).error, 1.0, 1e-14);
  EXPECT_NEAR(noiseless_pred_error(FadingModel::ar1(0.5)).error, 0.75, 1e-10);
  EXPECT_EQ(noiseless_pred_error(FadingModel::band_limited(0.25)).error, 0.0);
  EXPECT_EQ(noiseless_pred_error(FadingModel::ar1(0.5)).method, PredictionMethod::ClosedForm);
}

TEST(Noiseless, MatchesFinitePastOracle) {
  for (double a : {0.3, 0.5, 0.8}) {
    const auto m = FadingModel::ar1(a);
    EXPECT_NEAR(finite_past_pred_error(m, 0.0, 64).error, noiseless_pred_error(m).error, 1e-9) << a;
  }
}

TEST(Noiseless, RefusesAtomicLaws) {
  EXPECT_EQ(code_of([] { noiseless_pred_error(FadingModel::constant()); }), ErrorCode::NoDensity);
}

TEST(Noisy, Examples) {
  for (double d2 : {0.01, 1.0, 10.0}) EXPECT_NEAR(noisy_pred_error(FadingModel::memoryless(), d2).error, 1.0, 1e-12);
  EXPECT_NEAR(noisy_pred_error(FadingModel::ar1(0.5), 1.0).error, std::sqrt(3.0) / 2.0, 1e-8);
  EXPECT_NEAR(noisy_pred_error(FadingModel::ar1(0.5), 10.0).error, 0.9713347, 1e-5);
}

TEST(Noisy, SpectralFactorizationOracle) {
  for (double a : {-0.7, 0.2, 0.5, 0.9}) {
    for (double d2 : {0.05, 0.5, 1.0, 4.0, 10.0}) {
      const double want = oracle::ar1_noisy_pred_error(a, d2);
      EXPECT_NEAR(noisy_pred_error(FadingModel::ar1(a), d2).error, want, 1e-8) << a << " " << d2;
    }
  }
}

TEST(Noisy, DependsOnlyOnModulusOfA) {
  const double want = oracle::ar1_noisy_pred_error(0.6, 2.0);
  for (double th : {0.3, 1.7, -2.5}) {
    EXPECT_NEAR(noisy_pred_error(FadingModel::ar1(std::polar(0.6, th)), 2.0).error, want, 1e-8) << th;
  }
}

TEST(Noisy, Errors) {
  EXPECT_EQ(code_of([] { noisy_pred_error(FadingModel::ar1(0.5), 0.0); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { noisy_pred_error(FadingModel::ar1(0.5), -1.0); }), ErrorCode::DomainError);
  const auto line = FadingModel::line_plus_residual(
      {{0.0, 0.3}}, std::make_shared<const FadingModel>(FadingModel::memoryless()));
  EXPECT_EQ(code_of([&] { noisy_pred_error(line, 1.0); }), ErrorCode::NoDensity);
}

TEST(FinitePast, Examples) {
  EXPECT_NEAR(finite_past_pred_error(FadingModel::ar1(0.5), 1.0, 1).error, 0.875, 1e-15);
  EXPECT_NEAR(finite_past_pred_error(FadingModel::memoryless(), 1.0, 10).error, 1.0, 1e-15);
  EXPECT_NEAR(finite_past_pred_error(FadingModel::ar1(0.5), 1.0, 256).error, std::sqrt(3.0) / 2.0, 1e-4);
  const auto r = finite_past_pred_error(FadingModel::ar1(0.5), 1.0, 7);
  EXPECT_EQ(r.method, PredictionMethod::FinitePast);
  EXPECT_EQ(r.past_length, 7u);
  EXPECT_FALSE(r.regularized);
}

TEST(FinitePast, SingularNoiselessSystemIsClipped) {
  // A pure line makes T_n rank one; the clipped solve still predicts perfectly.
  const auto r = finite_past_pred_error(FadingModel::constant(), 0.0, 5);
  EXPECT_TRUE(r.regularized);
  EXPECT_NEAR(r.error, 0.0, 1e-9);
}

TEST(FinitePast, Errors) {
  EXPECT_EQ(code_of([] { finite_past_pred_error(FadingModel::ar1(0.5), 1.0, 0); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { finite_past_pred_error(FadingModel::ar1(0.5), -1.0, 3); }), ErrorCode::DomainError);
  EXPECT_EQ(code_of([] { finite_past_pred_error(FadingModel::ar1(0.5), 1.0, 5000); }),
            ErrorCode::DimensionTooLarge);
}

TEST(Predict, Dispatch) {
  const auto m = FadingModel::ar1(0.5);
  EXPECT_EQ(predict({m, 1.0, std::nullopt}).method, PredictionMethod::ClosedForm);
  EXPECT_EQ(predict({m, 1.0, 16}).method, PredictionMethod::FinitePast);
  EXPECT_NEAR(predict({m, 0.0, std::nullopt}).error, 0.75, 1e-10);
}

class DensityCatalog : public ::testing::TestWithParam<oracle::Entry> {};

TEST_P(DensityCatalog, NondecreasingInNoise) {
  const auto& m = GetParam().model;
  double prev = noiseless_pred_error(m).error;
  for (double d2 : {1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0}) {
    const double e = noisy_pred_error(m, d2).error;
    EXPECT_GE(e, prev - 1e-12) << d2;
    EXPECT_LE(e, 1.0 + 1e-12);
    EXPECT_GE(e, 0.0);
    prev = e;
  }
}

TEST_P(DensityCatalog, FinitePastNonincreasingAndAboveClosedForm) {
  const auto& m = GetParam().model;
  for (double d2 : {0.1, 1.0}) {
    const double closed = noisy_pred_error(m, d2).error;
    double prev = 1.0;
    for (std::size_t n : {1u, 2u, 4u, 8u, 16u, 32u, 64u, 128u}) {
      const double e = finite_past_pred_error(m, d2, n).error;
      EXPECT_LE(e, prev + 1e-12) << n;
      EXPECT_GE(e, closed - 1e-8) << n;
      prev = e;
    }
  }
}

TEST_P(DensityCatalog, SlopeMatchesPhiAtSmallRho) {
  const auto& m = GetParam().model;
  if (m.density_square_integrable() != Verdict::Yes) GTEST_SKIP();
  EXPECT_NEAR(memory_ratio(m, 1e-3), phi_integral(m), 1e-3);
}

TEST_P(DensityCatalog, MemoryRatioMatchesDefinition) {
  const auto& m = GetParam().model;
  for (double rho : {0.5, 0.1}) {
    const double direct = (1.0 - noisy_pred_error(m, 1.0 / rho).error) / rho;
    EXPECT_NEAR(memory_ratio(m, rho), direct, 1e-8) << rho;
  }
}

TEST_P(DensityCatalog, MemoryRatioErrorShrinksLinearly) {
  const auto& m = GetParam().model;
  if (m.density_square_integrable() != Verdict::Yes) GTEST_SKIP();
  const double phi = phi_integral(m);
  const double coarse = std::abs(memory_ratio(m, 1e-2) - phi), fine = std::abs(memory_ratio(m, 1e-3) - phi);
  if (coarse < 1e-9) return;
  EXPECT_NEAR(fine / coarse, 0.1, 0.02);
}

INSTANTIATE_TEST_SUITE_P(All, DensityCatalog, ::testing::ValuesIn(oracle::density_catalog()),
                         [](const auto& info) {
                           std::string s = info.param.name;
                           for (auto& c : s) if (c == '.') c = '_';
                           return s;
                         });

TEST(FinitePast, Ar1ConvergesToClosedForm) {
  for (double a : {0.3, 0.5, 0.8}) {
    const auto m = FadingModel::ar1(a);
    for (double d2 : {0.1, 1.0, 10.0}) {
      EXPECT_NEAR(finite_past_pred_error(m, d2, 256).error, noisy_pred_error(m, d2).error, 1e-4) << a << " " << d2;
    }
  }
}

TEST(PhiViaLimit, Examples) {
  EXPECT_NEAR(phi_via_limit(FadingModel::memoryless(), kRhoGrid).phi, 0.0, 1e-12);
  const auto ar = phi_via_limit(FadingModel::ar1(0.5), kRhoGrid);
  EXPECT_NEAR(ar.phi, 1.0 / 3.0, 1e-3);
  EXPECT_EQ(ar.ratios.size(), 3u);
  EXPECT_GE(ar.spread, 0.0);
  EXPECT_NEAR(phi_via_limit(FadingModel::band_limited(0.25), kRhoGrid).phi, 0.5, 1e-3);
}

TEST(PhiViaLimit, Errors) {
  std::vector<double> g, v;
  oracle::jakes_table(0.2, 4097, g, v);
  const auto jakes = FadingModel::tabulated_density(g, v);
  EXPECT_EQ(code_of([&] { phi_via_limit(jakes, kRhoGrid); }), ErrorCode::ConditionTwelveFails);
  EXPECT_EQ(code_of([] { phi_via_limit(FadingModel::constant(), kRhoGrid); }), ErrorCode::NoDensity);
  const std::vector<double> short_grid{0.1, 0.01};
  EXPECT_EQ(code_of([&] { phi_via_limit(FadingModel::ar1(0.5), short_grid); }), ErrorCode::DomainError);
  const std::vector<double> increasing{0.001, 0.01, 0.1};
  EXPECT_EQ(code_of([&] { phi_via_limit(FadingModel::ar1(0.5), increasing); }), ErrorCode::DomainError);
  PhiLimitOptions tight;
  tight.growth_bound = 1.0;
  EXPECT_EQ(code_of([&] { phi_via_limit(FadingModel::ar1(0.9), kRhoGrid, tight); }), ErrorCode::NonConvergent);
}
