#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "anco/coherent.hpp"

using namespace anco;

namespace {

constexpr double kPi = 3.14159265358979323846;

SpectrumPtr diag_spectrum(double lambda, std::size_t dim = 64, double omega = 1.0, double hbar = 1.0) {
  return std::make_shared<const EnergySpectrum>(
      solve_spectrum(ModelParams{omega, lambda, hbar, ModelKind::DiagonalQuadratic}, dim, 1));
}

}  // namespace

TEST(Poisson, AmplitudesAndTail) {
  EXPECT_NEAR(poisson_amplitude(0, 1.0), std::exp(-0.5), 1e-16);
  EXPECT_NEAR(poisson_amplitude(3, 2.0), std::exp(-2.0) * 8.0 / std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(poisson_weight(4, 3.0), std::exp(-3.0) * 81.0 / 24.0, 1e-15);
  // Tail P(dim, rho^2) = 1 - sum_{n < dim} weight.
  double head = 0.0;
  for (std::size_t n = 0; n < 10; ++n) head += poisson_weight(n, 4.0);
  EXPECT_NEAR(poisson_tail(10, 2.0), 1.0 - head, 1e-15);
  const std::size_t d = min_state_dim(4.0);
  EXPECT_LT(poisson_tail(d, 4.0), kDefaultMaxTail);
  EXPECT_GE(poisson_tail(d - 1, 4.0), kDefaultMaxTail);
}

TEST(BuildState, ZeroRadiusIsGroundState) {
  for (double theta : {0.0, 1.3, -40.0}) {
    const auto s = build_state(diag_spectrum(0.1), 0.0, theta, 8);
    EXPECT_EQ(std::abs(s.coeffs[0]), 1.0);
    for (Eigen::Index n = 1; n < 8; ++n) EXPECT_EQ(s.coeffs[n], std::complex<double>(0.0));
  }
}

TEST(BuildState, HarmonicLimitIsCanonical) {
  const auto s = build_state(diag_spectrum(0.0), 1.3, 0.7, 40);
  const auto canon = canonical_coherent_coeffs(std::polar(1.3, -0.7), 40);
  EXPECT_LT(aligned_max_deviation(s.coeffs, canon), 1e-12);
}

TEST(BuildState, PeakAtFloorOfRhoSquared) {
  const auto spec = diag_spectrum(0.1, 128);
  const auto s = build_state(spec, 2.5, 0.0, 40);
  Eigen::Index peak;
  s.coeffs.cwiseAbs2().maxCoeff(&peak);
  EXPECT_EQ(peak, 6);

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> mu(0.5, 60.0);
  for (int trial = 0; trial < 50; ++trial) {
    double m = mu(rng);
    if (m == std::floor(m)) m += 0.5;
    const double rho = std::sqrt(m);
    const auto st = build_state(spec, rho, 0.3, min_state_dim(rho));
    st.coeffs.cwiseAbs2().maxCoeff(&peak);
    EXPECT_EQ(static_cast<double>(peak), std::floor(rho * rho)) << "rho^2 = " << rho * rho;
  }
}

TEST(BuildState, NormalizedAndRadialPartIndependentOfTheta) {
  const auto spec = diag_spectrum(0.3);
  const auto a = build_state(spec, 3.0, 0.0, 50);
  const auto b = build_state(spec, 3.0, 2.2, 50);
  EXPECT_NEAR(a.coeffs.squaredNorm(), 1.0, 1e-14);
  EXPECT_LT((a.coeffs.cwiseAbs() - b.coeffs.cwiseAbs()).cwiseAbs().maxCoeff(), 1e-16);
  for (Eigen::Index n = 0; n < 50; ++n) {
    EXPECT_NEAR(std::abs(a.coeffs[n]), poisson_amplitude(static_cast<std::size_t>(n), 3.0), 1e-14);
  }
}

TEST(BuildState, TruncationErrorNamesMinimalDim) {
  const auto spec = diag_spectrum(0.1);
  try {
    build_state(spec, 4.0, 0.0, 20);
    FAIL() << "expected TruncationError";
  } catch (const TruncationError& e) {
    EXPECT_EQ(e.min_dim(), min_state_dim(4.0));
    EXPECT_NO_THROW(build_state(spec, 4.0, 0.0, e.min_dim()));
  }
}

TEST(BuildState, TruncationBoundAtQuarterDim) {
  // rho^2 = dim/4 is inside the 1e-12 budget from dim = 40 on, but not below.
  const auto spec = diag_spectrum(0.1, 128);
  for (std::size_t dim : {40u, 48u, 64u, 128u}) {
    const double rho = std::sqrt(static_cast<double>(dim) / 4.0);
    EXPECT_LT(build_state(spec, rho, 0.0, dim).trunc_mass, 1e-12) << dim;
  }
  EXPECT_THROW(build_state(spec, std::sqrt(8.0), 0.0, 32), TruncationError);
}

TEST(BuildState, Validation) {
  const auto spec = diag_spectrum(0.1, 16);
  EXPECT_THROW(build_state(spec, -1.0, 0.0, 8), ValidationError);
  EXPECT_THROW(build_state(spec, 1.0, std::nan(""), 8), ValidationError);
  EXPECT_THROW(build_state(spec, 0.5, 0.0, 0), ValidationError);
  EXPECT_THROW(build_state(spec, 1.0, 0.0, 40), ValidationError);  // beyond the spectrum
  EXPECT_THROW(build_state(nullptr, 1.0, 0.0, 8), ValidationError);
}

TEST(EvolveState, ZeroTimeIsIdentity) {
  const auto s = build_state(diag_spectrum(0.1), 2.0, 0.4, 30);
  const auto e = evolve_state(s, 0.0);
  EXPECT_EQ(e.coeffs, s.coeffs);
  EXPECT_EQ(e.theta, s.theta);
}

TEST(EvolveState, HarmonicPeriodGivesMinusOne) {
  const auto s = build_state(diag_spectrum(0.0), 2.0, 0.4, 30);
  const auto e = evolve_state(s, 2 * kPi);
  EXPECT_LT((e.coeffs + s.coeffs).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(EvolveState, RelabelIdentity) {
  for (double lam : {0.05, 0.1, 0.5}) {
    const auto spec = diag_spectrum(lam, 64);
    for (double rho : {1.0, 2.0, 4.0}) {
      const auto s = build_state(spec, rho, 0.3, min_state_dim(rho));
      for (double t : {0.1, 1.0, 10.0}) {
        const auto evolved = evolve_state(s, t);
        const auto relabeled = build_state(spec, rho, s.theta + s.orbit_frequency() * t, s.dim());
        EXPECT_LT(aligned_max_deviation(evolved.coeffs, relabeled.coeffs), 1e-12)
            << "lambda=" << lam << " rho=" << rho << " t=" << t;
        EXPECT_NEAR(evolved.coeffs.norm(), 1.0, 1e-14);
      }
    }
  }
}

TEST(EvolveState, NormPreservedOverLongTimes) {
  const auto s = build_state(diag_spectrum(0.2), 3.0, 0.0, 48);
  for (double t : {1e2, 1e4, 1e6}) EXPECT_NEAR(evolve_state(s, t).coeffs.norm(), 1.0, 1e-14);
}

TEST(Overlap, UnitOnlyAtSameLabel) {
  const auto spec = diag_spectrum(0.1);
  const auto a = build_state(spec, 2.0, 0.5, 30);
  EXPECT_NEAR(std::abs(overlap(a, a)), 1.0, 1e-14);
  for (double dtheta : {0.01, 0.5, 2.0}) {
    const auto b = build_state(spec, 2.0, 0.5 + dtheta, 30);
    EXPECT_LT(std::abs(overlap(a, b)), 1.0 - 1e-6);
  }
  EXPECT_THROW(overlap(a, build_state(spec, 2.0, 0.5, 31)), ValidationError);
}

TEST(Expectation, HarmonicMinimumUncertainty) {
  // A generous basis so the truncation loss sits far below the tolerances.
  const auto spec = diag_spectrum(0.0, 64);
  for (double rho : {0.0, 0.5, 2.0, 3.7}) {
    for (double theta : {0.0, 1.0, -2.5}) {
      const auto s = build_state(spec, rho, theta, min_state_dim(rho, 1e-20));
      const auto r = expectation_report(s, OperatorSet::for_state(s));
      EXPECT_NEAR(r.uncertainty_product, 0.5, 1e-10);
      EXPECT_LT(r.a_residual_norm, 1e-10);
      EXPECT_NEAR(r.k_value, 0.0, 1e-10);
      EXPECT_NEAR(r.mean_q, std::sqrt(2.0) * rho * std::cos(theta), 1e-10);
      EXPECT_NEAR(r.mean_p, -std::sqrt(2.0) * rho * std::sin(theta), 1e-10);
    }
  }
}

TEST(Expectation, HarmonicMeanPosition) {
  const auto s = build_state(diag_spectrum(0.0), 2.0, 0.0, 40);
  const auto r = expectation_report(s, OperatorSet::for_state(s));
  EXPECT_NEAR(r.mean_q, 2.8284271247461903, 1e-12);
  EXPECT_NEAR(r.mean_p, 0.0, 1e-14);
}

TEST(Expectation, HeisenbergBoundAnharmonic) {
  const auto spec = diag_spectrum(0.1, 128);
  for (double rho : {0.5, 2.0, 5.0}) {
    for (int k = 0; k < 8; ++k) {
      const auto s = build_state(spec, rho, 2 * kPi * k / 8, min_state_dim(rho));
      const auto r = expectation_report(s, OperatorSet::for_state(s));
      EXPECT_GE(r.uncertainty_product, 0.5 - 1e-12);
      EXPECT_GE(r.var_q, 0.0);
      EXPECT_GE(r.var_p, 0.0);
    }
  }
}

TEST(Expectation, CanonicalAtZeroAngle) {
  // At Theta = 0 every phase is 1, so the state is exactly canonical and the
  // eigen-residual is pure round-off regardless of the anharmonicity.
  const auto spec = diag_spectrum(0.1, 128);
  for (double rho : {2.0, 6.0}) {
    const auto s = build_state(spec, rho, 0.0, min_state_dim(rho));
    EXPECT_LT(expectation_report(s, OperatorSet::for_state(s)).a_residual_norm, 1e-12);
  }
}

TEST(Expectation, RelativeEigenResidualImprovesWithRadius) {
  const auto spec = diag_spectrum(0.1, 160);
  auto worst = [&](double rho) {
    double m = 0.0;
    for (int k = 0; k < 8; ++k) {
      const auto s = build_state(spec, rho, 2 * kPi * k / 8, min_state_dim(rho));
      m = std::max(m, expectation_report(s, OperatorSet::for_state(s)).a_residual_norm / rho);
    }
    return m;
  };
  const double r2 = worst(2.0), r6 = worst(6.0);
  EXPECT_LT(r6, r2);
  // Away from Theta = 0 the state is no longer an eigenvector.
  const auto s = build_state(spec, 2.0, 1.0, min_state_dim(2.0));
  EXPECT_GT(expectation_report(s, OperatorSet::for_state(s)).a_residual_norm, 1e-3);
}

TEST(Expectation, OperatorTooSmall) {
  const auto s = build_state(diag_spectrum(0.1), 1.0, 0.0, 20);
  EXPECT_THROW(expectation_report(s, OperatorSet::build(s.params(), 21)), ValidationError);
  EXPECT_NO_THROW(expectation_report(s, OperatorSet::build(s.params(), 22)));
}

TEST(Recurrence, HarmonicRecursExactly) {
  const auto s = build_state(diag_spectrum(0.0), 2.0, 0.3, 40);
  const auto q = build_operator(s.params(), OperatorTag::Q, 41);
  const auto r = almost_periodic_scan(s, q);
  EXPECT_NEAR(r.nominal_period, 2 * kPi, 1e-15);
  EXPECT_LT(r.first_period_residual, 1e-10);
  EXPECT_LT(r.best_residual, 1e-10);
}

TEST(Recurrence, AnharmonicNearRecurrence) {
  const auto spec = std::make_shared<const EnergySpectrum>(
      solve_spectrum(ModelParams{1.0, 0.1, 1.0, ModelKind::QuarticPosition}, 128, 28));
  const auto s = build_state(spec, 2.0, 0.0, 28);
  const auto q = build_operator(s.params(), OperatorTag::Q, 28);
  const auto r = almost_periodic_scan(s, q);
  EXPECT_GT(r.first_period_residual, 1e-3);
  EXPECT_LT(r.best_residual, r.first_period_residual);
  EXPECT_LE(r.best_residual, r.grid_best_residual);
  EXPECT_GE(r.times.back(), 50 * r.nominal_period * (1 - 1e-12));
}

TEST(Recurrence, IdentityObservableIsConstant) {
  const auto s = build_state(diag_spectrum(0.1), 2.0, 0.0, 30);
  const auto id = build_operator(s.params(), OperatorTag::Identity, 30);
  const auto r = almost_periodic_scan(s, id, {50, 16, false});
  for (double res : r.residuals) EXPECT_LT(res, 1e-14);
}

TEST(Recurrence, DegenerateGrid) {
  const auto s = build_state(diag_spectrum(0.1), 1.0, 0.0, 20);
  const auto q = build_operator(s.params(), OperatorTag::Q, 20);
  EXPECT_THROW(almost_periodic_scan(s, q, {10, 64, true}), ValidationError);
  EXPECT_THROW(almost_periodic_scan(s, q, {50, 4, true}), ValidationError);
  EXPECT_THROW(almost_periodic_scan(s, build_operator(s.params(), OperatorTag::Q, 10)), ValidationError);
}
