#include <cmath>

#include <gtest/gtest.h>

#include "anco/identity.hpp"

using namespace anco;

namespace {

EnergySpectrum diag(double lambda, std::size_t dim = 64) {
  return solve_spectrum(ModelParams{1.0, lambda, 1.0, ModelKind::DiagonalQuadratic}, dim, 1);
}

}  // namespace

TEST(ThetaAverage, HarmonicSingleWindowIsDiagonal) {
  const auto avg = theta_average(diag(0.0), 2.0, CesaroPlan{1}, 24);
  EXPECT_LT(offdiag_max(avg.matrix), 1e-10);
  for (Eigen::Index n = 0; n < 24; ++n) {
    EXPECT_NEAR(avg.matrix(n, n).real(), poisson_weight(static_cast<std::size_t>(n), 4.0), 1e-10);
  }
}

TEST(ThetaAverage, DiagonalIsPoissonAtEveryLength) {
  for (double lam : {0.0, 0.1, 0.5}) {
    const auto spec = diag(lam);
    for (std::size_t n_periods : {1u, 3u, 16u}) {
      const auto avg = theta_average(spec, 2.0, CesaroPlan{n_periods}, 24);
      for (Eigen::Index n = 0; n < 24; ++n) {
        EXPECT_NEAR(std::abs(avg.matrix(n, n) - poisson_weight(static_cast<std::size_t>(n), 4.0)), 0.0, 1e-10);
      }
      EXPECT_LT((avg.matrix - avg.matrix.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(ThetaAverage, BlockIndependentOfBasisSize) {
  const auto spec = diag(0.1);
  const auto small = theta_average(spec, 2.0, CesaroPlan{4}, 24);
  const auto large = theta_average(spec, 2.0, CesaroPlan{4}, 40);
  EXPECT_LT((small.matrix - large.matrix.topLeftCorner(24, 24)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(small.outside_mass, poisson_tail(24, 2.0), 1e-25);
}

TEST(ThetaAverage, QuadratureSelfCheckReported) {
  const auto avg = theta_average(diag(0.1), 2.0, CesaroPlan{4}, 24);
  EXPECT_LT(avg.quad_error, 1e-12);
  EXPECT_GE(avg.panels_per_window, 2u);
}

TEST(ThetaAverage, AnharmonicOffDiagonalsDecay) {
  const auto report = resolution_study(diag(0.1), 2.0, {1, 4, 16, 64}, 24, 12);
  ASSERT_EQ(report.cesaro.size(), 4u);
  EXPECT_TRUE(report.offdiag_non_increasing());
  for (std::size_t i = 1; i < 4; ++i) EXPECT_LT(report.cesaro[i].offdiag_max, report.cesaro[i - 1].offdiag_max);
  EXPECT_NEAR(report.decay_slope, -1.0, 0.2);
  for (const auto& c : report.cesaro) EXPECT_LT(c.diag_poisson_dev, 1e-10);
}

TEST(ThetaAverage, PlanValidation) {
  const auto spec = diag(0.1);
  EXPECT_THROW(theta_average(spec, 2.0, CesaroPlan{0}, 24), ValidationError);
  EXPECT_THROW(theta_average(spec, 2.0, CesaroPlan{1, 8}, 24), ValidationError);  // below 8 (dim - 1)
  EXPECT_NO_THROW(theta_average(spec, 2.0, CesaroPlan{1, 8 * 23}, 24));
  EXPECT_THROW(theta_average(spec, 2.0, CesaroPlan{1}, 1), ValidationError);
  EXPECT_THROW(theta_average(spec, -1.0, CesaroPlan{1}, 24), ValidationError);
  EXPECT_THROW(theta_average(diag(0.1, 16), 2.0, CesaroPlan{1}, 24), ValidationError);
}

TEST(ThetaAverage, UnderResolvedIsDetected) {
  CesaroPlan plan{1};
  plan.quad_tol = 1e-30;  // no finite rule meets this; the node-halving check must fire
  EXPECT_THROW(theta_average(diag(0.1), 2.0, plan, 24), NumericalError);
}

TEST(Commensurate, HarmonicFlagsEveryPair) {
  const auto pairs = commensurate_pairs(diag(0.0), 1.0, 6);
  EXPECT_EQ(pairs.size(), 15u);
}

TEST(Commensurate, GenericSpectrumFlagsNothing) {
  EnergySpectrum s;
  s.params = ModelParams{};
  for (int n = 0; n < 8; ++n) s.levels.push_back(n + std::sqrt(2.0) * 0.01 * n * n);
  s.n_converged = 8;
  EXPECT_TRUE(commensurate_pairs(s, 1.0, 8).empty());
  // Levels 0 and 2 differ by 2 + 4 sqrt(2)/100; a matching H' makes them commensurate.
  const auto pairs = commensurate_pairs(s, (2 + 0.04 * std::sqrt(2.0)) / 3.0, 3);
  ASSERT_FALSE(pairs.empty());
  EXPECT_EQ(pairs.front(), std::make_pair(std::size_t{0}, std::size_t{2}));
}

TEST(Radial, GammaIntegralsAreOne) {
  const auto r = radial_resolution(diag(0.1), 13);
  ASSERT_EQ(r.radial_masses.size(), 13u);
  EXPECT_NEAR(r.radial_masses[0], 1.0, 1e-12);
  EXPECT_NEAR(r.radial_masses[7], 1.0, 1e-8);
  EXPECT_LT(r.diag_dev, 1e-8);
  EXPECT_LT(r.radial_tail_bound, 1e-10);
}

TEST(Radial, TailBoundEnforced) {
  RadialQuadrature quad;
  quad.rho2_max = 10.0;
  EXPECT_THROW(radial_resolution(diag(0.1), 13, quad), NumericalError);
}

TEST(Radial, NonConvergenceDetected) {
  RadialQuadrature quad;
  quad.panels = 1;
  EXPECT_THROW(radial_resolution(diag(0.1), 13, quad), NumericalError);
}

TEST(Radial, Validation) {
  EXPECT_THROW(radial_resolution(diag(0.1), 0), ValidationError);
  EXPECT_THROW(radial_resolution(diag(0.1, 8), 12), ValidationError);
  RadialQuadrature quad;
  quad.panels = 0;
  EXPECT_THROW(radial_resolution(diag(0.1), 4, quad), ValidationError);
}

TEST(Radial, AlternativeCoefficientsNeedAnotherMeasure) {
  const auto masses = alternative_radial_masses(8);
  bool differs = false;
  for (double m : masses) differs = differs || std::abs(m - 1.0) > 1e-3;
  EXPECT_TRUE(differs);
  for (double m : masses) EXPECT_GT(m, 0.0);
}

TEST(Measure, PolarAndCartesianAgree) {
  for (double omega : {1.0, 2.0}) {
    for (double hbar : {1.0, 0.5}) {
      const auto m = measure_bookkeeping(ModelParams{omega, 0.0, hbar, ModelKind::DiagonalQuadratic}, 1.0, -0.5, 0.3);
      EXPECT_NEAR(m.cartesian, m.exact, 1e-10 * m.exact);
      EXPECT_NEAR(m.polar, m.exact, 1e-8 * m.exact);
    }
  }
  EXPECT_THROW(measure_bookkeeping(ModelParams{}, 0.0, 0.0, 0.0), ValidationError);
}
