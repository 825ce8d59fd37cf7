#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "anco/phasespace.hpp"

using namespace anco;

namespace {

constexpr double kPi = 3.14159265358979323846;

HamiltonianPtr diag_ham(double lambda, double omega = 1.0, double hbar = 1.0) {
  return classical_hamiltonian(ModelParams{omega, lambda, hbar, ModelKind::DiagonalQuadratic});
}

}  // namespace

TEST(ClassicalEvolve, HarmonicPeriodReturnsToStart) {
  for (double omega : {1.0, 2.3}) {
    const auto pt = PhasePoint::pq(1.0, 0.0, diag_ham(0.0, omega));
    const auto back = classical_evolve(pt, 2 * kPi / omega);
    EXPECT_NEAR(back.first(), 1.0, 1e-12);
    EXPECT_NEAR(back.second(), 0.0, 1e-12);
    EXPECT_EQ(back.chart(), Chart::PQ);
  }
}

TEST(ClassicalEvolve, AmplitudeDependentFrequency) {
  const auto ham = diag_ham(0.1);
  const double radius = 2.0;  // y = R^2 / 2 = 2
  const auto pt = PhasePoint::action_angle(radius, 0.3, ham);
  EXPECT_DOUBLE_EQ(pt.action_y(), 2.0);
  EXPECT_NEAR(pt.hprime(), 1.4, 1e-15);
  EXPECT_NEAR(ham->orbit_frequency(2.0), 1.4, 1e-15);
  for (double t : {0.5, 3.0, 40.0}) {
    const auto moved = classical_evolve(pt, t);
    EXPECT_NEAR(moved.second(), 0.3 + 1.4 * t, 1e-12);
    EXPECT_EQ(moved.first(), radius);
  }
}

TEST(ClassicalEvolve, ZeroTimeIsIdentity) {
  const auto ham = diag_ham(0.5);
  const auto a = PhasePoint::pq(0.4, -1.1, ham);
  const auto b = PhasePoint::action_angle(1.2, -7.0, ham);
  const auto c = PhasePoint::energy_time(2.0, 0.25, ham);
  for (const auto& pt : {a, b, c}) {
    const auto same = classical_evolve(pt, 0.0);
    EXPECT_NEAR(same.first(), pt.first(), 1e-15);
    EXPECT_NEAR(same.second(), pt.second(), 1e-15);
  }
}

TEST(ClassicalEvolve, OriginIsFixed) {
  const auto pt = PhasePoint::pq(0.0, 0.0, diag_ham(0.1));
  const auto moved = classical_evolve(pt, 3.0);
  EXPECT_EQ(moved.first(), 0.0);
  EXPECT_EQ(moved.second(), 0.0);
}

TEST(ClassicalEvolve, EnergyConservedInEveryChart) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const auto ham = diag_ham(0.3, 1.6, 0.7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pt = PhasePoint::pq(u(rng), u(rng), ham);
    const double e0 = pt.energy();
    for (Chart chart : {Chart::PQ, Chart::RTheta, Chart::HTau}) {
      const auto moved = classical_evolve(chart_convert(pt, chart), 10.0 * u(rng));
      EXPECT_NEAR(moved.energy(), e0, 1e-12 * e0);
    }
  }
}

TEST(ClassicalEvolve, FlowComposes) {
  const auto ham = diag_ham(0.2);
  const auto start = PhasePoint::action_angle(1.7, 0.2, ham);
  const auto two_step = classical_evolve(classical_evolve(start, 1.25), 2.5);
  const auto one_step = classical_evolve(start, 3.75);
  EXPECT_EQ(two_step.first(), one_step.first());
  EXPECT_NEAR(two_step.second(), one_step.second(), 1e-15);

  const auto e = PhasePoint::energy_time(1.0, 0.0, ham);
  EXPECT_EQ(classical_evolve(classical_evolve(e, 0.5), 0.25).second(), classical_evolve(e, 0.75).second());
}

TEST(ChartConvert, DefiningRelations) {
  const auto ham = diag_ham(0.0);
  const auto on_axis = chart_convert(PhasePoint::pq(1.5, 0.0, ham), Chart::RTheta);
  EXPECT_DOUBLE_EQ(on_axis.first(), 1.5);
  EXPECT_EQ(on_axis.second(), 0.0);

  // Harmonic: H' = 1 so tau = Theta / omega.
  const auto ham2 = diag_ham(0.0, 2.0);
  const auto ht = chart_convert(PhasePoint::action_angle(1.0, 0.8, ham2), Chart::HTau);
  EXPECT_NEAR(ht.second(), 0.4, 1e-15);
  EXPECT_NEAR(ht.first(), 2.0, 1e-15);  // H = omega^2 R^2 / 2
}

TEST(ChartConvert, QuadrantAwareAngle) {
  // q = R cos(Theta), p = -omega R sin(Theta): the label z = rho e^{-i Theta}
  // then has Re z ~ q and Im z ~ p, so p > 0 sits at negative Theta.
  const double w = 1.5;
  const auto ham = diag_ham(0.0, w);
  const double r = 0.9;
  EXPECT_NEAR(chart_convert(PhasePoint::pq(0.0, -w * r, ham), Chart::RTheta).second(), kPi / 2, 1e-15);
  EXPECT_NEAR(chart_convert(PhasePoint::pq(0.0, w * r, ham), Chart::RTheta).second(), -kPi / 2, 1e-15);
  EXPECT_NEAR(chart_convert(PhasePoint::pq(-r, 0.0, ham), Chart::RTheta).second(), kPi, 1e-15);
  EXPECT_NEAR(chart_convert(PhasePoint::pq(0.0, w * r, ham), Chart::RTheta).first(), r, 1e-15);
}

TEST(ChartConvert, RoundTripsAreIdentity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  const auto ham = diag_ham(0.1, 0.8, 1.3);
  for (int trial = 0; trial < 200; ++trial) {
    const double q = u(rng), p = u(rng);
    const auto pt = PhasePoint::pq(q, p, ham);
    for (Chart via : {Chart::RTheta, Chart::HTau}) {
      const auto back = chart_convert(chart_convert(pt, via), Chart::PQ);
      EXPECT_NEAR(back.first(), q, 1e-12 * std::max(1.0, std::abs(q)));
      EXPECT_NEAR(back.second(), p, 1e-12 * std::max(1.0, std::abs(p)));
      EXPECT_NEAR(chart_convert(pt, via).energy(), pt.energy(), 1e-12 * pt.energy());
    }
  }
}

TEST(ChartConvert, CoveringSpaceAnglePreserved) {
  const auto ham = diag_ham(0.1);
  const auto pt = PhasePoint::action_angle(2.0, 25.0, ham);
  const auto ht = chart_convert(pt, Chart::HTau);
  const auto back = chart_convert(ht, Chart::RTheta);
  EXPECT_NEAR(back.second(), 25.0, 1e-12);
}

TEST(ChartConvert, OriginAngleIsDegenerate) {
  const auto pt = PhasePoint::pq(0.0, 0.0, diag_ham(0.1));
  EXPECT_THROW(chart_convert(pt, Chart::RTheta), DegenerateInputError);
  EXPECT_THROW(chart_convert(pt, Chart::HTau), DegenerateInputError);
  EXPECT_NO_THROW(chart_convert(pt, Chart::PQ));
}

TEST(PhasePoint, Validation) {
  const auto ham = diag_ham(0.1);
  EXPECT_THROW(PhasePoint::action_angle(-1.0, 0.0, ham), ValidationError);
  EXPECT_THROW(PhasePoint::pq(std::nan(""), 0.0, ham), ValidationError);
  EXPECT_THROW(PhasePoint::pq(1.0, 0.0, nullptr), ValidationError);
  EXPECT_THROW(classical_hamiltonian(ModelParams{1.0, 0.1, 1.0, ModelKind::QuarticPosition}), ValidationError);
}

TEST(PhasePoint, DimensionlessRadius) {
  const double w = 2.0, hbar = 0.5;
  const auto pt = PhasePoint::action_angle(1.2, 0.0, diag_ham(0.0, w, hbar));
  EXPECT_NEAR(pt.rho(), 1.2 * std::sqrt(w / (2 * hbar)), 1e-15);
  EXPECT_NEAR(pt.radius(), 1.2, 1e-15);
}

TEST(BohrAction, UnitOrbit) {
  const auto pt = PhasePoint::pq(std::sqrt(2.0), 0.0, diag_ham(0.0));
  EXPECT_NEAR(bohr_action(pt), 1.0, 1e-15);
  EXPECT_NEAR(pt.rho() * pt.rho(), 1.0, 1e-15);
}

TEST(BohrAction, IndependentOfLambda) {
  const double ref = bohr_action(PhasePoint::pq(0.7, -1.9, diag_ham(0.0)));
  for (double lam : {0.05, 0.1, 0.5, 3.0}) EXPECT_EQ(bohr_action(PhasePoint::pq(0.7, -1.9, diag_ham(lam))), ref);
}

TEST(BohrAction, InvariantUnderFlow) {
  const auto pt = PhasePoint::pq(1.1, 0.3, diag_ham(0.4));
  for (double t : {0.3, 7.0, 123.0}) EXPECT_NEAR(bohr_action(classical_evolve(pt, t)), bohr_action(pt), 1e-12);
}

TEST(BohrAction, MatchesOrbitIntegral) {
  // Oracle: integrate p dq = p qdot dt = H'(y) p^2 dt over one period of the
  // sampled flow with the periodic trapezoid rule, then divide by h = 2 pi hbar.
  const double w = 1.3, hbar = 0.8;
  const auto ham = diag_ham(0.1, w, hbar);
  const auto pt = PhasePoint::pq(1.4, -0.6, ham);
  const double period = 2 * kPi / (w * pt.hprime());
  const std::size_t n = 256;
  const auto samples = sample_trajectory(pt, period, n + 1);
  double integral = 0.0;
  for (std::size_t j = 0; j < n; ++j) integral += pt.hprime() * samples[j].p * samples[j].p;
  integral *= period / static_cast<double>(n);
  EXPECT_NEAR(integral / (2 * kPi * hbar), bohr_action(pt), 1e-8);
  // Closing the orbit brings the sampler back to the start.
  EXPECT_NEAR(samples.back().q, 1.4, 1e-12);
  EXPECT_NEAR(samples.back().p, -0.6, 1e-12);
}

TEST(Trajectory, ColumnsConsistent) {
  const auto ham = diag_ham(0.1);
  const auto pt = PhasePoint::action_angle(2.0, 0.5, ham);
  const auto samples = sample_trajectory(pt, 30.0, 301);
  ASSERT_EQ(samples.size(), 301u);
  for (std::size_t j = 1; j < samples.size(); ++j) {
    EXPECT_GT(samples[j].theta_unwrapped, samples[j - 1].theta_unwrapped);  // unwrapped
    EXPECT_NEAR(samples[j].energy, pt.energy(), 1e-12);
    EXPECT_NEAR(samples[j].tau - samples[0].tau, samples[j].t, 1e-12);
    EXPECT_NEAR(std::hypot(samples[j].q, samples[j].p), samples[j].radius, 1e-12);
  }
  EXPECT_THROW(sample_trajectory(pt, 1.0, 1), ValidationError);
}

TEST(ClassicalHamiltonian, DiagonalInverse) {
  const auto ham = diag_ham(0.1);
  for (double y : {0.0, 0.3, 2.0, 17.5}) EXPECT_NEAR(ham->inverse(ham->value(y)), y, 1e-13 * std::max(1.0, y));
  EXPECT_THROW(ham->value(-0.1), ValidationError);
}

TEST(ClassicalHamiltonian, CustomCallable) {
  auto ham = std::make_shared<const ClassicalHamiltonian>(ClassicalHamiltonian::custom(
      ModelParams{}, [](double y) { return y + 0.25 * y * y * y; }, [](double y) { return 1.0 + 0.75 * y * y; }));
  EXPECT_NEAR(ham->inverse(ham->value(1.7)), 1.7, 1e-12);
  const auto pt = PhasePoint::action_angle(2.0, 0.0, ham);  // y = 2
  EXPECT_NEAR(classical_evolve(pt, 1.0).second(), 4.0, 1e-15);
}

TEST(ClassicalHamiltonian, FromSpectrumInterpolatesLevels) {
  EnergySpectrum s;
  s.params = ModelParams{1.0, 0.1, 1.0, ModelKind::QuarticPosition};
  for (int n = 0; n < 10; ++n) s.levels.push_back((n + 0.5) + 0.1 * (n + 0.5) * (n + 0.5));
  s.n_converged = 10;
  const auto h = ClassicalHamiltonian::from_spectrum(s);
  for (int n = 0; n < 10; ++n) EXPECT_NEAR(h.value(n + 0.5), s.levels[n], 1e-14);
  for (double y = 0.0; y < 9.5; y += 0.25) EXPECT_GT(h.derivative(y), 0.0);
  EXPECT_DOUBLE_EQ(h.y_max(), 9.5);
  EXPECT_THROW(h.value(10.0), ValidationError);
}
