// Follows a coherent state of the quartic oscillator for a few orbits and
// prints the quantum mean position next to the classical orbit of its label.

#include <cmath>
#include <cstdio>

#include "anco/anco.hpp"

int main() {
  using namespace anco;
  const ModelParams params{1.0, 0.1, 1.0, ModelKind::QuarticPosition};
  const auto spec = std::make_shared<const EnergySpectrum>(solve_spectrum(params, 128, 40));
  const double rho = 2.0;
  const auto state = build_state(spec, rho, 0.0, min_state_dim(rho));
  const auto ops = OperatorSet::for_state(state);

  const auto start = PhasePoint::action_angle(rho * std::sqrt(2.0 * params.hbar / params.omega), 0.0, state.hamiltonian);
  const double period = 2.0 * detail::pi / state.orbit_frequency();
  std::printf("%8s %12s %12s %12s\n", "t/T", "<q>", "q_classical", "dq*dp");
  for (int k = 0; k <= 24; ++k) {
    const double t = period * k / 8.0;
    const auto r = expectation_report(evolve_state(state, t), ops);
    const auto classical = chart_convert(classical_evolve(start, t), Chart::PQ);
    std::printf("%8.3f %12.6f %12.6f %12.6f\n", k / 8.0, r.mean_q, classical.first(), r.uncertainty_product);
  }
}
