#pragma once

// Coherent states |rho, Theta) = sum_n c_n(rho) exp(-i E_n Theta / (hbar omega H')) |n>
// over an arbitrary nondegenerate spectrum, with c_n the Poisson amplitudes
// exp(-rho^2/2) rho^n / sqrt(n!).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include "anco/detail/numeric.hpp"
#include "anco/error.hpp"
#include "anco/phasespace.hpp"
#include "anco/spectrum.hpp"

namespace anco {

using SpectrumPtr = std::shared_ptr<const EnergySpectrum>;

inline constexpr double kDefaultMaxTail = 1e-12;

// exp(-rho^2/2) rho^n / sqrt(n!), evaluated in log space.
inline double poisson_amplitude(std::size_t n, double rho) {
  if (rho == 0.0) return n == 0 ? 1.0 : 0.0;
  const double nd = static_cast<double>(n);
  return std::exp(-0.5 * rho * rho + nd * std::log(rho) - 0.5 * std::lgamma(nd + 1.0));
}

// Poisson weight exp(-mu) mu^n / n! with mu = rho^2.
inline double poisson_weight(std::size_t n, double mu) {
  if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
  const double nd = static_cast<double>(n);
  return std::exp(-mu + nd * std::log(mu) - std::lgamma(nd + 1.0));
}

// Probability mass of levels n >= dim: P(dim, rho^2).
inline double poisson_tail(std::size_t dim, double rho) {
  if (dim == 0) return 1.0;
  if (rho == 0.0) return 0.0;
  return boost::math::gamma_p(static_cast<double>(dim), rho * rho);
}

// Smallest basis size whose Poisson tail is below max_tail.
inline std::size_t min_state_dim(double rho, double max_tail = kDefaultMaxTail) {
  std::size_t dim = static_cast<std::size_t>(rho * rho) + 1;
  while (poisson_tail(dim, rho) >= max_tail) ++dim;
  return dim;
}

struct CoherentState {
  double rho = 0.0;
  double theta = 0.0;
  Eigen::VectorXcd coeffs;
  SpectrumPtr spectrum;
  HamiltonianPtr hamiltonian;
  double hprime = 1.0;       // H' at y = hbar omega rho^2
  double trunc_mass = 0.0;   // Poisson mass discarded by the truncation

  std::size_t dim() const { return static_cast<std::size_t>(coeffs.size()); }
  const ModelParams& params() const { return spectrum->params; }
  // Angular frequency of the labelling orbit.
  double orbit_frequency() const { return spectrum->params.omega * hprime; }
};

inline CoherentState build_state(SpectrumPtr spectrum, HamiltonianPtr ham, double rho, double theta,
                                 std::size_t dim, double max_tail = kDefaultMaxTail) {
  if (!spectrum || !ham) throw ValidationError("build_state needs a spectrum and a classical Hamiltonian");
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw ValidationError("rho must be finite and non-negative");
  if (!std::isfinite(theta)) throw ValidationError("theta must be finite");
  if (dim == 0) throw ValidationError("state dim must be positive");

  const double tail = poisson_tail(dim, rho);
  if (tail >= max_tail) {
    const std::size_t need = min_state_dim(rho, max_tail);
    throw TruncationError("truncation mass " + std::to_string(tail) + " at dim " + std::to_string(dim) +
                              " for rho = " + std::to_string(rho) + "; need dim >= " + std::to_string(need),
                          need);
  }
  const std::size_t usable = std::min(spectrum->n_converged, spectrum->levels.size());
  if (usable < dim) {
    throw ValidationError("state dim " + std::to_string(dim) + " exceeds the " + std::to_string(usable) +
                          " converged levels of the spectrum");
  }

  const auto& p = spectrum->params;
  CoherentState s;
  s.rho = rho;
  s.theta = theta;
  s.spectrum = spectrum;
  s.hamiltonian = ham;
  s.hprime = ham->derivative(p.hbar * p.omega * rho * rho);
  s.trunc_mass = tail;

  const double divisor = p.hbar * p.omega * s.hprime;
  const double renorm = 1.0 / std::sqrt(1.0 - tail);
  s.coeffs.resize(static_cast<Eigen::Index>(dim));
  for (std::size_t n = 0; n < dim; ++n) {
    const double phase = -spectrum->levels[n] * theta / divisor;
    s.coeffs[static_cast<Eigen::Index>(n)] = std::polar(renorm * poisson_amplitude(n, rho), phase);
  }
  return s;
}

inline CoherentState build_state(SpectrumPtr spectrum, double rho, double theta, std::size_t dim,
                                 double max_tail = kDefaultMaxTail) {
  if (!spectrum) throw ValidationError("build_state needs a spectrum");
  auto ham = classical_hamiltonian(*spectrum);
  return build_state(std::move(spectrum), std::move(ham), rho, theta, dim, max_tail);
}

// Schroedinger evolution |n> -> exp(-i E_n t / hbar)|n>. The label moves along
// the classical orbit, Theta -> Theta + omega H' t.
inline CoherentState evolve_state(const CoherentState& state, double t) {
  CoherentState out = state;
  const double hbar = state.params().hbar;
  for (Eigen::Index n = 0; n < out.coeffs.size(); ++n) {
    out.coeffs[n] *= std::polar(1.0, -state.spectrum->levels[static_cast<std::size_t>(n)] * t / hbar);
  }
  out.theta = state.theta + state.orbit_frequency() * t;
  return out;
}

// Canonical coherent state exp(-|z|^2/2) z^n / sqrt(n!).
inline Eigen::VectorXcd canonical_coherent_coeffs(std::complex<double> z, std::size_t dim) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(dim));
  const double r = std::abs(z);
  const double arg = std::arg(z);
  for (std::size_t n = 0; n < dim; ++n) {
    v[static_cast<Eigen::Index>(n)] = std::polar(poisson_amplitude(n, r), static_cast<double>(n) * arg);
  }
  return v;
}

// max_n |a_n e^{i phi} - b_n| with phi = arg <a|b>, the phase-insensitive distance.
inline double aligned_max_deviation(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  if (a.size() != b.size()) throw ValidationError("aligned_max_deviation: size mismatch");
  const std::complex<double> overlap = a.dot(b);  // conj(a) . b
  const std::complex<double> phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : 1.0;
  return (a * phase - b).cwiseAbs().maxCoeff();
}

inline std::complex<double> overlap(const CoherentState& a, const CoherentState& b) {
  if (a.dim() != b.dim()) throw ValidationError("overlap: dimension mismatch");
  return a.coeffs.dot(b.coeffs);
}

// ---------------------------------------------------------------------------
// Expectation values

struct OperatorSet {
  OperatorMatrix q, p, q2, p2, a;

  static OperatorSet build(const ModelParams& params, std::size_t dim) {
    return {build_operator(params, OperatorTag::Q, dim), build_operator(params, OperatorTag::P, dim),
            build_operator(params, OperatorTag::Q2, dim), build_operator(params, OperatorTag::P2, dim),
            build_operator(params, OperatorTag::A, dim)};
  }
  // Operators large enough for every matrix element a state of `state_dim` touches.
  static OperatorSet for_state(const CoherentState& s) { return build(s.params(), s.dim() + 4); }

  std::size_t dim() const { return q.dim; }
};

struct ExpectationReport {
  double mean_q = 0.0;
  double mean_p = 0.0;
  double var_q = 0.0;
  double var_p = 0.0;
  double uncertainty_product = 0.0;
  // || (a - rho e^{-i Theta}) |state> || over levels 0..dim-2. The top row would
  // need the discarded amplitude of level dim, so it measures truncation, not
  // the eigenvalue mismatch; that loss is reported separately as trunc_mass.
  double a_residual_norm = 0.0;
  double k_value = 0.0;          // var_q = (hbar / 2 omega)(1 + rho^2 k)
};

inline std::complex<double> expectation(const Eigen::VectorXcd& padded, const OperatorMatrix& op) {
  return padded.dot(op.entries * padded);
}

inline Eigen::VectorXcd padded_coeffs(const CoherentState& s, std::size_t dim) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
  v.head(s.coeffs.size()) = s.coeffs;
  return v;
}

inline ExpectationReport expectation_report(const CoherentState& state, const OperatorSet& ops) {
  const std::size_t need = state.dim() + 2;
  for (const auto* op : {&ops.q, &ops.p, &ops.q2, &ops.p2, &ops.a}) {
    if (op->dim < need) {
      throw ValidationError("operator '" + std::string(to_string(op->tag)) + "' has dim " + std::to_string(op->dim) +
                            ", state needs >= " + std::to_string(need));
    }
  }
  const auto& params = state.params();
  const Eigen::VectorXcd s = padded_coeffs(state, ops.dim());

  ExpectationReport r;
  r.mean_q = expectation(s, ops.q).real();
  r.mean_p = expectation(s, ops.p).real();
  r.var_q = std::max(0.0, expectation(s, ops.q2).real() - r.mean_q * r.mean_q);
  r.var_p = std::max(0.0, expectation(s, ops.p2).real() - r.mean_p * r.mean_p);
  r.uncertainty_product = std::sqrt(r.var_q * r.var_p);
  const std::complex<double> alpha = std::polar(state.rho, -state.theta);
  const auto resolved = static_cast<Eigen::Index>(state.dim() - 1);
  r.a_residual_norm = (ops.a.entries * s - alpha * s).head(resolved).norm();
  const double vacuum_var = params.hbar / (2.0 * params.omega);
  r.k_value = state.rho > 0.0 ? (r.var_q / vacuum_var - 1.0) / (state.rho * state.rho) : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Almost-periodic behaviour of <O(t)>

struct RecurrencePlan {
  double n_periods = 50.0;
  std::size_t samples_per_period = 64;
  bool refine = true;
};

struct RecurrenceReport {
  double nominal_period = 0.0;  // 2 pi / (omega H')
  std::vector<double> times;
  std::vector<std::complex<double>> values;
  std::vector<double> residuals;  // |<O(t)> - <O(0)>|
  double first_period_residual = 0.0;
  // Minimum over grid points with t >= nominal_period / 2.
  double grid_best_time = 0.0;
  double grid_best_residual = 0.0;
  // Grid minimum polished by a local 1-D minimization.
  double best_time = 0.0;
  double best_residual = 0.0;
};

inline std::complex<double> expectation_at(const CoherentState& state, const Eigen::MatrixXcd& block, double t) {
  const double hbar = state.params().hbar;
  Eigen::VectorXcd v = state.coeffs;
  for (Eigen::Index n = 0; n < v.size(); ++n) {
    v[n] *= std::polar(1.0, -state.spectrum->levels[static_cast<std::size_t>(n)] * t / hbar);
  }
  return v.dot(block * v);
}

inline RecurrenceReport almost_periodic_scan(const CoherentState& state, const OperatorMatrix& observable,
                                             const RecurrencePlan& plan = {}) {
  if (!(plan.n_periods >= 50.0) || plan.samples_per_period < 8) {
    throw ValidationError("degenerate recurrence grid: need >= 50 periods and >= 8 samples per period");
  }
  if (observable.dim < state.dim()) throw ValidationError("observable smaller than the state basis");
  const auto d = static_cast<Eigen::Index>(state.dim());
  const Eigen::MatrixXcd block = observable.entries.topLeftCorner(d, d);

  RecurrenceReport r;
  r.nominal_period = detail::two_pi / state.orbit_frequency();
  const double dt = r.nominal_period / static_cast<double>(plan.samples_per_period);
  const auto count =
      static_cast<std::size_t>(std::llround(plan.n_periods * static_cast<double>(plan.samples_per_period))) + 1;
  const std::complex<double> initial = expectation_at(state, block, 0.0);

  r.grid_best_residual = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < count; ++j) {
    const double t = dt * static_cast<double>(j);
    const auto v = expectation_at(state, block, t);
    const double res = std::abs(v - initial);
    r.times.push_back(t);
    r.values.push_back(v);
    r.residuals.push_back(res);
    if (t >= 0.5 * r.nominal_period && res < r.grid_best_residual) {
      r.grid_best_residual = res;
      r.grid_best_time = t;
    }
  }
  r.first_period_residual = std::abs(expectation_at(state, block, r.nominal_period) - initial);

  r.best_time = r.grid_best_time;
  r.best_residual = r.grid_best_residual;
  if (plan.refine) {
    auto f = [&](double t) { return std::abs(expectation_at(state, block, t) - initial); };
    std::uintmax_t iters = 100;
    const double lo = std::max(0.5 * r.nominal_period, r.grid_best_time - dt);
    const double hi = r.grid_best_time + dt;
    const auto [t_min, f_min] = boost::math::tools::brent_find_minima(f, lo, hi, 40, iters);
    if (f_min < r.best_residual) {
      r.best_time = t_min;
      r.best_residual = f_min;
    }
  }
  return r;
}

}  // namespace anco
