#pragma once

// Effective potential u(Q) whose orbit periods reproduce a given period
// function T(H), and the (H, tau) <-> (P, Q) chart of that potential.
//
// Wells are even with u(0) = 0 and strictly increasing on Q >= 0. Writing
// s = sqrt(u), the Abel pair used throughout is
//
//   Q(s)     = (sqrt(2) s / 2 pi) int_0^{pi/2} T(s^2 sin^2 phi) sin phi dphi
//   T(H) / 2 = sqrt(2) int_0^{pi/2} Q'(sqrt(H) sin phi) dphi
//
// Both integrands are regular, so plain Gauss-Legendre panels suffice.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <math.h>  // boost pchip calls isnan unqualified

#include <boost/math/interpolators/barycentric_rational.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/roots.hpp>

#include "anco/detail/numeric.hpp"
#include "anco/error.hpp"
#include "anco/phasespace.hpp"
#include "anco/spectrum.hpp"

namespace anco {

enum class PeriodSource { ClosedForm, SpectrumDerived, Sampled };

inline std::string_view to_string(PeriodSource s) {
  switch (s) {
    case PeriodSource::ClosedForm: return "closed-form";
    case PeriodSource::SpectrumDerived: return "spectrum-derived";
    case PeriodSource::Sampled: return "sampled";
  }
  return "?";
}

// Full orbit period T as a function of energy on [0, h_max].
struct PeriodFunction {
  std::vector<double> energies;  // strictly increasing, starting at 0
  std::vector<double> periods;
  PeriodSource source = PeriodSource::Sampled;
  double h_max = 0.0;
  std::string provenance;  // e.g. a spectrum hash
  std::function<double(double)> eval;

  double operator()(double energy) const {
    if (!(energy >= 0.0) || energy > h_max * (1.0 + 1e-12)) {
      throw ValidationError("energy " + std::to_string(energy) + " outside the period table [0, " +
                            std::to_string(h_max) + "]");
    }
    return eval(std::min(energy, h_max));
  }
};

namespace detail {

inline std::vector<double> period_sample_energies(double h_max, std::size_t count) {
  // 0, then logarithmic from h_max * 1e-4 up to h_max.
  std::vector<double> e{0.0};
  const double lo = std::log(h_max * 1e-4);
  const double hi = std::log(h_max);
  for (std::size_t i = 0; i < count; ++i) {
    e.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1)));
  }
  e.back() = h_max;
  return e;
}

inline PeriodFunction sample_period_function(std::function<double(double)> t_of_h, double h_max, std::size_t count,
                                             PeriodSource source) {
  if (!(h_max > 0.0)) throw ValidationError("period function needs h_max > 0");
  if (count < 4) throw ValidationError("period function needs at least 4 samples");
  PeriodFunction f;
  f.source = source;
  f.h_max = h_max;
  f.energies = period_sample_energies(h_max, count);
  for (double e : f.energies) {
    const double t = t_of_h(e);
    if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("period must be positive and finite");
    f.periods.push_back(t);
  }
  f.eval = std::move(t_of_h);
  return f;
}

}  // namespace detail

// T(H) = 2 pi / (omega H'(y(H))) from a classical Hamiltonian.
inline PeriodFunction period_function(HamiltonianPtr ham, double h_max, std::size_t samples = 200,
                                      PeriodSource source = PeriodSource::ClosedForm) {
  if (!ham) throw ValidationError("period_function needs a classical Hamiltonian");
  if (std::isfinite(ham->y_max()) && h_max > ham->value(ham->y_max()) * (1.0 + 1e-12)) {
    throw ValidationError("h_max " + std::to_string(h_max) + " exceeds the classical Hamiltonian's range " +
                          std::to_string(ham->value(ham->y_max())));
  }
  auto t_of_h = [ham](double energy) { return detail::two_pi / ham->orbit_frequency(ham->inverse(energy)); };
  return detail::sample_period_function(t_of_h, h_max, samples, source);
}

// Closed form for the diagonal model.
inline PeriodFunction period_function(const ModelParams& params, double h_max, std::size_t samples = 200) {
  return period_function(classical_hamiltonian(params), h_max, samples, PeriodSource::ClosedForm);
}

// H'(y) from the monotone interpolation of (n + 1/2) hbar omega -> E_n.
inline PeriodFunction period_function(const EnergySpectrum& spectrum, double h_max, std::size_t samples = 200) {
  auto ham = std::make_shared<const ClassicalHamiltonian>(ClassicalHamiltonian::from_spectrum(spectrum));
  auto f = period_function(std::move(ham), h_max, samples, PeriodSource::SpectrumDerived);
  f.provenance = spectrum_hash(spectrum);
  return f;
}

// T(H) = const, the isochronous case.
inline PeriodFunction constant_period(double period, double h_max, std::size_t samples = 200) {
  if (!(period > 0.0)) throw ValidationError("period must be positive");
  return detail::sample_period_function([period](double) { return period; }, h_max, samples,
                                        PeriodSource::ClosedForm);
}

// Monotone cubic through tabulated (H, T) samples; energies must start at 0.
inline PeriodFunction period_function_from_samples(std::vector<double> energies, std::vector<double> periods) {
  if (energies.size() != periods.size() || energies.size() < 4) {
    throw ValidationError("period samples: need >= 4 (H, T) pairs of equal length");
  }
  if (energies.front() != 0.0) throw ValidationError("period samples must start at H = 0");
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (i > 0 && !(energies[i] > energies[i - 1])) throw ValidationError("period sample energies must increase");
    if (!(periods[i] > 0.0) || !std::isfinite(periods[i])) throw ValidationError("periods must be positive");
  }
  PeriodFunction f;
  f.source = PeriodSource::Sampled;
  f.h_max = energies.back();
  f.energies = energies;
  f.periods = periods;
  using Interp = boost::math::interpolators::pchip<std::vector<double>>;
  auto interp = std::make_shared<Interp>(std::move(energies), std::move(periods));
  f.eval = [interp](double e) { return (*interp)(e); };
  return f;
}

// ---------------------------------------------------------------------------

struct RoundTripSample {
  double energy = 0.0;
  double period_in = 0.0;
  double period_out = 0.0;
  double rel_error = 0.0;
};

struct TauChart {
  double energy = 0.0;
  std::vector<double> q;
  std::vector<double> tau;
};

// Even potential sampled on Q >= 0. Interpolates Q(s), s = sqrt(u), which is
// smooth and odd for wells that are harmonic at the bottom.
class PotentialTable {
 public:
  PotentialTable(std::vector<double> q, std::vector<double> u) : q_(std::move(q)), u_(std::move(u)) {
    if (q_.size() != u_.size() || q_.size() < 4) throw ValidationError("potential table needs >= 4 (Q, u) pairs");
    if (q_.front() != 0.0 || u_.front() != 0.0) throw ValidationError("potential table must start at Q = 0, u = 0");
    for (std::size_t i = 1; i < q_.size(); ++i) {
      if (!std::isfinite(q_[i]) || !std::isfinite(u_[i])) throw NumericalError("non-finite potential table entry");
      if (!(q_[i] > q_[i - 1])) throw ValidationError("potential table: Q must be strictly increasing");
      if (!(u_[i] > u_[i - 1])) throw ValidationError("potential table: u must be strictly increasing");
    }
    std::vector<double> s, qq;
    const std::size_t n = q_.size();
    for (std::size_t i = n; i-- > 1;) {
      s.push_back(-std::sqrt(u_[i]));
      qq.push_back(-q_[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      s.push_back(std::sqrt(u_[i]));
      qq.push_back(q_[i]);
    }
    interp_ = std::make_shared<const Interp>(std::move(s), std::move(qq), 3);
  }

  const std::vector<double>& q() const { return q_; }
  const std::vector<double>& u() const { return u_; }
  double u_max() const { return u_.back(); }
  double q_max() const { return q_.back(); }

  double q_of_s(double s) const { return (*interp_)(s); }
  double dq_ds(double s) const { return interp_->prime(s); }
  double q_of_u(double u) const { return q_of_s(std::sqrt(u)); }

  double u_of_q(double q) const {
    q = std::abs(q);
    if (q > q_max() * (1.0 + 1e-12)) throw ValidationError("Q beyond the potential table");
    if (q == 0.0) return 0.0;
    auto f = [&](double s) { return q_of_s(s) - q; };
    std::uintmax_t iters = 200;
    const auto [lo, hi] = boost::math::tools::toms748_solve(f, 0.0, std::sqrt(u_max()), -q, q_max() - q,
                                                            boost::math::tools::eps_tolerance<double>(), iters);
    const double s = 0.5 * (lo + hi);
    return s * s;
  }

  // Provenance carried into exports.
  std::string source;
  std::string source_hash;
  double tol = 0.0;
  std::vector<RoundTripSample> residuals;
  double max_residual = 0.0;
  std::vector<TauChart> tau_charts;

 private:
  using Interp = boost::math::barycentric_rational<double>;
  std::vector<double> q_;
  std::vector<double> u_;
  std::shared_ptr<const Interp> interp_;
};

// u(Q) for Q >= 0 as a callable; must be even, zero at 0, increasing.
using PotentialFn = std::function<double(double)>;

namespace detail {

inline constexpr unsigned kAbelRule = 20;
inline constexpr std::size_t kAbelPanels = 32;

// Turning point of a callable well: u(Q_t) = energy.
inline double turning_point(const PotentialFn& u, double energy) {
  double hi = 1.0;
  while (u(hi) < energy) {
    hi *= 2.0;
    if (hi > 1e150) throw ValidationError("potential never reaches the requested energy");
  }
  auto f = [&](double q) { return u(q) - energy; };
  std::uintmax_t iters = 200;
  const auto [lo, up] = boost::math::tools::toms748_solve(f, 0.0, hi, boost::math::tools::eps_tolerance<double>(), iters);
  return 0.5 * (lo + up);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Half-period 2 int_0^{Q_t} dQ / sqrt(2 (H - u(Q)))

inline double period_from_potential(const PotentialTable& table, double energy) {
  if (!(energy > 0.0)) throw ValidationError("energy must be positive");
  if (energy > table.u_max() * (1.0 + 1e-12)) {
    throw ValidationError("energy " + std::to_string(energy) + " beyond the potential table range " +
                          std::to_string(table.u_max()));
  }
  const double root = std::sqrt(std::min(energy, table.u_max()));
  return std::sqrt(2.0) * detail::integrate_panels<detail::kAbelRule>(
                              [&](double phi) { return table.dq_ds(root * std::sin(phi)); }, 0.0, detail::pi / 2,
                              detail::kAbelPanels);
}

inline double period_from_potential(const PotentialFn& u, double energy) {
  if (!(energy > 0.0)) throw ValidationError("energy must be positive");
  const double qt = detail::turning_point(u, energy);
  // Q = Q_t sin(psi) removes the inverse-square-root singularity at Q_t.
  auto integrand = [&](double psi) {
    const double gap = energy - u(qt * std::sin(psi));
    return gap > 0.0 ? qt * std::cos(psi) / std::sqrt(2.0 * gap) : 0.0;
  };
  return 2.0 * detail::integrate_panels<detail::kAbelRule>(integrand, 0.0, detail::pi / 2, 4 * detail::kAbelPanels);
}

// ---------------------------------------------------------------------------

struct InversionOptions {
  std::size_t grid_points = 401;  // uniform in sqrt(u)
  double tol = 1e-4;              // round-trip relative tolerance on T
  std::size_t check_points = 37;  // energies in [0.05, 0.95] h_max
  double u_max = 0.0;             // 0 means the period table's h_max
};

// Q(u) from the Abel inversion of the period function, on a grid uniform in
// sqrt(u), then verified by recomputing T(H) from the table.
inline PotentialTable invert_periods(const PeriodFunction& periods, const InversionOptions& opts = {}) {
  if (opts.grid_points < 8) throw ValidationError("inversion grid needs >= 8 points");
  if (!(opts.tol > 0.0)) throw ValidationError("inversion tol must be positive");
  const double u_max = opts.u_max > 0.0 ? opts.u_max : periods.h_max;
  if (u_max > periods.h_max * (1.0 + 1e-12)) {
    throw ValidationError("requested u_max " + std::to_string(u_max) + " beyond the period table's h_max " +
                          std::to_string(periods.h_max));
  }

  const double s_max = std::sqrt(u_max);
  std::vector<double> q(opts.grid_points), u(opts.grid_points);
  for (std::size_t j = 0; j < opts.grid_points; ++j) {
    const double s = s_max * static_cast<double>(j) / static_cast<double>(opts.grid_points - 1);
    u[j] = s * s;
    if (j == 0) {
      q[j] = 0.0;
      continue;
    }
    const double integral = detail::integrate_panels<detail::kAbelRule>(
        [&](double phi) {
          const double sp = std::sin(phi);
          return periods(u[j] * sp * sp) * sp;
        },
        0.0, detail::pi / 2, detail::kAbelPanels);
    q[j] = std::sqrt(2.0) * s * integral / detail::two_pi;
    if (!std::isfinite(q[j]) || q[j] < 0.0) {
      throw NumericalError("inverted Q(u) is negative or non-finite at u = " + std::to_string(u[j]));
    }
  }
  u.back() = u_max;

  PotentialTable table(std::move(q), std::move(u));
  table.source = std::string(to_string(periods.source));
  table.source_hash = periods.provenance;
  table.tol = opts.tol;

  const std::size_t checks = std::max<std::size_t>(opts.check_points, 2);
  RoundTripSample worst;
  for (std::size_t k = 0; k < checks; ++k) {
    RoundTripSample rt;
    rt.energy = u_max * (0.05 + 0.9 * static_cast<double>(k) / static_cast<double>(checks - 1));
    rt.period_in = periods(rt.energy);
    rt.period_out = 2.0 * period_from_potential(table, rt.energy);
    rt.rel_error = std::abs(rt.period_out - rt.period_in) / rt.period_in;
    if (rt.rel_error >= worst.rel_error) worst = rt;
    table.residuals.push_back(rt);
  }
  table.max_residual = worst.rel_error;
  if (worst.rel_error > opts.tol) {
    throw RoundTripError("period round-trip error " + std::to_string(worst.rel_error) + " at H = " +
                             std::to_string(worst.energy),
                         worst.energy, worst.rel_error);
  }
  return table;
}

// ---------------------------------------------------------------------------
// tau(Q) = int_0^Q dQ' / sqrt(2 (H - u(Q')))

inline std::vector<double> tau_chart(const PotentialTable& table, double energy, const std::vector<double>& q_grid) {
  if (!(energy > 0.0) || energy > table.u_max() * (1.0 + 1e-12)) {
    throw ValidationError("tau_chart: energy outside the potential table");
  }
  const double root = std::sqrt(std::min(energy, table.u_max()));
  const double q_turn = table.q_of_s(root);
  std::vector<double> out;
  out.reserve(q_grid.size());
  for (double qv : q_grid) {
    if (qv < 0.0) throw ValidationError("tau_chart: Q must be non-negative (use tau_on_orbit for branches)");
    if (qv > q_turn * (1.0 + 1e-12)) {
      throw ValidationError("tau_chart: Q = " + std::to_string(qv) + " beyond the turning point " +
                            std::to_string(q_turn));
    }
    double phi_end = detail::pi / 2;
    if (qv < q_turn) phi_end = std::asin(std::min(1.0, std::sqrt(table.u_of_q(qv)) / root));
    const double val = phi_end > 0.0 ? detail::integrate_panels<detail::kAbelRule>(
                                           [&](double phi) { return table.dq_ds(root * std::sin(phi)); }, 0.0,
                                           phi_end, detail::kAbelPanels) /
                                           std::sqrt(2.0)
                                     : 0.0;
    out.push_back(val);
  }
  return out;
}

inline std::vector<double> tau_chart(const PotentialFn& u, double energy, const std::vector<double>& q_grid) {
  if (!(energy > 0.0)) throw ValidationError("tau_chart: energy must be positive");
  const double qt = detail::turning_point(u, energy);
  auto integrand = [&](double psi) {
    const double gap = energy - u(qt * std::sin(psi));
    return gap > 0.0 ? qt * std::cos(psi) / std::sqrt(2.0 * gap) : 0.0;
  };
  std::vector<double> out;
  out.reserve(q_grid.size());
  for (double qv : q_grid) {
    if (qv < 0.0 || qv > qt * (1.0 + 1e-12)) throw ValidationError("tau_chart: Q outside [0, turning point]");
    const double psi_end = std::asin(std::min(1.0, qv / qt));
    out.push_back(psi_end > 0.0
                      ? detail::integrate_panels<detail::kAbelRule>(integrand, 0.0, psi_end, 4 * detail::kAbelPanels)
                      : 0.0);
  }
  return out;
}

// Quarter-orbit branches of tau on a symmetric well, starting at Q = 0 with P > 0.
enum class OrbitBranch { OutwardRight, InwardRight, OutwardLeft, InwardLeft };

struct OrbitTau {
  OrbitBranch branch;
  double tau;     // in [0, T)
  double period;  // T
};

// Places (Q, P) on the orbit of energy H. tau is multivalued on the covering
// space; add integer multiples of `period` for other sheets.
inline OrbitTau tau_on_orbit(const PotentialTable& table, double energy, double q, double p) {
  const double quarter = tau_chart(table, energy, {table.q_of_s(std::sqrt(std::min(energy, table.u_max())))})[0];
  const double local = tau_chart(table, energy, {std::abs(q)})[0];
  const double half = 2.0 * quarter;
  OrbitTau r{OrbitBranch::OutwardRight, local, 4.0 * quarter};
  if (q >= 0.0 && p >= 0.0) {
    r = {OrbitBranch::OutwardRight, local, 4.0 * quarter};
  } else if (q >= 0.0) {
    r = {OrbitBranch::InwardRight, half - local, 4.0 * quarter};
  } else if (p <= 0.0) {
    r = {OrbitBranch::OutwardLeft, half + local, 4.0 * quarter};
  } else {
    r = {OrbitBranch::InwardLeft, 4.0 * quarter - local, 4.0 * quarter};
  }
  return r;
}

// ---------------------------------------------------------------------------
// |P| = sqrt(2 (H - u(Q)))

inline double momentum_from_energy(double energy, double u_at_q) {
  const double gap = energy - u_at_q;
  if (gap < -1e-12 * std::max(1.0, std::abs(energy))) {
    throw ValidationError("classically forbidden: u(Q) = " + std::to_string(u_at_q) + " > H = " +
                          std::to_string(energy));
  }
  return std::sqrt(2.0 * std::max(0.0, gap));
}

inline double momentum_from_energy(const PotentialTable& table, double energy, double q) {
  if (std::abs(q) > table.q_max() * (1.0 + 1e-12)) throw ValidationError("classically forbidden: Q beyond table");
  return momentum_from_energy(energy, table.u_of_q(q));
}

inline double momentum_from_energy(const PotentialFn& u, double energy, double q) {
  return momentum_from_energy(energy, u(std::abs(q)));
}

}  // namespace anco
