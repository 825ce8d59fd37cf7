#pragma once

// Resolution of the identity with the classical measure d(rho^2) dTheta / 2pi:
// Cesaro-averaged angular integrals over many windows of the covering-space
// angle, followed by the radial integral over rho^2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "anco/coherent.hpp"
#include "anco/detail/numeric.hpp"
#include "anco/error.hpp"
#include "anco/phasespace.hpp"
#include "anco/spectrum.hpp"

namespace anco {

// Averages over Theta in [-pi N, pi N] with N = n_periods.
struct CesaroPlan {
  std::size_t n_periods = 1;
  // Gauss-Legendre nodes per 2 pi window; 0 selects 8 * (highest level index),
  // the minimum accepted. More are used when the phase gradient demands it.
  std::size_t theta_nodes = 0;
  double quad_tol = 1e-10;

  std::size_t nodes_for(std::size_t dim) const { return theta_nodes == 0 ? 8 * (dim - 1) : theta_nodes; }

  void validate(std::size_t dim) const {
    if (n_periods < 1) throw ValidationError("Cesaro plan needs n_periods >= 1");
    if (dim < 2) throw ValidationError("Cesaro plan needs at least two levels");
    if (nodes_for(dim) < 8 * (dim - 1)) {
      throw ValidationError("Cesaro plan: " + std::to_string(theta_nodes) + " nodes per window, need >= " +
                            std::to_string(8 * (dim - 1)));
    }
    if (!(quad_tol > 0.0)) throw ValidationError("Cesaro plan: quad_tol must be positive");
  }
};

struct ThetaAverage {
  Eigen::MatrixXcd matrix;         // M(N)
  std::size_t n_periods = 0;
  std::size_t panels_per_window = 0;
  double quad_error = 0.0;         // max entry change against half the panels
  // Poisson mass of the levels outside the block. The block itself is exact:
  // amplitudes are not renormalized, so M(N)_mn does not depend on dim.
  double outside_mass = 0.0;
};

namespace detail {

inline constexpr unsigned kThetaRule = 20;

// Integrates (1/N) int dTheta/2pi v(Theta) v(Theta)^dagger with
// v_n = c_n exp(-i w_n Theta).
inline Eigen::MatrixXcd cesaro_accumulate(const Eigen::VectorXd& amp, const Eigen::VectorXd& rate,
                                          std::size_t n_periods, std::size_t panels_per_window) {
  const auto d = amp.size();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
  Eigen::VectorXcd v(d);
  const double half = pi * static_cast<double>(n_periods);
  for_each_node<kThetaRule>(-half, half, panels_per_window * n_periods, [&](double theta, double w) {
    for (Eigen::Index n = 0; n < d; ++n) v[n] = std::polar(amp[n], -rate[n] * theta);
    acc.noalias() += w * (v * v.adjoint());
  });
  return acc / (two_pi * static_cast<double>(n_periods));
}

}  // namespace detail

inline ThetaAverage theta_average(const EnergySpectrum& spectrum, const ClassicalHamiltonian& ham, double rho,
                                  const CesaroPlan& plan, std::size_t dim) {
  plan.validate(dim);
  const std::size_t usable = std::min(spectrum.n_converged, spectrum.levels.size());
  if (usable < dim) throw ValidationError("theta_average: dim exceeds the converged levels");
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw ValidationError("theta_average: rho must be finite and >= 0");

  const auto& p = spectrum.params;
  const double hprime = ham.derivative(p.hbar * p.omega * rho * rho);
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::VectorXd amp(d), rate(d);
  for (Eigen::Index n = 0; n < d; ++n) {
    amp[n] = poisson_amplitude(static_cast<std::size_t>(n), rho);
    rate[n] = spectrum.levels[static_cast<std::size_t>(n)] / (p.hbar * p.omega * hprime);
  }
  // The integrand oscillates at the level-difference rates; keep <= 15 rad per panel.
  const double spread = rate.maxCoeff() - rate.minCoeff();
  const auto by_gradient = static_cast<std::size_t>(std::ceil(spread * detail::two_pi / 15.0));
  const auto by_plan = (plan.nodes_for(dim) + detail::kThetaRule - 1) / detail::kThetaRule;
  const std::size_t panels = std::max<std::size_t>({1, by_gradient, by_plan});

  ThetaAverage out;
  out.n_periods = plan.n_periods;
  out.panels_per_window = 2 * panels;
  out.outside_mass = poisson_tail(dim, rho);
  const Eigen::MatrixXcd coarse = detail::cesaro_accumulate(amp, rate, plan.n_periods, panels);
  out.matrix = detail::cesaro_accumulate(amp, rate, plan.n_periods, 2 * panels);
  out.quad_error = (out.matrix - coarse).cwiseAbs().maxCoeff();
  if (out.quad_error > plan.quad_tol) {
    throw NumericalError("theta_average under-resolved: halving the nodes changes M by " +
                         std::to_string(out.quad_error));
  }
  return out;
}

inline ThetaAverage theta_average(const EnergySpectrum& spectrum, double rho, const CesaroPlan& plan,
                                  std::size_t dim) {
  return theta_average(spectrum, *classical_hamiltonian(spectrum), rho, plan, dim);
}

inline double offdiag_max(const Eigen::MatrixXcd& m) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != j) best = std::max(best, std::abs(m(i, j)));
    }
  }
  return best;
}

// Level pairs whose phase-rate difference (E_m - E_n)/(hbar omega H') is
// within `tol` of a rational p/q with q <= max_den. Their Cesaro average
// vanishes at every multiple of q windows rather than decaying.
inline std::vector<std::pair<std::size_t, std::size_t>> commensurate_pairs(const EnergySpectrum& spectrum,
                                                                          double hprime, std::size_t dim,
                                                                          int max_den = 8, double tol = 1e-9) {
  const auto& p = spectrum.params;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t m = 0; m < dim; ++m) {
    for (std::size_t n = m + 1; n < dim; ++n) {
      const double r = (spectrum.levels[n] - spectrum.levels[m]) / (p.hbar * p.omega * hprime);
      for (int q = 1; q <= max_den; ++q) {
        if (std::abs(r - std::round(r * q) / q) < tol) {
          out.emplace_back(m, n);
          break;
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Radial integral

struct RadialQuadrature {
  double rho2_max = 60.0;
  std::size_t panels = 16;  // 16-point Gauss-Legendre panels
  double tail_tol = 1e-10;  // allowed Poisson/Gamma tail beyond rho2_max
  double convergence_tol = 1e-12;
};

struct CesaroPoint {
  std::size_t n_periods = 0;
  double offdiag_max = 0.0;
  double diag_poisson_dev = 0.0;  // max_n |<n|M(N)|n> - exp(-rho^2) rho^2n / n!|
  double quad_error = 0.0;
};

struct ResolutionReport {
  double rho = 0.0;
  std::vector<CesaroPoint> cesaro;
  double decay_slope = std::numeric_limits<double>::quiet_NaN();  // log-log fit of offdiag_max vs N
  std::vector<std::pair<std::size_t, std::size_t>> commensurate;
  std::vector<double> radial_masses;  // int d(rho^2) |c_n|^2, n < n_check
  double diag_dev = 0.0;              // max_n |mass_n - 1|
  double radial_tail_bound = 0.0;

  bool offdiag_non_increasing() const {
    for (std::size_t i = 1; i < cesaro.size(); ++i) {
      if (cesaro[i].offdiag_max > cesaro[i - 1].offdiag_max) return false;
    }
    return true;
  }
};

namespace detail {

inline constexpr unsigned kRadialRule = 16;

template <class Weight>
std::vector<double> radial_masses(std::size_t n_check, const RadialQuadrature& quad, std::size_t panels, Weight&& w) {
  std::vector<double> masses(n_check);
  for (std::size_t n = 0; n < n_check; ++n) {
    masses[n] = integrate_panels<kRadialRule>([&](double mu) { return w(n, mu); }, 0.0, quad.rho2_max, panels);
  }
  return masses;
}

}  // namespace detail

// int_0^inf d(rho^2) |c_n(rho)|^2 for n < n_check; each should equal 1.
inline ResolutionReport radial_resolution(const EnergySpectrum& spectrum, std::size_t n_check,
                                          const RadialQuadrature& quad = {}) {
  if (n_check == 0) throw ValidationError("radial_resolution: n_check must be positive");
  if (!(quad.rho2_max > 0.0) || quad.panels == 0) throw ValidationError("radial_resolution: bad quadrature spec");
  const std::size_t usable = std::min(spectrum.n_converged, spectrum.levels.size());
  if (usable < n_check) throw ValidationError("radial_resolution: n_check exceeds converged levels");

  ResolutionReport r;
  // Largest neglected mass is for the highest n.
  r.radial_tail_bound = boost::math::gamma_q(static_cast<double>(n_check), quad.rho2_max);
  if (r.radial_tail_bound > quad.tail_tol) {
    throw NumericalError("radial tail beyond rho^2 = " + std::to_string(quad.rho2_max) + " is " +
                         std::to_string(r.radial_tail_bound));
  }
  auto weight = [](std::size_t n, double mu) {
    const double c = poisson_amplitude(n, std::sqrt(mu));
    return c * c;
  };
  r.radial_masses = detail::radial_masses(n_check, quad, quad.panels, weight);
  const auto finer = detail::radial_masses(n_check, quad, 2 * quad.panels, weight);
  for (std::size_t n = 0; n < n_check; ++n) {
    if (std::abs(finer[n] - r.radial_masses[n]) > quad.convergence_tol) {
      throw NumericalError("radial quadrature not converged at n = " + std::to_string(n));
    }
    r.diag_dev = std::max(r.diag_dev, std::abs(r.radial_masses[n] - 1.0));
  }
  return r;
}

// Full check: theta averages at each Cesaro length plus the radial integral.
inline ResolutionReport resolution_study(const EnergySpectrum& spectrum, double rho,
                                         const std::vector<std::size_t>& cesaro_lengths, std::size_t dim,
                                         std::size_t n_check, const RadialQuadrature& quad = {},
                                         std::size_t theta_nodes = 0) {
  auto report = radial_resolution(spectrum, n_check, quad);
  report.rho = rho;
  const auto ham = classical_hamiltonian(spectrum);
  const auto& p = spectrum.params;
  const double hprime = ham->derivative(p.hbar * p.omega * rho * rho);
  report.commensurate = commensurate_pairs(spectrum, hprime, dim);

  std::vector<double> xs, ys;
  for (std::size_t n_periods : cesaro_lengths) {
    const auto avg = theta_average(spectrum, *ham, rho, CesaroPlan{n_periods, theta_nodes}, dim);
    CesaroPoint pt;
    pt.n_periods = n_periods;
    pt.offdiag_max = offdiag_max(avg.matrix);
    pt.quad_error = avg.quad_error;
    for (Eigen::Index n = 0; n < avg.matrix.rows(); ++n) {
      const double expect = poisson_weight(static_cast<std::size_t>(n), rho * rho);
      pt.diag_poisson_dev = std::max(pt.diag_poisson_dev, std::abs(avg.matrix(n, n) - expect));
    }
    report.cesaro.push_back(pt);
    if (pt.offdiag_max > 1e-12) {
      xs.push_back(std::log(static_cast<double>(n_periods)));
      ys.push_back(std::log(pt.offdiag_max));
    }
  }
  if (xs.size() >= 2) {
    const double k = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    report.decay_slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Non-uniqueness of the radial coefficients

// Alternative normalized coefficients |c_n(r)|^2 = (r^2n / n!)^2 / I_0(2 r^2),
// a monotone function of the Poisson amplitudes. Returns int d(r^2) |c_n|^2.
inline std::vector<double> alternative_radial_masses(std::size_t n_check, const RadialQuadrature& quad = {}) {
  auto weight = [](std::size_t n, double mu) {
    const double nd = static_cast<double>(n);
    const double log_i0 = std::log(boost::math::cyl_bessel_i(0, 2.0 * mu));
    const double log_num = mu > 0.0 ? 2.0 * nd * std::log(mu) - 2.0 * std::lgamma(nd + 1.0) : (n == 0 ? 0.0 : -1e300);
    return std::exp(log_num - log_i0);
  };
  return detail::radial_masses(n_check, quad, quad.panels, weight);
}

// ---------------------------------------------------------------------------
// Measure bookkeeping: d(rho^2) dTheta / 2pi = dq dp / h

struct MeasureCheck {
  double cartesian = 0.0;  // int f dq dp / h on a box around the bump
  double polar = 0.0;      // int f d(rho^2) dTheta / 2pi
  double exact = 0.0;      // 2 pi s^2 / h
};

// Integrates the Gaussian bump exp(-((q-q0)^2 + (p-p0)^2) / (2 s^2)) both ways.
inline MeasureCheck measure_bookkeeping(const ModelParams& params, double q0, double p0, double s) {
  params.validate();
  if (!(s > 0.0)) throw ValidationError("measure_bookkeeping: width must be positive");
  const double h = detail::two_pi * params.hbar;
  const double w = params.omega;
  auto f = [&](double q, double p) {
    const double dq = q - q0, dp = p - p0;
    return std::exp(-(dq * dq + dp * dp) / (2.0 * s * s));
  };
  MeasureCheck m;
  m.exact = detail::two_pi * s * s / h;

  const double half = 12.0 * s;
  m.cartesian = detail::integrate_panels<20>(
                    [&](double q) {
                      return detail::integrate_panels<20>([&](double p) { return f(q, p); }, p0 - half, p0 + half, 12);
                    },
                    q0 - half, q0 + half, 12) /
                h;

  // q = sqrt(2 hbar / omega) rho cos(Theta), p = -sqrt(2 hbar omega) rho sin(Theta)
  const double q_unit = std::sqrt(2.0 * params.hbar / w);
  const double p_unit = std::sqrt(2.0 * params.hbar * w);
  const double reach = std::hypot(q0 / q_unit, p0 / p_unit) + half / std::min(q_unit, p_unit);
  const double mu_max = reach * reach;
  m.polar = detail::integrate_panels<20>(
                [&](double mu) {
                  const double rho = std::sqrt(mu);
                  return detail::integrate_panels<20>(
                      [&](double th) { return f(q_unit * rho * std::cos(th), -p_unit * rho * std::sin(th)); },
                      -detail::pi, detail::pi, 24);
                },
                0.0, mu_max, 48) /
            detail::two_pi;
  return m;
}

}  // namespace anco
