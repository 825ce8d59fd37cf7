#pragma once

// Classical side of the correspondence: the monotone classical Hamiltonian
// H(y), y = (p^2 + omega^2 q^2)/2, its circular trajectories, and the three
// conjugate charts (q, p), (R, Theta), (H, tau).
//
// Angle convention: q = R cos(Theta), p = -R omega sin(Theta), so Theta
// advances as Theta + omega H'(y) t along the flow and the coherent-state
// label is z = rho exp(-i Theta).

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include <math.h>  // boost pchip calls isnan unqualified

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/roots.hpp>

#include "anco/error.hpp"
#include "anco/spectrum.hpp"

namespace anco {

// Monotone H(y) together with H'(y) and the inverse y(H).
class ClassicalHamiltonian {
 public:
  using Fn = std::function<double(double)>;

  // H(y) = y + lambda y^2, the classical counterpart of the diagonal model.
  static ClassicalHamiltonian diagonal_quadratic(const ModelParams& params) {
    params.validate();
    const double lam = params.lambda;
    ClassicalHamiltonian h;
    h.params_ = params;
    h.value_ = [lam](double y) { return y + lam * y * y; };
    h.derivative_ = [lam](double y) { return 1.0 + 2.0 * lam * y; };
    h.inverse_ = [lam](double e) { return 2.0 * e / (1.0 + std::sqrt(1.0 + 4.0 * lam * e)); };
    h.y_max_ = std::numeric_limits<double>::infinity();
    return h;
  }

  // Monotone cubic (PCHIP) through (0, 0) and ((n + 1/2) hbar omega, E_n) for
  // the converged levels. The knot at the origin places zero action at the
  // bottom of the well.
  static ClassicalHamiltonian from_spectrum(const EnergySpectrum& spectrum) {
    spectrum.params.validate();
    const std::size_t n = std::min(spectrum.n_converged, spectrum.levels.size());
    if (n < 3) throw ValidationError("from_spectrum needs at least 3 converged levels");
    const double quantum = spectrum.params.hbar * spectrum.params.omega;
    std::vector<double> ys{0.0};
    std::vector<double> hs{0.0};
    for (std::size_t k = 0; k < n; ++k) {
      ys.push_back((static_cast<double>(k) + 0.5) * quantum);
      hs.push_back(spectrum.levels[k]);
      if (!(hs.back() > hs[hs.size() - 2])) throw ValidationError("spectrum levels must be strictly increasing and positive");
    }
    const double y_max = ys.back();
    using Interp = boost::math::interpolators::pchip<std::vector<double>>;
    auto interp = std::make_shared<Interp>(std::move(ys), std::move(hs));

    ClassicalHamiltonian h;
    h.params_ = spectrum.params;
    h.y_max_ = y_max;
    h.value_ = [interp, y_max](double y) { return (*interp)(std::clamp(y, 0.0, y_max)); };
    h.derivative_ = [interp, y_max](double y) { return interp->prime(std::clamp(y, 0.0, y_max)); };
    return h;
  }

  // Caller-supplied monotone H(y) with derivative, valid on [0, y_max].
  static ClassicalHamiltonian custom(const ModelParams& params, Fn value, Fn derivative,
                                     double y_max = std::numeric_limits<double>::infinity()) {
    params.validate();
    ClassicalHamiltonian h;
    h.params_ = params;
    h.value_ = std::move(value);
    h.derivative_ = std::move(derivative);
    h.y_max_ = y_max;
    return h;
  }

  const ModelParams& params() const { return params_; }
  double y_max() const { return y_max_; }

  double value(double y) const {
    check_range(y);
    return value_(y);
  }
  double derivative(double y) const {
    check_range(y);
    return derivative_(y);
  }

  // y such that H(y) = energy.
  double inverse(double energy) const {
    if (inverse_) return inverse_(energy);
    const double e0 = value_(0.0);
    if (energy <= e0) return 0.0;
    double hi = std::isfinite(y_max_) ? y_max_ : 1.0;
    if (!std::isfinite(y_max_)) {
      while (value_(hi) < energy) hi *= 2.0;
    } else if (value_(hi) < energy) {
      throw ValidationError("energy beyond the range of the classical Hamiltonian");
    }
    auto f = [&](double y) { return value_(y) - energy; };
    std::uintmax_t iters = 200;
    auto [lo_y, hi_y] = boost::math::tools::toms748_solve(f, 0.0, hi, boost::math::tools::eps_tolerance<double>(),
                                                          iters);
    return 0.5 * (lo_y + hi_y);
  }

  // Omega = omega H'(y), the angular frequency of the orbit with action y.
  double orbit_frequency(double y) const { return params_.omega * derivative(y); }

 private:
  void check_range(double y) const {
    if (!(y >= 0.0) || y > y_max_ * (1.0 + 1e-12)) {
      throw ValidationError("action y = " + std::to_string(y) + " outside the classical Hamiltonian's range");
    }
  }

  ModelParams params_;
  Fn value_;
  Fn derivative_;
  Fn inverse_;
  double y_max_ = 0.0;
};

using HamiltonianPtr = std::shared_ptr<const ClassicalHamiltonian>;

// Closed form for the diagonal model, monotone interpolation of the levels otherwise.
inline HamiltonianPtr classical_hamiltonian(const EnergySpectrum& spectrum) {
  if (spectrum.params.kind == ModelKind::DiagonalQuadratic) {
    return std::make_shared<const ClassicalHamiltonian>(ClassicalHamiltonian::diagonal_quadratic(spectrum.params));
  }
  return std::make_shared<const ClassicalHamiltonian>(ClassicalHamiltonian::from_spectrum(spectrum));
}

inline HamiltonianPtr classical_hamiltonian(const ModelParams& params) {
  if (params.kind != ModelKind::DiagonalQuadratic) {
    throw ValidationError("the quartic model's classical H(y) must be built from its spectrum");
  }
  return std::make_shared<const ClassicalHamiltonian>(ClassicalHamiltonian::diagonal_quadratic(params));
}

// ---------------------------------------------------------------------------

enum class Chart { PQ, RTheta, HTau };

class PhasePoint {
 public:
  static PhasePoint pq(double q, double p, HamiltonianPtr ham) {
    const double w = require(ham).params().omega;
    return PhasePoint(Chart::PQ, q, p, 0.5 * (p * p + w * w * q * q), std::move(ham));
  }
  // R is the dimensionful amplitude omega^-1 sqrt(p^2 + omega^2 q^2).
  static PhasePoint action_angle(double radius, double theta, HamiltonianPtr ham) {
    if (!(radius >= 0.0)) throw ValidationError("R must be non-negative");
    const double w = require(ham).params().omega;
    return PhasePoint(Chart::RTheta, radius, theta, 0.5 * w * w * radius * radius, std::move(ham));
  }
  static PhasePoint energy_time(double energy, double tau, HamiltonianPtr ham) {
    if (!(energy >= 0.0) || !std::isfinite(energy)) throw ValidationError("energy must be finite and non-negative");
    const double y = require(ham).inverse(energy);
    return PhasePoint(Chart::HTau, energy, tau, y, std::move(ham));
  }

  Chart chart() const { return chart_; }
  double first() const { return first_; }
  double second() const { return second_; }
  double hprime() const { return hprime_; }
  // y = (p^2 + omega^2 q^2)/2
  double action_y() const { return y_; }
  const ModelParams& params() const { return ham_->params(); }
  const HamiltonianPtr& hamiltonian() const { return ham_; }

  double energy() const { return chart_ == Chart::HTau ? first_ : ham_->value(y_); }
  double radius() const { return std::sqrt(2.0 * y_) / params().omega; }
  // Dimensionless radial label rho = R sqrt(omega / (2 hbar)); rho^2 = y / (hbar omega).
  double rho() const { return std::sqrt(y_ / (params().hbar * params().omega)); }

 private:
  static const ClassicalHamiltonian& require(const HamiltonianPtr& ham) {
    if (!ham) throw ValidationError("phase point needs a classical Hamiltonian");
    return *ham;
  }

  PhasePoint(Chart chart, double first, double second, double y, HamiltonianPtr ham)
      : chart_(chart), first_(first), second_(second), y_(y), ham_(std::move(ham)) {
    if (!ham_) throw ValidationError("phase point needs a classical Hamiltonian");
    if (!std::isfinite(first_) || !std::isfinite(second_)) throw ValidationError("non-finite phase-space coordinate");
    hprime_ = ham_->derivative(y_);
    if (!(hprime_ > 0.0)) throw ValidationError("H'(y) must be positive (monotone H)");
  }

  Chart chart_;
  double first_;
  double second_;
  double y_;
  double hprime_ = 1.0;
  HamiltonianPtr ham_;
};

inline PhasePoint chart_convert(const PhasePoint& pt, Chart target) {
  if (pt.chart() == target) return pt;
  const double w = pt.params().omega;
  const auto& ham = pt.hamiltonian();

  // Go through (R, Theta), which every chart reaches in closed form.
  double radius = 0.0;
  double theta = 0.0;
  switch (pt.chart()) {
    case Chart::PQ: {
      const double q = pt.first();
      const double p = pt.second();
      if (q == 0.0 && p == 0.0) throw DegenerateInputError("angle undefined at the phase-space origin");
      radius = std::hypot(p, w * q) / w;
      theta = std::atan2(0.0 - p, w * q);  // 0 - p, not -p: keeps Theta = +pi on the negative q axis
      break;
    }
    case Chart::RTheta:
      radius = pt.first();
      theta = pt.second();
      break;
    case Chart::HTau:
      radius = pt.radius();
      theta = w * pt.hprime() * pt.second();
      break;
  }

  switch (target) {
    case Chart::PQ:
      return PhasePoint::pq(radius * std::cos(theta), -radius * w * std::sin(theta), ham);
    case Chart::RTheta:
      return PhasePoint::action_angle(radius, theta, ham);
    case Chart::HTau: {
      auto aa = PhasePoint::action_angle(radius, theta, ham);
      const double energy = pt.chart() == Chart::HTau ? pt.first() : aa.energy();
      return PhasePoint::energy_time(energy, theta / (w * aa.hprime()), ham);
    }
  }
  return pt;
}

// Flow of H((p^2 + omega^2 q^2)/2) for time t, in the point's own chart.
inline PhasePoint classical_evolve(const PhasePoint& pt, double t) {
  const auto& ham = pt.hamiltonian();
  switch (pt.chart()) {
    case Chart::RTheta:
      return PhasePoint::action_angle(pt.first(), pt.second() + pt.params().omega * pt.hprime() * t, ham);
    case Chart::HTau:
      return PhasePoint::energy_time(pt.first(), pt.second() + t, ham);
    case Chart::PQ: {
      if (pt.first() == 0.0 && pt.second() == 0.0) return pt;  // fixed point
      return chart_convert(classical_evolve(chart_convert(pt, Chart::RTheta), t), Chart::PQ);
    }
  }
  return pt;
}

// Closed orbit integral of p dq divided by h: y / (hbar omega) = rho^2.
inline double bohr_action(const PhasePoint& pt) {
  return pt.action_y() / (pt.params().hbar * pt.params().omega);
}

struct TrajectorySample {
  double t, q, p, radius, theta_unwrapped, energy, tau;
};

// n_samples equally spaced times on [0, t_end]; Theta is carried on the
// covering space.
inline std::vector<TrajectorySample> sample_trajectory(const PhasePoint& start, double t_end, std::size_t n_samples) {
  if (n_samples < 2) throw ValidationError("trajectory needs at least 2 samples");
  if (!std::isfinite(t_end)) throw ValidationError("t_end must be finite");
  const auto aa = chart_convert(start, Chart::RTheta);
  const double w = aa.params().omega;
  const double freq = w * aa.hprime();
  const double energy = aa.energy();
  std::vector<TrajectorySample> out;
  out.reserve(n_samples);
  for (std::size_t j = 0; j < n_samples; ++j) {
    const double t = t_end * static_cast<double>(j) / static_cast<double>(n_samples - 1);
    const double theta = aa.second() + freq * t;
    out.push_back({t, aa.first() * std::cos(theta), -aa.first() * w * std::sin(theta), aa.first(), theta, energy,
                   theta / freq});
  }
  return out;
}

}  // namespace anco
