#pragma once

// Hamiltonian models, ladder-operator matrices in the harmonic-oscillator
// basis, truncated eigenproblems, and normal-order coefficients.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "anco/detail/numeric.hpp"
#include "anco/error.hpp"

namespace anco {

enum class ModelKind {
  DiagonalQuadratic,  // H = N + lambda N^2 with N = (a^dagger a + 1/2) hbar omega
  QuarticPosition,    // H = (P^2 + omega^2 Q^2 + lambda Q^4) / 2
};

inline std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::DiagonalQuadratic ? "diagonal" : "quartic";
}

inline ModelKind model_kind_from_string(std::string_view name) {
  if (name == "diagonal" || name == "DiagonalQuadratic") return ModelKind::DiagonalQuadratic;
  if (name == "quartic" || name == "QuarticPosition") return ModelKind::QuarticPosition;
  throw ValidationError("unknown model '" + std::string(name) + "' (expected diagonal or quartic)");
}

struct ModelParams {
  double omega = 1.0;
  double lambda = 0.0;
  double hbar = 1.0;
  ModelKind kind = ModelKind::QuarticPosition;

  void validate() const {
    if (!(std::isfinite(omega) && omega > 0.0)) throw ValidationError("omega must be positive and finite");
    if (!(std::isfinite(hbar) && hbar > 0.0)) throw ValidationError("hbar must be positive and finite");
    if (!(std::isfinite(lambda) && lambda >= 0.0)) {
      throw ValidationError("lambda must be non-negative (the quartic well is unbounded below otherwise)");
    }
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// ---------------------------------------------------------------------------
// Operator matrices

enum class OperatorTag { Identity, A, ADag, Q, P, Q2, P2, Q4 };

inline std::string_view to_string(OperatorTag tag) {
  switch (tag) {
    case OperatorTag::Identity: return "I";
    case OperatorTag::A: return "a";
    case OperatorTag::ADag: return "adag";
    case OperatorTag::Q: return "q";
    case OperatorTag::P: return "p";
    case OperatorTag::Q2: return "q2";
    case OperatorTag::P2: return "p2";
    case OperatorTag::Q4: return "q4";
  }
  return "?";
}

inline OperatorTag operator_tag_from_string(std::string_view name) {
  for (auto tag : {OperatorTag::Identity, OperatorTag::A, OperatorTag::ADag, OperatorTag::Q, OperatorTag::P,
                   OperatorTag::Q2, OperatorTag::P2, OperatorTag::Q4}) {
    if (name == to_string(tag)) return tag;
  }
  throw ValidationError("unknown operator tag '" + std::string(name) + "'");
}

// Half-bandwidth of the operator in the number basis.
inline std::size_t bandwidth(OperatorTag tag) {
  switch (tag) {
    case OperatorTag::Identity: return 0;
    case OperatorTag::A:
    case OperatorTag::ADag:
    case OperatorTag::Q:
    case OperatorTag::P: return 1;
    case OperatorTag::Q2:
    case OperatorTag::P2: return 2;
    case OperatorTag::Q4: return 4;
  }
  return 0;
}

struct OperatorMatrix {
  OperatorTag tag = OperatorTag::Identity;
  std::size_t dim = 0;
  std::size_t band = 0;
  Eigen::MatrixXcd entries;
};

// <m|O|n> for m, n < dim, built from closed-form ladder algebra so every
// entry is the exact (untruncated) matrix element.
inline OperatorMatrix build_operator(const ModelParams& params, OperatorTag which, std::size_t dim) {
  params.validate();
  const std::size_t band = bandwidth(which);
  if (dim < 2 || dim <= band) {
    throw ValidationError("dim " + std::to_string(dim) + " too small for operator '" +
                          std::string(to_string(which)) + "' (half-bandwidth " + std::to_string(band) + ")");
  }

  using cd = std::complex<double>;
  OperatorMatrix op{which, dim, band, Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                                            static_cast<Eigen::Index>(dim))};
  auto& m = op.entries;
  const auto n_max = static_cast<Eigen::Index>(dim);
  const double hbar = params.hbar;
  const double omega = params.omega;
  const double q_scale = std::sqrt(hbar / (2.0 * omega));
  const double p_scale = std::sqrt(hbar * omega / 2.0);

  // sqrt((n+1)(n+2)) and friends
  auto root2 = [](double n) { return std::sqrt((n + 1.0) * (n + 2.0)); };
  auto root4 = [](double n) { return std::sqrt((n + 1.0) * (n + 2.0) * (n + 3.0) * (n + 4.0)); };

  switch (which) {
    case OperatorTag::Identity:
      m.setIdentity();
      break;
    case OperatorTag::A:
      for (Eigen::Index n = 1; n < n_max; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
      break;
    case OperatorTag::ADag:
      for (Eigen::Index n = 1; n < n_max; ++n) m(n, n - 1) = std::sqrt(static_cast<double>(n));
      break;
    case OperatorTag::Q:
      for (Eigen::Index n = 0; n + 1 < n_max; ++n) {
        const double v = q_scale * std::sqrt(static_cast<double>(n + 1));
        m(n, n + 1) = v;
        m(n + 1, n) = v;
      }
      break;
    case OperatorTag::P:
      for (Eigen::Index n = 0; n + 1 < n_max; ++n) {
        const double v = p_scale * std::sqrt(static_cast<double>(n + 1));
        m(n + 1, n) = cd(0.0, v);
        m(n, n + 1) = cd(0.0, -v);
      }
      break;
    case OperatorTag::Q2:
    case OperatorTag::P2: {
      const bool is_q = which == OperatorTag::Q2;
      const double scale = is_q ? hbar / (2.0 * omega) : hbar * omega / 2.0;
      const double off_sign = is_q ? 1.0 : -1.0;
      for (Eigen::Index n = 0; n < n_max; ++n) {
        const auto nd = static_cast<double>(n);
        m(n, n) = scale * (2.0 * nd + 1.0);
        if (n + 2 < n_max) {
          const double v = off_sign * scale * root2(nd);
          m(n, n + 2) = v;
          m(n + 2, n) = v;
        }
      }
      break;
    }
    case OperatorTag::Q4: {
      const double scale = (hbar / (2.0 * omega)) * (hbar / (2.0 * omega));
      for (Eigen::Index n = 0; n < n_max; ++n) {
        const auto nd = static_cast<double>(n);
        m(n, n) = scale * (6.0 * nd * nd + 6.0 * nd + 3.0);
        if (n + 2 < n_max) {
          const double v = scale * (4.0 * nd + 6.0) * root2(nd);
          m(n, n + 2) = v;
          m(n + 2, n) = v;
        }
        if (n + 4 < n_max) {
          const double v = scale * root4(nd);
          m(n, n + 4) = v;
          m(n + 4, n) = v;
        }
      }
      break;
    }
  }
  return op;
}

// Real symmetric matrix of H = (P^2 + omega^2 Q^2 + lambda Q^4)/2.
inline Eigen::MatrixXd quartic_hamiltonian_matrix(const ModelParams& params, std::size_t dim) {
  const auto q2 = build_operator(params, OperatorTag::Q2, dim);
  const auto p2 = build_operator(params, OperatorTag::P2, dim);
  const auto q4 = build_operator(params, OperatorTag::Q4, dim);
  const double w2 = params.omega * params.omega;
  Eigen::MatrixXd h = 0.5 * (p2.entries.real() + w2 * q2.entries.real() + params.lambda * q4.entries.real());
  if (!h.allFinite()) throw NumericalError("non-finite Hamiltonian matrix entries");
  return h;
}

// ---------------------------------------------------------------------------
// Spectra

struct EnergySpectrum {
  std::vector<double> levels;  // ascending
  std::size_t n_converged = 0;
  std::size_t basis_dim = 0;
  double tol = 0.0;
  ModelParams params;

  std::size_t size() const { return levels.size(); }
  double operator[](std::size_t n) const { return levels[n]; }
};

// Levels of H = N + lambda N^2 with N = (n + 1/2) hbar omega.
inline double diagonal_quadratic_level(const ModelParams& params, std::size_t n) {
  const double y = (static_cast<double>(n) + 0.5) * params.hbar * params.omega;
  return y + params.lambda * y * y;
}

inline std::vector<double> lowest_eigenvalues(const Eigen::MatrixXd& h, std::size_t count) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");
  const auto& ev = solver.eigenvalues();
  count = std::min<std::size_t>(count, static_cast<std::size_t>(ev.size()));
  return {ev.data(), ev.data() + count};
}

// Solves the truncated eigenproblem. For QuarticPosition the reported levels
// are the lowest dim/2 eigenvalues of the dim-basis matrix; level n counts as
// converged when it agrees with the 2*dim basis to relative `tol`, and
// n_converged is the length of the converged prefix.
inline EnergySpectrum solve_spectrum(const ModelParams& params, std::size_t dim, std::size_t n_want,
                                     double tol = 1e-10) {
  params.validate();
  if (!(tol > 0.0)) throw ValidationError("tol must be positive");
  if (n_want == 0) throw ValidationError("n_want must be at least 1");
  if (dim < 5) throw ValidationError("basis dim must be at least 5");
  if (n_want > dim / 2) {
    throw ValidationError("n_want " + std::to_string(n_want) + " exceeds dim/2 = " + std::to_string(dim / 2));
  }

  EnergySpectrum out;
  out.params = params;
  out.basis_dim = dim;
  out.tol = tol;

  if (params.kind == ModelKind::DiagonalQuadratic) {
    out.levels.resize(dim);
    for (std::size_t n = 0; n < dim; ++n) out.levels[n] = diagonal_quadratic_level(params, n);
    out.n_converged = dim;
    return out;
  }

  const std::size_t keep = dim / 2;
  auto small = lowest_eigenvalues(quartic_hamiltonian_matrix(params, dim), keep);
  const auto large = lowest_eigenvalues(quartic_hamiltonian_matrix(params, 2 * dim), keep);

  std::size_t converged = 0;
  while (converged < keep &&
         std::abs(small[converged] - large[converged]) <= tol * std::abs(large[converged])) {
    ++converged;
  }
  out.levels = std::move(small);
  out.n_converged = converged;
  if (converged < n_want) {
    throw ConvergenceError("only " + std::to_string(converged) + " of " + std::to_string(n_want) +
                               " levels converged at dim " + std::to_string(dim),
                           converged);
  }
  return out;
}

// Copy truncated to the converged prefix.
inline EnergySpectrum converged_part(const EnergySpectrum& s) {
  EnergySpectrum out = s;
  out.levels.resize(std::min(s.n_converged, s.levels.size()));
  return out;
}

// 64-bit FNV-1a over the model parameters and level bit patterns, as hex.
inline std::string spectrum_hash(const EnergySpectrum& s) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  const double header[3] = {s.params.omega, s.params.lambda, s.params.hbar};
  mix(header, sizeof header);
  const int kind = static_cast<int>(s.params.kind);
  mix(&kind, sizeof kind);
  mix(s.levels.data(), s.levels.size() * sizeof(double));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Normal-order coefficients H_n of H = sum_n H_n (a^dagger)^n a^n.

struct NormalOrderCoeffs {
  std::vector<double> h;
  std::size_t k_max = 0;
  bool growth_flag = false;
};

struct NormalOrderOptions {
  double overflow_guard = 1e100;
  // Exact rational evaluation of the alternating sums when k_max is at most this.
  std::size_t exact_up_to = 64;
};

// H_n = sum_{k<=n} (-1)^{n-k} E_k / (k! (n-k)!), the n-th forward difference of
// the levels divided by n!.
inline NormalOrderCoeffs normal_order_coeffs(const EnergySpectrum& spectrum, std::size_t k_max,
                                             const NormalOrderOptions& opts = {}) {
  const std::size_t usable = std::min(spectrum.n_converged, spectrum.levels.size());
  if (usable < k_max + 1) {
    throw ValidationError("normal_order_coeffs needs " + std::to_string(k_max + 1) +
                          " converged levels, spectrum has " + std::to_string(usable));
  }
  NormalOrderCoeffs out;
  out.k_max = k_max;
  out.h.resize(k_max + 1);

  if (k_max <= opts.exact_up_to) {
    using boost::multiprecision::cpp_int;
    using boost::multiprecision::cpp_rational;
    std::vector<cpp_int> fact(k_max + 1);
    fact[0] = 1;
    for (std::size_t k = 1; k <= k_max; ++k) fact[k] = fact[k - 1] * k;
    std::vector<cpp_rational> energies;
    energies.reserve(k_max + 1);
    for (std::size_t k = 0; k <= k_max; ++k) energies.emplace_back(spectrum.levels[k]);
    for (std::size_t n = 0; n <= k_max; ++n) {
      cpp_rational acc = 0;
      for (std::size_t k = 0; k <= n; ++k) {
        cpp_rational term = energies[k] / cpp_rational(fact[k] * fact[n - k]);
        if ((n - k) % 2 == 0) {
          acc += term;
        } else {
          acc -= term;
        }
      }
      out.h[n] = acc.convert_to<double>();
    }
  } else {
    for (std::size_t n = 0; n <= k_max; ++n) {
      detail::CompensatedSum acc;
      for (std::size_t k = 0; k <= n; ++k) {
        const double inv = std::exp(-std::lgamma(k + 1.0) - std::lgamma(static_cast<double>(n - k) + 1.0));
        acc += ((n - k) % 2 == 0 ? 1.0 : -1.0) * spectrum.levels[k] * inv;
      }
      out.h[n] = acc.value();
    }
  }

  for (double v : out.h) {
    if (!std::isfinite(v) || std::abs(v) > opts.overflow_guard) out.growth_flag = true;
  }
  return out;
}

// E_m = sum_{n<=m} H_n m!/(m-n)! for m = 0..m_max (m_max <= k_max).
inline std::vector<double> reconstruct_levels(const NormalOrderCoeffs& coeffs, std::size_t m_max) {
  if (m_max > coeffs.k_max) throw ValidationError("reconstruct_levels: m_max exceeds k_max");
  std::vector<double> levels(m_max + 1);
  for (std::size_t m = 0; m <= m_max; ++m) {
    detail::CompensatedSum acc;
    double falling = 1.0;  // m!/(m-n)!
    for (std::size_t n = 0; n <= m; ++n) {
      acc += coeffs.h[n] * falling;
      falling *= static_cast<double>(m - n);
    }
    levels[m] = acc.value();
  }
  return levels;
}

}  // namespace anco
