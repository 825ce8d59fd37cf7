#pragma once

// Command-line front end. Everything lives here so tests can drive the CLI
// in-process through run_cli().

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "anco/anco.hpp"

namespace anco::cli {

using json = io::json;

enum ExitCode : int { kPass = 0, kValidation = 1, kNumerical = 2, kIo = 3 };

// Pass/fail thresholds of the verification suites.
struct Thresholds {
  double max_tail = 1e-12;
  // evolution
  std::vector<double> times{0.1, 1.0, 10.0};
  double evolution_max_dev = 1e-12;
  // identity
  double diag_tol = 1e-10;
  double offdiag_tol = 1e-10;  // commensurate spectra: off-diagonals vanish outright
  double slope_target = -1.0;
  double slope_tol = 0.2;
  double radial_tol = 1e-8;
  std::size_t n_check = 13;
  // uncertainty
  std::vector<double> rhos{2.0, 4.0, 6.0, 8.0};
  std::size_t n_theta = 8;
  double heisenberg_slack = 1e-12;
  // recurrence
  double recurrence_floor = 1e-3;
  // invert
  double roundtrip_tol = 1e-4;

  bool operator==(const Thresholds&) const = default;
};

struct RunConfig {
  std::string command;
  std::string suite;  // verify only
  std::string model = "diagonal";
  double omega = 1.0;
  double lambda = 0.0;
  double hbar = 1.0;
  std::optional<double> rho;
  double theta = 0.0;
  std::size_t levels = 20;
  std::size_t dim = 0;    // state basis; 0 = smallest within the truncation budget
  std::size_t basis = 0;  // diagonalization basis; 0 = grow until converged
  double tol = 1e-10;
  std::vector<std::size_t> cesaro{1, 4, 16, 64};
  std::string format = "json";
  std::string out;
  std::string spectrum;  // spectrum JSON to load instead of solving
  double time = 1.0;
  double t_end = 10.0;
  std::size_t samples = 201;
  double hmax = 20.0;
  double umax = 0.0;
  std::size_t grid = 401;
  std::string observable = "q";
  double periods = 50.0;
  std::size_t samples_per_period = 64;
  std::optional<double> q;
  std::optional<double> p;
  Thresholds thresholds;

  bool operator==(const RunConfig&) const = default;

  ModelParams params() const {
    ModelParams mp{omega, lambda, hbar, model_kind_from_string(model)};
    mp.validate();
    return mp;
  }

  void validate() const {
    (void)params();
    if (format != "json" && format != "csv") throw ValidationError("--format must be csv or json");
    if (rho && (!(*rho >= 0.0) || !std::isfinite(*rho))) throw ValidationError("--rho must be finite and >= 0");
    if (!std::isfinite(theta) || !std::isfinite(time)) throw ValidationError("--theta/--time must be finite");
    if (!(tol > 0.0)) throw ValidationError("--tol must be positive");
    if (levels == 0) throw ValidationError("--levels must be positive");
    if (cesaro.empty()) throw ValidationError("--cesaro needs at least one length");
    for (auto n : cesaro) {
      if (n == 0) throw ValidationError("--cesaro lengths must be >= 1");
    }
    if (samples < 2) throw ValidationError("--samples must be >= 2");
    if (!std::isfinite(t_end)) throw ValidationError("--t-end must be finite");
    if (!(hmax > 0.0)) throw ValidationError("--hmax must be positive");
    if (umax < 0.0) throw ValidationError("--umax must be >= 0");
    if (umax > hmax) {
      throw ValidationError("--umax " + io::fmt(umax) + " exceeds the period table range --hmax " + io::fmt(hmax));
    }
    if (grid < 8) throw ValidationError("--grid must be >= 8");
    (void)operator_tag_from_string(observable);
    if (!(periods >= 50.0)) throw ValidationError("--periods must be >= 50");
    if (samples_per_period < 8) throw ValidationError("--samples-per-period must be >= 8");
    if (q.has_value() != p.has_value()) throw ValidationError("--q and --p must be given together");
    const auto& t = thresholds;
    for (double v : {t.max_tail, t.evolution_max_dev, t.diag_tol, t.offdiag_tol, t.slope_tol, t.radial_tol,
                     t.heisenberg_slack, t.recurrence_floor, t.roundtrip_tol}) {
      if (!(v > 0.0)) throw ValidationError("all thresholds must be positive");
    }
    if (t.times.empty() || t.rhos.empty() || t.n_theta == 0 || t.n_check == 0) {
      throw ValidationError("threshold grids must be non-empty");
    }
  }
};

// ---------------------------------------------------------------------------
// Config serialization. Keys mirror the long flag names with '-' -> '_'.

inline json to_json(const Thresholds& t) {
  return json{{"max_tail", t.max_tail},
              {"times", t.times},
              {"evolution_max_dev", t.evolution_max_dev},
              {"diag_tol", t.diag_tol},
              {"offdiag_tol", t.offdiag_tol},
              {"slope_target", t.slope_target},
              {"slope_tol", t.slope_tol},
              {"radial_tol", t.radial_tol},
              {"n_check", t.n_check},
              {"rhos", t.rhos},
              {"n_theta", t.n_theta},
              {"heisenberg_slack", t.heisenberg_slack},
              {"recurrence_floor", t.recurrence_floor},
              {"roundtrip_tol", t.roundtrip_tol}};
}

inline json to_json(const RunConfig& c) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return json{{"command", c.command},
              {"suite", c.suite},
              {"model", c.model},
              {"omega", c.omega},
              {"lambda", c.lambda},
              {"hbar", c.hbar},
              {"rho", opt(c.rho)},
              {"theta", c.theta},
              {"levels", c.levels},
              {"dim", c.dim},
              {"basis", c.basis},
              {"tol", c.tol},
              {"cesaro", c.cesaro},
              {"format", c.format},
              {"out", c.out},
              {"spectrum", c.spectrum},
              {"time", c.time},
              {"t_end", c.t_end},
              {"samples", c.samples},
              {"hmax", c.hmax},
              {"umax", c.umax},
              {"grid", c.grid},
              {"observable", c.observable},
              {"periods", c.periods},
              {"samples_per_period", c.samples_per_period},
              {"q", opt(c.q)},
              {"p", opt(c.p)},
              {"thresholds", to_json(c.thresholds)}};
}

namespace detail {

template <class T>
void read_key(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config key '") + key + "': " + e.what());
  }
}

inline void read_key(const json& j, const char* key, std::optional<double>& dst) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    dst.reset();
    return;
  }
  double v = 0.0;
  read_key(j, key, v);
  dst = v;
}

inline void reject_unknown(const json& j, const json& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) throw ValidationError("unknown config key '" + it.key() + "' in " + where);
  }
}

}  // namespace detail

inline Thresholds thresholds_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config 'thresholds' must be an object");
  Thresholds t;
  detail::reject_unknown(j, to_json(t), "thresholds");
  detail::read_key(j, "max_tail", t.max_tail);
  detail::read_key(j, "times", t.times);
  detail::read_key(j, "evolution_max_dev", t.evolution_max_dev);
  detail::read_key(j, "diag_tol", t.diag_tol);
  detail::read_key(j, "offdiag_tol", t.offdiag_tol);
  detail::read_key(j, "slope_target", t.slope_target);
  detail::read_key(j, "slope_tol", t.slope_tol);
  detail::read_key(j, "radial_tol", t.radial_tol);
  detail::read_key(j, "n_check", t.n_check);
  detail::read_key(j, "rhos", t.rhos);
  detail::read_key(j, "n_theta", t.n_theta);
  detail::read_key(j, "heisenberg_slack", t.heisenberg_slack);
  detail::read_key(j, "recurrence_floor", t.recurrence_floor);
  detail::read_key(j, "roundtrip_tol", t.roundtrip_tol);
  return t;
}

// Missing keys keep their defaults.
inline RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  RunConfig c;
  detail::reject_unknown(j, to_json(c), "config");
  detail::read_key(j, "command", c.command);
  detail::read_key(j, "suite", c.suite);
  detail::read_key(j, "model", c.model);
  detail::read_key(j, "omega", c.omega);
  detail::read_key(j, "lambda", c.lambda);
  detail::read_key(j, "hbar", c.hbar);
  detail::read_key(j, "rho", c.rho);
  detail::read_key(j, "theta", c.theta);
  detail::read_key(j, "levels", c.levels);
  detail::read_key(j, "dim", c.dim);
  detail::read_key(j, "basis", c.basis);
  detail::read_key(j, "tol", c.tol);
  detail::read_key(j, "cesaro", c.cesaro);
  detail::read_key(j, "format", c.format);
  detail::read_key(j, "out", c.out);
  detail::read_key(j, "spectrum", c.spectrum);
  detail::read_key(j, "time", c.time);
  detail::read_key(j, "t_end", c.t_end);
  detail::read_key(j, "samples", c.samples);
  detail::read_key(j, "hmax", c.hmax);
  detail::read_key(j, "umax", c.umax);
  detail::read_key(j, "grid", c.grid);
  detail::read_key(j, "observable", c.observable);
  detail::read_key(j, "periods", c.periods);
  detail::read_key(j, "samples_per_period", c.samples_per_period);
  detail::read_key(j, "q", c.q);
  detail::read_key(j, "p", c.p);
  if (j.contains("thresholds")) c.thresholds = thresholds_from_json(j.at("thresholds"));
  return c;
}

// ---------------------------------------------------------------------------
// Shared plumbing

struct Check {
  std::string name;
  double value;
  std::string relation;  // "<", "<=", ">", ">=", "==", "in"
  double threshold;
  bool pass;
};

inline Check check_below(std::string name, double value, double limit) {
  return {std::move(name), value, "<", limit, value < limit};
}
inline Check check_above(std::string name, double value, double limit) {
  return {std::move(name), value, ">", limit, value > limit};
}

inline json to_json(const Check& c) {
  return json{{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"threshold", c.threshold},
              {"pass", c.pass}};
}

inline std::string checks_csv(const std::vector<Check>& checks) {
  std::string out = "check,value,relation,threshold,pass\n";
  for (const auto& c : checks) {
    out += c.name + ',' + io::fmt(c.value) + ',' + c.relation + ',' + io::fmt(c.threshold) + ',' +
           (c.pass ? "1" : "0") + '\n';
  }
  return out;
}

// Output of one command: a payload for --out/stdout plus summary lines.
struct Result {
  std::string payload;
  std::vector<Check> checks;
  std::vector<std::string> notes;
};

inline std::string dump(const json& j) { return j.dump(2) + '\n'; }

// Short number for check labels.
inline std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline double default_rho(const RunConfig& c) { return c.rho.value_or(2.0); }

// Diagonalize with a growing basis until `need` levels converge.
inline EnergySpectrum solve_for(const RunConfig& c, std::size_t need) {
  const auto mp = c.params();
  need = std::max<std::size_t>(need, 3);
  if (mp.kind == ModelKind::DiagonalQuadratic) return solve_spectrum(mp, std::max<std::size_t>(need, 6), 1, c.tol);
  if (c.basis > 0) return solve_spectrum(mp, c.basis, need, c.tol);
  std::size_t basis = 64;
  while (basis < 2 * need) basis *= 2;
  for (;; basis *= 2) {
    try {
      return solve_spectrum(mp, basis, need, c.tol);
    } catch (const ConvergenceError&) {
      if (basis >= 1024) throw;
    }
  }
}

inline SpectrumPtr spectrum_for(const RunConfig& c, std::size_t need) {
  if (!c.spectrum.empty()) {
    auto s = io::spectrum_from_json(io::parse_json(io::read_file(c.spectrum), c.spectrum));
    if (std::min(s.n_converged, s.levels.size()) < need) {
      throw ValidationError("spectrum file '" + c.spectrum + "' has " + std::to_string(s.n_converged) +
                            " converged levels, need " + std::to_string(need));
    }
    return std::make_shared<const EnergySpectrum>(std::move(s));
  }
  return std::make_shared<const EnergySpectrum>(solve_for(c, need));
}

inline std::size_t state_dim(const RunConfig& c, double rho) {
  return c.dim > 0 ? c.dim : min_state_dim(rho, c.thresholds.max_tail);
}

inline CoherentState make_state(const RunConfig& c, double rho, double theta) {
  const std::size_t dim = state_dim(c, rho);
  // A little headroom so the classical interpolant covers y = rho^2 comfortably.
  const auto need = std::max<std::size_t>(dim, static_cast<std::size_t>(rho * rho) + 4);
  return build_state(spectrum_for(c, need), rho, theta, dim, c.thresholds.max_tail);
}

// ---------------------------------------------------------------------------
// Commands

inline Result cmd_spectrum(const RunConfig& c) {
  auto s = solve_for(c, c.levels);
  s.levels.resize(c.levels);
  s.n_converged = std::min(s.n_converged, c.levels);
  return {c.format == "json" ? dump(io::to_json(s)) : io::spectrum_csv(s), {}, {}};
}

inline Result cmd_state(const RunConfig& c) {
  const auto s = make_state(c, default_rho(c), c.theta);
  Result r{c.format == "json" ? dump(io::to_json(s)) : io::state_csv(s), {}, {}};
  r.notes.push_back("dim " + std::to_string(s.dim()) + ", truncation mass " + io::fmt(s.trunc_mass));
  return r;
}

inline Result cmd_evolve(const RunConfig& c) {
  const auto s = make_state(c, default_rho(c), c.theta);
  const auto e = evolve_state(s, c.time);
  const auto relabeled = build_state(s.spectrum, s.hamiltonian, s.rho, e.theta, s.dim(), c.thresholds.max_tail);
  const double dev = aligned_max_deviation(e.coeffs, relabeled.coeffs);
  Result r;
  if (c.format == "json") {
    r.payload = dump(json{{"t", c.time}, {"relabel_deviation", dev}, {"state", io::to_json(e)}});
  } else {
    r.payload = io::state_csv(e);
  }
  r.notes.push_back("theta " + io::fmt(s.theta) + " -> " + io::fmt(e.theta) + ", relabel deviation " + io::fmt(dev));
  return r;
}

inline Result verify_evolution(const RunConfig& c) {
  const auto s = make_state(c, default_rho(c), c.theta);
  Result r;
  json rows = json::array();
  for (double t : c.thresholds.times) {
    const auto e = evolve_state(s, t);
    const auto relabeled = build_state(s.spectrum, s.hamiltonian, s.rho, e.theta, s.dim(), c.thresholds.max_tail);
    const double dev = aligned_max_deviation(e.coeffs, relabeled.coeffs);
    const double norm_dev = std::abs(e.coeffs.norm() - 1.0);
    r.checks.push_back(check_below("evolution.max_dev[t=" + label(t) + "]", dev, c.thresholds.evolution_max_dev));
    rows.push_back({{"t", t}, {"max_dev", dev}, {"norm_dev", norm_dev}});
  }
  if (c.format == "json") {
    json checks = json::array();
    for (const auto& ch : r.checks) checks.push_back(to_json(ch));
    r.payload = dump(json{{"suite", "evolution"}, {"rho", s.rho}, {"theta", s.theta}, {"hprime", s.hprime},
                          {"dim", s.dim()}, {"rows", rows}, {"checks", checks}});
  } else {
    r.payload = checks_csv(r.checks);
  }
  return r;
}

inline Result verify_identity(const RunConfig& c) {
  const double rho = default_rho(c);
  const std::size_t dim = c.dim > 0 ? c.dim : c.levels;
  const std::size_t n_check = c.thresholds.n_check;
  const auto spec = spectrum_for(c, std::max(dim, n_check));
  const auto& t = c.thresholds;
  const auto report = resolution_study(*spec, rho, c.cesaro, dim, n_check);

  Result r;
  const std::size_t pairs = dim * (dim - 1) / 2;
  const bool all_commensurate = report.commensurate.size() == pairs;
  for (const auto& pt : report.cesaro) {
    const std::string tag = "[N=" + std::to_string(pt.n_periods) + "]";
    r.checks.push_back(check_below("identity.diag_poisson_dev" + tag, pt.diag_poisson_dev, t.diag_tol));
    if (all_commensurate) r.checks.push_back(check_below("identity.offdiag_max" + tag, pt.offdiag_max, t.offdiag_tol));
  }
  r.checks.push_back(check_below("identity.radial_diag_dev", report.diag_dev, t.radial_tol));
  if (!all_commensurate) {
    r.checks.push_back({"identity.offdiag_non_increasing", report.offdiag_non_increasing() ? 1.0 : 0.0, "==", 1.0,
                        report.offdiag_non_increasing()});
    if (c.cesaro.size() >= 3) {
      const double miss = std::isfinite(report.decay_slope) ? std::abs(report.decay_slope - t.slope_target) : INFINITY;
      r.checks.push_back(check_below("identity.slope_miss[slope=" + label(report.decay_slope) + "]", miss,
                                     t.slope_tol));
    }
  }
  if (!report.commensurate.empty()) {
    r.notes.push_back(std::to_string(report.commensurate.size()) + " of " + std::to_string(pairs) +
                      " level pairs are commensurate; their Cesaro averages vanish rather than decay");
  }
  if (c.format == "json") {
    json checks = json::array();
    for (const auto& ch : r.checks) checks.push_back(to_json(ch));
    auto j = io::to_json(report);
    j["dim"] = dim;
    j["checks"] = checks;
    r.payload = dump(j);
  } else {
    r.payload = io::decay_csv(report);
  }
  return r;
}

inline Result verify_uncertainty(const RunConfig& c) {
  const auto& t = c.thresholds;
  const std::vector<double> rhos = c.rho ? std::vector<double>{*c.rho} : t.rhos;
  double rho_top = 0.0;
  for (double rho : rhos) rho_top = std::max(rho_top, rho);
  const std::size_t need = std::max(state_dim(c, rho_top), static_cast<std::size_t>(rho_top * rho_top) + 4);
  const auto spec = spectrum_for(c, need);
  const auto ham = classical_hamiltonian(*spec);
  const auto& mp = spec->params;
  const double bound = 0.5 * mp.hbar;

  Result r;
  std::vector<io::ScanRow> rows;
  std::vector<double> max_k;
  double min_product = INFINITY;
  for (double rho : rhos) {
    double worst = 0.0;
    for (std::size_t k = 0; k < t.n_theta; ++k) {
      const double theta = 2.0 * anco::detail::pi * static_cast<double>(k) / static_cast<double>(t.n_theta);
      const auto s = build_state(spec, ham, rho, theta, state_dim(c, rho), t.max_tail);
      const auto rep = expectation_report(s, OperatorSet::for_state(s));
      rows.push_back({rho, theta, rep});
      worst = std::max(worst, std::abs(rep.k_value));
      min_product = std::min(min_product, rep.uncertainty_product);
    }
    max_k.push_back(worst);
  }
  r.checks.push_back(
      {"uncertainty.min_product", min_product, ">=", bound - t.heisenberg_slack, min_product >= bound - t.heisenberg_slack});
  for (std::size_t i = 1; i < rhos.size(); ++i) {
    r.checks.push_back(check_below("uncertainty.max_k[rho=" + label(rhos[i]) + "]<max_k[rho=" + label(rhos[i - 1]) + "]",
                                   max_k[i], max_k[i - 1]));
  }
  if (c.format == "json") {
    json checks = json::array();
    for (const auto& ch : r.checks) checks.push_back(to_json(ch));
    json scan = json::array();
    for (const auto& row : rows) {
      auto j = io::to_json(row.report);
      j["rho"] = row.rho;
      j["theta"] = row.theta;
      scan.push_back(j);
    }
    r.payload = dump(json{{"suite", "uncertainty"}, {"rhos", rhos}, {"max_abs_k", max_k}, {"scan", scan},
                          {"checks", checks}});
  } else {
    r.payload = io::expectation_scan_csv(rows);
  }
  return r;
}

inline Result verify_bohr(const RunConfig& c) {
  const double rho = default_rho(c);
  const auto s = make_state(c, rho, c.theta);
  Eigen::Index peak = 0;
  s.coeffs.cwiseAbs2().maxCoeff(&peak);
  const double mu = rho * rho;
  const double expect = std::floor(mu);
  Result r;
  const auto n = static_cast<double>(peak);
  // At integer rho^2 the Poisson mode is shared by rho^2 - 1 and rho^2.
  const bool pass = (mu == expect) ? (n == expect || n == expect - 1.0) : n == expect;
  r.checks.push_back({"bohr.argmax_n[rho^2=" + label(mu) + "]", n, "==", expect, pass});
  r.notes.push_back("argmax n = " + std::to_string(peak));
  if (c.format == "json") {
    r.payload = dump(json{{"suite", "bohr"}, {"rho", rho}, {"rho2", mu}, {"argmax_n", peak},
                          {"expected", expect}, {"checks", json::array({to_json(r.checks[0])})}});
  } else {
    r.payload = io::state_csv(s);
  }
  return r;
}

inline Result verify_recurrence(const RunConfig& c) {
  const auto s = make_state(c, default_rho(c), c.theta);
  const auto obs = build_operator(s.params(), operator_tag_from_string(c.observable), s.dim() + 4);
  const auto rep = almost_periodic_scan(s, obs, {c.periods, c.samples_per_period, true});
  Result r;
  r.checks.push_back(check_above("recurrence.grid_min_residual", rep.grid_best_residual, c.thresholds.recurrence_floor));
  r.checks.push_back(check_below("recurrence.best_below_first_period", rep.best_residual, rep.first_period_residual));
  if (c.format == "json") {
    json checks = json::array();
    for (const auto& ch : r.checks) checks.push_back(to_json(ch));
    auto j = io::to_json(rep);
    j["observable"] = c.observable;
    j["checks"] = checks;
    r.payload = dump(j);
  } else {
    r.payload = io::recurrence_csv(rep);
  }
  return r;
}

inline Result cmd_invert(const RunConfig& c) {
  PeriodFunction periods;
  const auto mp = c.params();
  if (!c.spectrum.empty()) {
    periods = period_function(*spectrum_for(c, 3), c.hmax);
  } else if (mp.kind == ModelKind::DiagonalQuadratic) {
    periods = period_function(mp, c.hmax);
  } else {
    periods = period_function(solve_for(c, c.levels), c.hmax);
  }
  InversionOptions opts;
  opts.grid_points = c.grid;
  opts.tol = c.thresholds.roundtrip_tol;
  opts.u_max = c.umax;
  const auto table = invert_periods(periods, opts);
  Result r;
  r.checks.push_back(check_below("invert.max_roundtrip", table.max_residual, c.thresholds.roundtrip_tol));
  r.payload = c.format == "json" ? dump(io::to_json(table)) : io::potential_csv(table);
  return r;
}

inline Result cmd_trajectory(const RunConfig& c) {
  const auto mp = c.params();
  HamiltonianPtr ham;
  const double y_hint = c.q ? 0.5 * (*c.p * *c.p + mp.omega * mp.omega * *c.q * *c.q)
                            : mp.hbar * mp.omega * default_rho(c) * default_rho(c);
  if (mp.kind == ModelKind::DiagonalQuadratic && c.spectrum.empty()) {
    ham = classical_hamiltonian(mp);
  } else {
    ham = classical_hamiltonian(*spectrum_for(c, static_cast<std::size_t>(y_hint / (mp.hbar * mp.omega)) + 8));
  }
  const auto start = c.q ? PhasePoint::pq(*c.q, *c.p, ham)
                         : PhasePoint::action_angle(default_rho(c) * std::sqrt(2.0 * mp.hbar / mp.omega), c.theta, ham);
  const auto samples = sample_trajectory(start, c.t_end, c.samples);
  return {c.format == "json" ? dump(io::to_json(samples)) : io::trajectory_csv(samples), {}, {}};
}

inline Result dispatch(const RunConfig& c) {
  if (c.command == "spectrum") return cmd_spectrum(c);
  if (c.command == "state") return cmd_state(c);
  if (c.command == "evolve") return cmd_evolve(c);
  if (c.command == "invert") return cmd_invert(c);
  if (c.command == "trajectory") return cmd_trajectory(c);
  if (c.command == "verify") {
    if (c.suite == "evolution") return verify_evolution(c);
    if (c.suite == "identity") return verify_identity(c);
    if (c.suite == "uncertainty") return verify_uncertainty(c);
    if (c.suite == "bohr") return verify_bohr(c);
    if (c.suite == "recurrence") return verify_recurrence(c);
    throw ValidationError("unknown verify suite '" + c.suite + "'");
  }
  throw ValidationError("unknown command '" + c.command + "'");
}

// ---------------------------------------------------------------------------
// Argument parsing

namespace detail {

// Flags are parsed into a scratch config; only the ones actually given are
// copied over the config file's values.
struct Binder {
  CLI::App& app;
  RunConfig& scratch;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> bindings;

  template <class T>
  CLI::Option* add(const std::string& flag, T RunConfig::*member, const std::string& help) {
    auto* opt = app.add_option(flag, scratch.*member, help);
    bindings.emplace_back(opt, [this, member](RunConfig& dst) { dst.*member = scratch.*member; });
    return opt;
  }

  void apply(RunConfig& dst) const {
    for (const auto& [opt, copy] : bindings) {
      if (opt->count() > 0) copy(dst);
    }
  }
};

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coherent states for anharmonic oscillators: spectra, states, verification suites, inversion", "anco"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig scratch;
  detail::Binder b{app, scratch, {}};
  std::string config_path;
  std::string save_config;
  app.add_option("--config", config_path, "JSON config mirroring the flags; flags override it");
  app.add_option("--save-config", save_config, "write the effective config as JSON");
  b.add("--model", &RunConfig::model, "diagonal | quartic")->check(CLI::IsMember({"diagonal", "quartic"}));
  b.add("--omega", &RunConfig::omega, "oscillator frequency");
  b.add("--lambda", &RunConfig::lambda, "anharmonicity (>= 0)");
  b.add("--hbar", &RunConfig::hbar, "Planck constant");
  b.add("--rho", &RunConfig::rho, "dimensionless radial label");
  b.add("--theta", &RunConfig::theta, "angle label");
  b.add("--levels", &RunConfig::levels, "levels to report (spectrum) or block size (verify identity)");
  b.add("--dim", &RunConfig::dim, "state basis size (0 = automatic)");
  b.add("--basis", &RunConfig::basis, "diagonalization basis size (0 = grow until converged)");
  b.add("--tol", &RunConfig::tol, "level convergence tolerance");
  b.add("--cesaro", &RunConfig::cesaro, "Cesaro lengths N")->delimiter(',');
  b.add("--format", &RunConfig::format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  b.add("--out", &RunConfig::out, "output file (default stdout)");
  b.add("--spectrum", &RunConfig::spectrum, "spectrum JSON to use instead of solving");
  b.add("--time", &RunConfig::time, "evolution time (evolve)");
  b.add("--t-end", &RunConfig::t_end, "trajectory end time");
  b.add("--samples", &RunConfig::samples, "trajectory samples");
  b.add("--hmax", &RunConfig::hmax, "largest energy of the period table (invert)");
  b.add("--umax", &RunConfig::umax, "largest potential value to reconstruct (0 = hmax)");
  b.add("--grid", &RunConfig::grid, "inversion grid points");
  b.add("--observable", &RunConfig::observable, "observable for recurrence: q, p, q2, p2, q4, I");
  b.add("--periods", &RunConfig::periods, "nominal periods scanned (recurrence)");
  b.add("--samples-per-period", &RunConfig::samples_per_period, "time samples per nominal period");
  b.add("--q", &RunConfig::q, "trajectory start position");
  b.add("--p", &RunConfig::p, "trajectory start momentum");

  std::string suite;
  for (const char* name : {"spectrum", "state", "evolve", "invert", "trajectory"}) app.add_subcommand(name);
  app.get_subcommand("spectrum")->description("solve and export an energy spectrum");
  app.get_subcommand("state")->description("build a coherent state");
  app.get_subcommand("evolve")->description("evolve a coherent state and compare with the relabelled state");
  app.get_subcommand("invert")->description("reconstruct the effective potential from the orbit periods");
  app.get_subcommand("trajectory")->description("sample a classical trajectory");
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", suite, "identity | uncertainty | evolution | bohr | recurrence")
      ->required()
      ->check(CLI::IsMember({"identity", "uncertainty", "evolution", "bohr", "recurrence"}));

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = config_from_json(io::parse_json(io::read_file(config_path), config_path));
    b.apply(cfg);
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.suite = cfg.command == "verify" ? suite : "";
    cfg.validate();

    const Result r = dispatch(cfg);
    if (!save_config.empty()) io::write_file(save_config, dump(to_json(cfg)));
    if (!cfg.out.empty()) {
      io::write_file(cfg.out, r.payload);
    } else if (cfg.command != "verify") {
      out << r.payload;
    }
    for (const auto& note : r.notes) err << note << '\n';
    // Summary lines share stdout only when the payload is not on it.
    std::ostream& summary = (cfg.out.empty() && cfg.command != "verify") ? err : out;
    bool ok = true;
    for (const auto& ch : r.checks) {
      char line[512];
      std::snprintf(line, sizeof line, "%s %s %.6g %s %.6g", ch.pass ? "PASS" : "FAIL", ch.name.c_str(), ch.value,
                    ch.relation.c_str(), ch.threshold);
      summary << line << '\n';
      ok = ok && ch.pass;
    }
    if (!ok) {
      for (const auto& ch : r.checks) {
        if (!ch.pass) err << "failed invariant: " << ch.name << '\n';
      }
      return kNumerical;
    }
    return kPass;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace anco::cli
