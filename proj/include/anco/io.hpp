#pragma once

// JSON and CSV exchange formats for spectra, states, reports and tables.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "anco/coherent.hpp"
#include "anco/error.hpp"
#include "anco/identity.hpp"
#include "anco/inversion.hpp"
#include "anco/phasespace.hpp"
#include "anco/spectrum.hpp"

namespace anco::io {

using json = nlohmann::ordered_json;

// Shortest round-trip representation of a double.
inline std::string fmt(double v) {
  if (v == 0.0) v = 0.0;  // print -0 as 0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_row(std::initializer_list<double> values) {
  std::string row;
  bool first = true;
  for (double v : values) {
    if (!first) row += ',';
    row += fmt(v);
    first = false;
  }
  return row + '\n';
}

// ---------------------------------------------------------------------------
// Spectrum

inline json to_json(const ModelParams& p) {
  return json{{"omega", p.omega}, {"lambda", p.lambda}, {"hbar", p.hbar}, {"model", std::string(to_string(p.kind))}};
}

inline ModelParams model_params_from_json(const json& j) {
  try {
    ModelParams p;
    p.omega = j.at("omega").get<double>();
    p.lambda = j.at("lambda").get<double>();
    p.hbar = j.value("hbar", 1.0);
    p.kind = model_kind_from_string(j.at("model").get<std::string>());
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad model params JSON: ") + e.what());
  }
}

inline json to_json(const EnergySpectrum& s) {
  return json{{"params", to_json(s.params)}, {"basis_dim", s.basis_dim}, {"tol", s.tol},
              {"levels", s.levels},         {"n_converged", s.n_converged}};
}

inline EnergySpectrum spectrum_from_json(const json& j) {
  try {
    EnergySpectrum s;
    s.params = model_params_from_json(j.at("params"));
    s.basis_dim = j.at("basis_dim").get<std::size_t>();
    s.tol = j.at("tol").get<double>();
    s.levels = j.at("levels").get<std::vector<double>>();
    s.n_converged = j.at("n_converged").get<std::size_t>();
    if (s.n_converged > s.levels.size()) throw ValidationError("n_converged exceeds the number of levels");
    for (std::size_t i = 1; i < s.levels.size(); ++i) {
      if (!(s.levels[i] > s.levels[i - 1])) throw ValidationError("spectrum levels must be strictly increasing");
    }
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad spectrum JSON: ") + e.what());
  }
}

inline std::string spectrum_csv(const EnergySpectrum& s) {
  std::string out = "n,E\n";
  for (std::size_t n = 0; n < s.levels.size(); ++n) out += csv_row({static_cast<double>(n), s.levels[n]});
  return out;
}

// ---------------------------------------------------------------------------
// Coherent states

inline json to_json(const CoherentState& s) {
  json coeffs = json::array();
  for (Eigen::Index n = 0; n < s.coeffs.size(); ++n) coeffs.push_back({s.coeffs[n].real(), s.coeffs[n].imag()});
  return json{{"label", {{"rho", s.rho}, {"theta", s.theta}}},
              {"spectrum_hash", spectrum_hash(*s.spectrum)},
              {"params", to_json(s.params())},
              {"hprime", s.hprime},
              {"trunc_mass", s.trunc_mass},
              {"dim", s.dim()},
              {"coefficients", coeffs}};
}

inline std::string state_csv(const CoherentState& s) {
  std::string out = "n,re,im,abs2\n";
  for (Eigen::Index n = 0; n < s.coeffs.size(); ++n) {
    out += csv_row({static_cast<double>(n), s.coeffs[n].real(), s.coeffs[n].imag(), std::norm(s.coeffs[n])});
  }
  return out;
}

inline json to_json(const ExpectationReport& r) {
  return json{{"mean_q", r.mean_q},
              {"mean_p", r.mean_p},
              {"var_q", r.var_q},
              {"var_p", r.var_p},
              {"uncertainty_product", r.uncertainty_product},
              {"a_residual_norm", r.a_residual_norm},
              {"k_value", r.k_value}};
}

struct ScanRow {
  double rho;
  double theta;
  ExpectationReport report;
};

inline std::string expectation_scan_csv(const std::vector<ScanRow>& rows) {
  std::string out = "rho,theta,mean_q,mean_p,var_q,var_p,product,a_residual,k\n";
  for (const auto& r : rows) {
    out += csv_row({r.rho, r.theta, r.report.mean_q, r.report.mean_p, r.report.var_q, r.report.var_p,
                    r.report.uncertainty_product, r.report.a_residual_norm, r.report.k_value});
  }
  return out;
}

inline json to_json(const RecurrenceReport& r) {
  return json{{"nominal_period", r.nominal_period},
              {"first_period_residual", r.first_period_residual},
              {"grid_best_time", r.grid_best_time},
              {"grid_best_residual", r.grid_best_residual},
              {"best_time", r.best_time},
              {"best_residual", r.best_residual},
              {"samples", r.times.size()}};
}

inline std::string recurrence_csv(const RecurrenceReport& r) {
  std::string out = "t,re,im,residual\n";
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    out += csv_row({r.times[i], r.values[i].real(), r.values[i].imag(), r.residuals[i]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trajectories

inline std::string trajectory_csv(const std::vector<TrajectorySample>& samples) {
  std::string out = "t,q,p,R,Theta_unwrapped,H,tau\n";
  for (const auto& s : samples) out += csv_row({s.t, s.q, s.p, s.radius, s.theta_unwrapped, s.energy, s.tau});
  return out;
}

inline json to_json(const std::vector<TrajectorySample>& samples) {
  json rows = json::array();
  for (const auto& s : samples) {
    rows.push_back({{"t", s.t}, {"q", s.q}, {"p", s.p}, {"R", s.radius}, {"Theta_unwrapped", s.theta_unwrapped},
                    {"H", s.energy}, {"tau", s.tau}});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Resolution of identity

inline json to_json(const ResolutionReport& r) {
  json cesaro = json::array();
  for (const auto& c : r.cesaro) {
    cesaro.push_back({{"N", c.n_periods},
                      {"offdiag_max", c.offdiag_max},
                      {"diag_poisson_dev", c.diag_poisson_dev},
                      {"quad_error", c.quad_error}});
  }
  json pairs = json::array();
  for (const auto& [m, n] : r.commensurate) pairs.push_back({m, n});
  json slope = std::isfinite(r.decay_slope) ? json(r.decay_slope) : json(nullptr);
  return json{{"rho", r.rho},
              {"cesaro", cesaro},
              {"decay_slope", slope},
              {"offdiag_non_increasing", r.offdiag_non_increasing()},
              {"commensurate_pairs", pairs},
              {"radial_masses", r.radial_masses},
              {"diag_dev", r.diag_dev},
              {"radial_tail_bound", r.radial_tail_bound}};
}

inline std::string decay_csv(const ResolutionReport& r) {
  std::string out = "N,offdiag_max\n";
  for (const auto& c : r.cesaro) out += csv_row({static_cast<double>(c.n_periods), c.offdiag_max});
  return out;
}

// ---------------------------------------------------------------------------
// Potential tables

inline std::string potential_csv(const PotentialTable& t) {
  std::string out = "Q,u\n";
  for (std::size_t i = 0; i < t.q().size(); ++i) out += csv_row({t.q()[i], t.u()[i]});
  return out;
}

inline json to_json(const PotentialTable& t) {
  json residuals = json::array();
  for (const auto& r : t.residuals) {
    residuals.push_back(
        {{"H", r.energy}, {"T_in", r.period_in}, {"T_out", r.period_out}, {"rel_error", r.rel_error}});
  }
  json charts = json::array();
  for (const auto& c : t.tau_charts) charts.push_back({{"H", c.energy}, {"Q", c.q}, {"tau", c.tau}});
  return json{{"provenance",
               {{"source", t.source}, {"source_hash", t.source_hash}, {"tol", t.tol}, {"max_residual", t.max_residual}}},
              {"Q", t.q()},
              {"u", t.u()},
              {"round_trip", residuals},
              {"tau_charts", charts}};
}

inline PotentialTable potential_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> q, u;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("Q,u", 0) == 0) continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError("potential CSV: expected 'Q,u' rows");
    try {
      q.push_back(std::stod(line.substr(0, comma)));
      u.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ValidationError("potential CSV: unparsable row '" + line + "'");
    }
  }
  return PotentialTable(std::move(q), std::move(u));
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError("invalid JSON in " + what + ": " + e.what());
  }
}

}  // namespace anco::io
