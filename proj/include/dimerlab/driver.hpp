#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dimerlab/chain.hpp"
#include "dimerlab/entanglement.hpp"
#include "dimerlab/large_spin.hpp"
#include "dimerlab/meanfield.hpp"
#include "dimerlab/model.hpp"
#include "dimerlab/pair_model.hpp"
#include "dimerlab/parallel.hpp"
#include "dimerlab/verification.hpp"
#include "dimerlab/version.hpp"

namespace dimerlab {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Configuration or input errors; mapped to exit code 1 by the CLI.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Task { PairScan, MfScan, PhaseDiagram, ChainScan, LargeS, Verify };

inline Task task_from_name(const std::string& name) {
  if (name == "pair-scan") return Task::PairScan;
  if (name == "mf-scan") return Task::MfScan;
  if (name == "phase-diagram") return Task::PhaseDiagram;
  if (name == "chain-scan") return Task::ChainScan;
  if (name == "large-s") return Task::LargeS;
  if (name == "verify") return Task::Verify;
  throw ConfigError("unknown task '" + name + "'");
}

inline const char* task_name(Task t) {
  switch (t) {
    case Task::PairScan: return "pair-scan";
    case Task::MfScan: return "mf-scan";
    case Task::PhaseDiagram: return "phase-diagram";
    case Task::ChainScan: return "chain-scan";
    case Task::LargeS: return "large-s";
    case Task::Verify: return "verify";
  }
  return "?";
}

struct AxisGrid {
  double start = 0.0;
  double stop = 1.0;
  int points = 2;

  std::vector<double> values() const {
    std::vector<double> v(points);
    for (int i = 0; i < points; ++i) v[i] = start + (stop - start) * i / (points - 1);
    return v;
  }
  void validate(const std::string& name) const {
    if (points < 2) throw ConfigError(name + ": points must be >= 2");
    if (!(stop > start)) throw ConfigError(name + ": stop must exceed start");
  }
};

/// One batch run: a task, model parameters, sweep grids, output location.
struct RunConfig {
  Task task = Task::PairScan;
  ModelParams params;
  AxisGrid grid;                    ///< field axis
  AxisGrid alpha_grid;              ///< second axis of phase-diagram
  bool raw_field = false;           ///< grid in raw B instead of b = B / (2 Jx s)
  std::string output_path;
  int threads = 0;                  ///< 0: resolve from env / hardware
  NumericPolicy policy;
  json raw;                         ///< parsed config after overrides (sidecar)
};

namespace driver_detail {

inline void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json* node = &config;
  std::size_t pos = 0;
  for (;;) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (key.empty()) throw ConfigError("--set: empty key segment in '" + path + "'");
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config field '" + key + "': " + e.what());
  }
}

inline AxisGrid parse_grid(const json& j, const std::string& name, AxisGrid fallback) {
  if (!j.contains(name)) return fallback;
  const json& g = j.at(name);
  AxisGrid out;
  out.start = get_or(g, "start", fallback.start);
  out.stop = get_or(g, "stop", fallback.stop);
  out.points = get_or(g, "points", fallback.points);
  return out;
}

}  // namespace driver_detail

inline RunConfig parse_run_config(json config, const std::vector<std::string>& overrides = {}) {
  using driver_detail::get_or;
  for (const std::string& o : overrides) driver_detail::apply_override(config, o);
  RunConfig rc;
  rc.raw = config;
  if (!config.contains("task")) throw ConfigError("config: missing 'task'");
  rc.task = task_from_name(config.at("task").get<std::string>());

  const json params = config.value("params", json::object());
  rc.params.two_s = get_or(params, "two_s", 2);
  rc.params.jx = get_or(params, "jx", 1.0);
  rc.params.chi = get_or(params, "chi", 0.75);
  rc.params.alpha = get_or(params, "alpha", 0.0);
  rc.params.b = get_or(params, "b", 0.0);
  rc.params.n_pairs = get_or(params, "n_pairs", 4);
  rc.params.boundary = boundary_from_name(get_or<std::string>(params, "boundary", "cyclic"));
  try {
    rc.params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  rc.grid = driver_detail::parse_grid(config, "grid", AxisGrid{0.0, 0.6, 100});
  rc.alpha_grid = driver_detail::parse_grid(config, "grid_alpha", AxisGrid{0.005, 0.2, 40});
  if (rc.task != Task::Verify) {
    rc.grid.validate("grid");
    if (rc.task == Task::PhaseDiagram) rc.alpha_grid.validate("grid_alpha");
  }
  const std::string unit = get_or<std::string>(config, "field_unit", "scaled");
  if (unit == "raw")
    rc.raw_field = true;
  else if (unit != "scaled")
    throw ConfigError("field_unit must be 'scaled' or 'raw'");
  rc.output_path = get_or<std::string>(config, "output_path", "");
  rc.threads = get_or(config, "threads", 0);

  const json numeric = config.value("numeric", json::object());
  rc.policy.assembly_tol = get_or(numeric, "assembly_tol", rc.policy.assembly_tol);
  rc.policy.eig_residual_tol = get_or(numeric, "eig_residual_tol", rc.policy.eig_residual_tol);
  rc.policy.psd_slack = get_or(numeric, "psd_slack", rc.policy.psd_slack);
  rc.policy.fixed_point_tol = get_or(numeric, "fixed_point_tol", rc.policy.fixed_point_tol);
  rc.policy.max_fixed_point_iters =
      get_or(numeric, "max_fixed_point_iters", rc.policy.max_fixed_point_iters);
  rc.policy.dense_cap = get_or(numeric, "dense_cap", rc.policy.dense_cap);
  rc.policy.dim_cap = get_or(numeric, "dim_cap", rc.policy.dim_cap);
  return rc;
}

inline RunConfig load_run_config(const std::string& config_path,
                                 const std::vector<std::string>& overrides = {}) {
  json config = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
    try {
      in >> config;
    } catch (const json::exception& e) {
      throw ConfigError("config parse error: " + std::string(e.what()));
    }
  }
  return parse_run_config(std::move(config), overrides);
}

/// Tabular task output; every cell is preformatted for CSV emission.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// 12 significant digits, C locale, '.' decimal point.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::string(buf);
}

inline std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_csv(const Table& table, std::ostream& os) {
  for (std::size_t c = 0; c < table.header.size(); ++c)
    os << (c ? "," : "") << csv_quote(table.header[c]);
  os << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_quote(row[c]);
    os << "\n";
  }
}

namespace driver_detail {

inline double to_raw_field(const RunConfig& rc, double grid_value) {
  return rc.raw_field ? grid_value : grid_value * rc.params.jx_scale();
}

inline Table run_pair_scan(const RunConfig& rc) {
  Table t;
  t.header = {"b_scaled", "e_plus", "e_minus", "gs_parity", "n12", "m", "s_minus_abs_m"};
  const auto grid = rc.grid.values();
  const Index d = rc.params.site_dim();
  const SpinOps ops = spin_operators(rc.params.two_s);
  t.rows.resize(grid.size());
  parallel_for(grid.size(), rc.threads, [&](std::size_t i) {
    ModelParams p = rc.params;
    p.b = to_raw_field(rc, grid[i]);
    const PairSpectrum spec = pair_spectrum_by_parity(p, 0.0, rc.policy);
    const Vector& gs = spec.gs_state();
    const DensityMatrix rho12 = pure_density_matrix(gs, {d, d});
    double m = 0.0;
    for (Index k1 = 0; k1 < d; ++k1)
      for (Index k2 = 0; k2 < d; ++k2)
        m += 0.5 * std::norm(gs[k1 * d + k2]) * ((k1 - p.spin()) + (k2 - p.spin()));
    t.rows[i] = {format_number(p.b / p.jx_scale()), format_number(spec.e_plus),
                 format_number(spec.e_minus), std::to_string(spec.gs_parity()),
                 format_number(negativity(rho12, rc.policy)), format_number(m),
                 format_number(p.spin() - std::abs(m))};
  });
  return t;
}

inline Table run_mf_scan(const RunConfig& rc) {
  Table t;
  t.header = {"b_scaled", "sx",     "energy_per_pair", "phase",  "m_gmf",
              "n12_gmf",  "s1_gmf", "s2_gmf",          "iterations"};
  const auto grid = rc.grid.values();
  t.rows.resize(grid.size());
  parallel_for(grid.size(), rc.threads, [&](std::size_t i) {
    ModelParams p = rc.params;
    p.b = to_raw_field(rc, grid[i]);
    MfOptions opts;
    opts.tol = rc.policy.fixed_point_tol;
    opts.max_iters = rc.policy.max_fixed_point_iters;
    const MfSolution sol = solve_self_consistent(p, {}, opts, rc.policy);
    const GmfObservables obs = gmf_observables(p, rc.policy);
    t.rows[i] = {format_number(p.b / p.jx_scale()), format_number(sol.sx),
                 format_number(sol.energy_per_pair), phase_name(sol.phase),
                 format_number(obs.m),              format_number(obs.n12),
                 format_number(obs.s1),             format_number(obs.s2),
                 std::to_string(sol.iterations)};
  });
  return t;
}

inline Table run_phase_diagram(const RunConfig& rc) {
  Table t;
  t.header = {"alpha", "b_scaled", "phase", "sx", "alpha_c_b"};
  const auto alphas = rc.alpha_grid.values();
  std::vector<double> fields = rc.grid.values();
  for (double& b : fields) b = to_raw_field(rc, b);
  const PhaseDiagram pd = phase_diagram(rc.params, alphas, fields, rc.policy);
  for (std::size_t i = 0; i < alphas.size(); ++i)
    for (std::size_t j = 0; j < fields.size(); ++j) {
      t.rows.push_back({format_number(alphas[i]),
                        format_number(fields[j] / rc.params.jx_scale()),
                        pd.failed[i][j] ? "unconverged" : phase_name(pd.phase[i][j]),
                        format_number(pd.sx[i][j]), format_number(pd.alpha_c_curve[j])});
    }
  return t;
}

inline Table run_chain_scan(const RunConfig& rc) {
  Table t;
  t.header = {"b_scaled", "energy", "parity", "m",      "s_minus_abs_m", "n12",
              "s1",       "s2",     "sx_gmf", "n12_gmf", "s1_gmf",       "s2_gmf"};
  std::vector<double> fields = rc.grid.values();
  for (double& b : fields) b = to_raw_field(rc, b);
  const auto records = field_scan(rc.params, fields, rc.threads, rc.policy);
  for (const ScanRecord& r : records)
    t.rows.push_back({format_number(r.b_scaled), format_number(r.energy),
                      std::to_string(r.gs_parity), format_number(r.m),
                      format_number(rc.params.spin() - std::abs(r.m)), format_number(r.n12),
                      format_number(r.s1), format_number(r.s2), format_number(r.sx_gmf),
                      format_number(r.n12_gmf), format_number(r.s1_gmf),
                      format_number(r.s2_gmf)});
  return t;
}

inline Table run_large_s(const RunConfig& rc) {
  Table t;
  const auto grid = rc.grid.values();
  const bool xx = rc.params.chi >= 1.0;
  if (xx)
    t.header = {"b_scaled", "m_block", "sigma_sq", "r_m", "n12_exact", "n12_gaussian"};
  else
    t.header = {"b_scaled", "n12_exact", "n12_rpa", "s2_rpa"};
  t.rows.resize(grid.size());
  parallel_for(grid.size(), rc.threads, [&](std::size_t i) {
    ModelParams p = rc.params;
    p.b = to_raw_field(rc, grid[i]);
    const double b_scaled = p.b / p.jx_scale();
    if (xx) {
      const XxBlockSolution sol = xx_block_ground_state(p.two_s, p.b / (p.jx * p.spin()));
      const GaussianNegativity g = gaussian_negativity(sol);
      t.rows[i] = {format_number(b_scaled),      std::to_string(sol.m_block),
                   format_number(sol.sigma_sq),  format_number(sol.r_m),
                   format_number(block_state_negativity(sol.coeffs)),
                   format_number(g.n12)};
    } else {
      const Index d = p.site_dim();
      const PairSpectrum spec = pair_spectrum_by_parity(p, 0.0, rc.policy);
      const double n12 =
          negativity(pure_density_matrix(spec.gs_state(), {d, d}), rc.policy);
      std::string n_rpa = "nan", s_rpa = "nan";
      try {
        const RpaResult rpa = rpa_negativity_entropy(p);
        n_rpa = format_number(rpa.n12);
        s_rpa = format_number(rpa.s2);
      } catch (const std::domain_error&) {
        // grid point outside the RPA branch validity; leave nan
      }
      t.rows[i] = {format_number(b_scaled), format_number(n12), n_rpa, s_rpa};
    }
  });
  return t;
}

}  // namespace driver_detail

inline Table run_table_task(const RunConfig& rc) {
  switch (rc.task) {
    case Task::PairScan: return driver_detail::run_pair_scan(rc);
    case Task::MfScan: return driver_detail::run_mf_scan(rc);
    case Task::PhaseDiagram: return driver_detail::run_phase_diagram(rc);
    case Task::ChainScan: return driver_detail::run_chain_scan(rc);
    case Task::LargeS: return driver_detail::run_large_s(rc);
    case Task::Verify: break;
  }
  throw ConfigError("run_table_task: verify is not a table task");
}

inline ordered_json acceptance_report(const std::vector<CriterionResult>& results) {
  ordered_json criteria = ordered_json::array();
  int failures = 0;
  for (const CriterionResult& r : results) {
    ordered_json entry;
    entry["id"] = r.id;
    entry["description"] = r.description;
    entry["expected"] = r.expected;
    entry["actual"] = r.actual;
    entry["tolerance"] = r.tolerance;
    entry["pass"] = r.pass;
    criteria.push_back(std::move(entry));
    if (!r.pass) ++failures;
  }
  ordered_json report;
  report["version"] = kVersion;
  report["criteria"] = std::move(criteria);
  report["total"] = static_cast<int>(results.size());
  report["failures"] = failures;
  return report;
}

struct RunOutcome {
  int exit_code = 0;
  std::string message;
};

/// Execute a config end to end: compute, then write the CSV (or JSON report
/// for verify) and the sidecar. Outputs are written only after the whole
/// computation succeeds, so failures leave no partial files.
inline RunOutcome run(const RunConfig& rc) {
  const auto t0 = std::chrono::steady_clock::now();
  const int threads = rc.threads > 0 ? rc.threads : hardware_threads();
  RunConfig resolved = rc;
  resolved.threads = threads;
  try {
    std::string payload;
    int exit_code = 0;
    if (rc.task == Task::Verify) {
      const ordered_json report = acceptance_report(run_acceptance(threads));
      payload = report.dump(2) + "\n";
      if (report["failures"].get<int>() > 0) exit_code = 3;
    } else {
      const Table table = run_table_task(resolved);
      std::ostringstream os;
      write_csv(table, os);
      payload = os.str();
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (rc.output_path.empty()) {
      std::fputs(payload.c_str(), stdout);
    } else {
      std::ofstream out(rc.output_path, std::ios::binary);
      if (!out) throw ConfigError("cannot write output file '" + rc.output_path + "'");
      out << payload;
      out.close();
      ordered_json sidecar;
      sidecar["task"] = task_name(rc.task);
      sidecar["config"] = rc.raw;
      sidecar["threads"] = threads;
      sidecar["version"] = kVersion;
      sidecar["wall_time_seconds"] = wall;
      std::ofstream meta(rc.output_path + ".meta.json", std::ios::binary);
      meta << sidecar.dump(2) << "\n";
    }
    return {exit_code, ""};
  } catch (const ConfigError& e) {
    return {1, e.what()};
  } catch (const NonConvergenceError& e) {
    return {2, e.what()};
  } catch (const DimensionCapError& e) {
    return {2, e.what()};
  } catch (const std::invalid_argument& e) {
    return {1, e.what()};
  } catch (const std::domain_error& e) {
    return {2, e.what()};
  }
}

}  // namespace dimerlab
