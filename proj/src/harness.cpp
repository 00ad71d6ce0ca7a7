#include "homog/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "homog/dynamics.hpp"
#include "homog/errors.hpp"
#include "homog/fastslow.hpp"
#include "homog/io.hpp"
#include "homog/observable.hpp"
#include "homog/sampling.hpp"
#include "homog/semiflow.hpp"
#include "homog/stats.hpp"
#include "homog/tower.hpp"
#include "homog/wip.hpp"

#ifndef HOMOG_VERSION
#define HOMOG_VERSION "dev"
#endif

namespace homog {

using nlohmann::json;

namespace {

double to_double(const json& v, const std::string& field) {
  try {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      std::size_t used = 0;
      const double x = std::stod(s, &used);
      if (used == s.size()) return x;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError(field + ": expected a number");
}

std::size_t to_count(const json& v, const std::string& field) {
  const double x = to_double(v, field);
  if (!(x >= 0.0) || x != std::floor(x) || x > 1e18)
    throw ConfigError(field + ": expected a nonnegative integer");
  return static_cast<std::size_t>(x);
}

std::uint64_t to_seed(const json& v) {
  try {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::uint64_t>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      std::size_t used = 0;
      const unsigned long long x = std::stoull(s, &used, 0);
      if (used == s.size() && s.front() != '-') return x;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("seed: expected an unsigned 64-bit integer");
}

bool to_bool(const json& v, const std::string& field) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
  }
  throw ConfigError(field + ": expected true or false");
}

std::string to_str(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field + ": expected a string");
  return v.get<std::string>();
}

// Lists are JSON arrays or comma-separated strings.
std::vector<std::string> split_list(const json& v, const std::string& field) {
  std::vector<std::string> out;
  if (v.is_array()) {
    for (const json& e : v) out.push_back(e.is_string() ? e.get<std::string>() : e.dump());
  } else if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) out.push_back(item);
  } else if (v.is_number()) {
    out.push_back(v.dump());
  } else {
    throw ConfigError(field + ": expected a list");
  }
  return out;
}

template <class T, class F>
std::vector<T> parse_list(const json& v, const std::string& field, F&& each) {
  std::vector<T> out;
  for (const std::string& s : split_list(v, field)) out.push_back(each(json(s), field));
  return out;
}

MapSpec map_spec(const ExperimentConfig& c) {
  MapSpec spec;
  spec.kind = parse_map_kind(c.map);
  spec.gamma = c.gamma;
  spec.p = c.p;
  spec.eta = c.eta;
  if (spec.kind == MapKind::kDoubling || spec.kind == MapKind::kQuadratic) spec.gamma = 0.0;
  spec.validate();
  return spec;
}

RunOptions run_options(const ExperimentConfig& c) {
  RunOptions o;
  o.seed = c.seed;
  o.initial = parse_initial_measure(c.initial);
  o.burnin = c.burnin;
  o.workers = c.workers;
  return o;
}

TowerOptions tower_options(const ExperimentConfig& c) {
  TowerOptions t;
  t.bins = c.bins;
  t.tau_cap = c.tau_cap;
  return t;
}

json mat_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

// Collects output files so the manifest can list them.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }
  void write(const std::string& name, const std::string& content) {
    write_file_atomic(dir_ / name, content);
    names_.push_back(name);
  }
  template <class F>
  void write_with(const std::string& name, F&& f) {
    std::ostringstream os;
    f(os);
    write(name, os.str());
  }
  const std::vector<std::string>& names() const { return names_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

Observable centered_observable(const ExperimentConfig& c, const MapSpec& spec) {
  return center_observable(parse_observable(c.observable), spec, tower_options(c));
}

CoefficientEstimate reference_coeffs(const ExperimentConfig& c, const MapSpec& spec,
                                     const Observable& v) {
  if (spec.kind == MapKind::kQuadratic)
    return green_kubo(spec, v, c.n_max, c.orbit_len, run_options(c));
  return martingale_coeffs(spec, v, tower_options(c));
}

bool run_orbit(const ExperimentConfig& c, OutputDir& out) {
  const MapSpec spec = map_spec(c);
  const Observable v = centered_observable(c, spec);
  const std::size_t n = c.n_grid.front();
  std::vector<double> xs;
  if (c.x0 >= 0.0) {
    xs = collect_orbit(spec, c.x0, n);
  } else {
    SampledOrbit orbit(spec, c.seed, 0, parse_initial_measure(c.initial), c.burnin);
    for (std::size_t k = 0; k < n; ++k, orbit.advance()) xs.push_back(orbit.x());
  }
  out.write_with("orbit.csv", [&](std::ostream& os) {
    std::vector<std::string> header{"k", "x"};
    for (int i = 0; i < v.dim(); ++i) header.push_back("v" + std::to_string(i));
    CsvWriter csv(os, header);
    for (std::size_t k = 0; k < xs.size(); ++k) {
      csv.cell(k).cell(xs[k]);
      const Vec vk = v(xs[k]);
      for (int i = 0; i < v.dim(); ++i) csv.cell(vk[i]);
      csv.end_row();
    }
  });
  return true;
}

bool run_density(const ExperimentConfig& c, OutputDir& out) {
  const MapSpec spec = map_spec(c);
  const DensityEstimate rho = invariant_density_ulam(spec, c.bins);
  out.write_with("density.csv", [&](std::ostream& os) {
    CsvWriter csv(os, {"bin_left", "bin_right", "density"});
    for (std::size_t i = 0; i < rho.density.size(); ++i) {
      const double lo = rho.domain.lo + static_cast<double>(i) * rho.bin_width();
      csv.cell(lo).cell(lo + rho.bin_width()).cell(rho.density[i]);
      csv.end_row();
    }
  });
  json meta{{"bins", c.bins}, {"iterations", rho.iterations}, {"residual", rho.residual}};
  out.write("density.json", meta.dump(2));
  return true;
}

bool run_tower(const ExperimentConfig& c, OutputDir& out) {
  const MapSpec spec = map_spec(c);
  const TowerModel tower(InducedScheme::build(spec, c.tau_cap), tower_options(c));
  out.write_with("cylinders.csv", [&](std::ostream& os) { write_cylinders_csv(os, tower); });
  json meta{{"bins", tower.bins()},
            {"tau_bar", tower.tau_bar()},
            {"telescoped_tau_bar", tower.telescoped_tau_bar()},
            {"tail_mass", tower.tail_mass()},
            {"density_residual", tower.density_residual()},
            {"density_iterations", tower.density_iterations()},
            {"constants_residual", tower.constants_residual()},
            {"fixed_point_residual", tower.fixed_point_residual()}};
  out.write("tower.json", meta.dump(2));
  return true;
}

bool run_decompose(const ExperimentConfig& c, OutputDir& out) {
  const MapSpec spec = map_spec(c);
  const Observable v = centered_observable(c, spec);
  const TowerModel tower(InducedScheme::build(spec, c.tau_cap), tower_options(c));
  DecomposeOptions dopt;
  dopt.K = c.K;
  const MartingaleDecomposition dec = martingale_decompose(tower, v, dopt);
  out.write_with("decomposition.csv",
                 [&](std::ostream& os) { write_decomposition_csv(os, tower, dec); });
  json meta{{"K", dec.K},
            {"phi_norm", dec.phi_norm},
            {"residual_series", dec.residual_series},
            {"residual_kernel", dec.residual_kernel},
            {"residual_identity", dec.residual_identity},
            {"mean", dec.mean},
            {"Sigma", mat_json(sigma_from_m(tower, dec))},
            {"E", mat_json(e_from_chi(tower, dec))}};
  out.write("decompose.json", meta.dump(2));
  if (c.diagnostics) {
    const HypothesisReport rep = hypothesis_diagnostics(
        tower, dec, {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}, c.n_grid, c.samples, c.seed);
    out.write_with("diagnostics.csv", [&](std::ostream& os) { write_diagnostics_csv(os, rep); });
  }
  return true;
}

bool run_coeffs(const ExperimentConfig& c, OutputDir& out) {
  const MapSpec spec = map_spec(c);
  const Observable v = centered_observable(c, spec);
  std::vector<CoefficientEstimate> est;
  for (const std::string& m : c.methods) {
    if (m == "direct")
      est.push_back(direct_coeffs(spec, v, c.n_grid.front(), c.samples, run_options(c)));
    else if (m == "green_kubo")
      est.push_back(green_kubo(spec, v, c.n_max, c.orbit_len, run_options(c)));
    else if (m == "martingale")
      est.push_back(martingale_coeffs(spec, v, tower_options(c)));
  }
  if (est.size() > 1) est.push_back(consensus(est));
  out.write_with("coeffs.csv", [&](std::ostream& os) { write_coeff_csv(os, est); });
  return true;
}

bool run_moments(const ExperimentConfig& c, OutputDir& out) {
  const MapSpec spec = map_spec(c);
  const Observable v = centered_observable(c, spec);
  MomentOptions mo;
  static_cast<RunOptions&>(mo) = run_options(c);
  mo.n_grid = c.n_grid;
  mo.q_grid = c.q_grid;
  mo.samples = c.samples;
  mo.allow_high_q = c.allow_high_q;
  const MomentTable table = moment_table(spec, v, mo);
  out.write_with("moments.csv", [&](std::ostream& os) { write_moment_csv(os, table); });
  json fits = json::array();
  std::set<std::size_t> distinct(c.n_grid.begin(), c.n_grid.end());
  const double decades = std::log10(static_cast<double>(*distinct.rbegin()) /
                                    static_cast<double>(*distinct.begin()));
  if (distinct.size() >= 4 && decades >= 2.0) {
    for (const ScalingFit& f : scaling_exponents(table))
      fits.push_back({{"stat", to_string(f.stat)},
                      {"q", f.q},
                      {"slope", f.slope},
                      {"ci_lo", f.ci_lo},
                      {"ci_hi", f.ci_hi}});
  }
  out.write("scaling.json", json{{"fits", fits}}.dump(2));
  return true;
}

bool run_wip(const ExperimentConfig& c, OutputDir& out) {
  const MapSpec spec = map_spec(c);
  const Observable v = centered_observable(c, spec);
  const PathEnsemble ens =
      sample_paths(spec, v, c.n_grid.front(), c.samples, uniform_grid(c.grid), run_options(c));
  const CoefficientEstimate ref = reference_coeffs(c, spec, v);
  TestReport rep = marginal_normality(ens, ref.Sigma, ref.Sigma_se);
  rep.title = "wip";
  rep.append(drift_check(ens, ref.E, ref.E_se));
  out.write_with("ensemble.csv", [&](std::ostream& os) { write_ensemble_csv(os, ens); });
  out.write("report.json", rep.to_json());
  return rep.passed();
}

bool run_fastslow(const ExperimentConfig& c, OutputDir& out) {
  const MapSpec spec = map_spec(c);
  FastSlowSpec fs;
  fs.d = static_cast<int>(c.xi.size());
  fs.drift = parse_slow_preset(c.drift);
  fs.noise = parse_slow_preset(c.noise);
  fs.xi = Eigen::Map<const Eigen::VectorXd>(c.xi.data(), static_cast<Eigen::Index>(c.xi.size()));
  if (fs.noise.name != "zero") fs.v = centered_observable(c, spec);
  const std::vector<double> grid = uniform_grid(c.grid);
  const PathEnsemble fast = simulate_fastslow(fs, spec, c.n_grid.front(), c.samples, grid,
                                              run_options(c));
  out.write_with("ensemble.csv", [&](std::ostream& os) { write_ensemble_csv(os, fast); });
  json meta{{"divergent", fast.divergent}, {"paths", fast.paths}};
  // The SDE limit is only formed for linear drift with additive noise.
  const bool linear = fs.drift.name == "zero" || fs.drift.name == "linear";
  if (!linear || (fs.noise.name != "additive" && fs.noise.name != "zero")) {
    meta["sde"] = "not formed: only linear drift with additive noise has a closed-form limit";
    out.write("fastslow.json", meta.dump(2));
    return true;
  }
  const double slope = fs.drift.name == "linear" ? fs.drift.params[0] : 0.0;
  Mat Sigma = Mat::Zero(fs.d, fs.d);
  if (fs.noise.name == "additive") Sigma = reference_coeffs(c, spec, fs.v).Sigma;
  const SDESpec sde = SDESpec::linear_additive(fs.xi, slope, Sigma, c.h);
  const PathEnsemble ref = euler_maruyama(sde, 1.0, c.samples, grid, run_options(c));
  out.write_with("sde_ensemble.csv", [&](std::ostream& os) { write_ensemble_csv(os, ref); });
  const TestReport rep = homogenization_compare(fast, ref);
  meta["sde"] = sde.note;
  meta["Sigma"] = mat_json(Sigma);
  out.write("fastslow.json", meta.dump(2));
  out.write("report.json", rep.to_json());
  return rep.passed();
}

bool run_semiflow(const ExperimentConfig& c, OutputDir& out) {
  const MapSpec base = map_spec(c);
  const SuspensionSpec spec = SuspensionSpec::make(base, parse_roof(c.roof));
  const FlowObservable v = center_flow(spec, FlowObservable::preset(c.flow_observable));
  const FlowCoefficients coeffs = flow_coeffs(spec, v, tower_options(c));
  FlowRunOptions fo;
  static_cast<RunOptions&>(fo) = run_options(c);
  fo.dt = c.dt;
  PathEnsemble ens;
  const TestReport rep = flow_wip_check(spec, v, coeffs, c.T, c.samples, fo, &ens);
  json meta{{"h_bar", spec.h_bar},
            {"inf_h", spec.inf_h},
            {"sup_h", spec.sup_h},
            {"offset", std::vector<double>(v.offset().data(), v.offset().data() + v.dim())},
            {"Sigma", mat_json(coeffs.Sigma)},
            {"E", mat_json(coeffs.E)},
            {"E_prime", mat_json(coeffs.E_prime)},
            {"cov_target", mat_json(coeffs.cov_target)},
            {"drift_target", mat_json(coeffs.drift_target)}};
  out.write("flow_coeffs.json", meta.dump(2));
  out.write_with("flow_ensemble.csv", [&](std::ostream& os) { write_ensemble_csv(os, ens); });
  // one trajectory from the first sampled state, for plotting
  std::vector<double> record;
  for (std::size_t k = 0; k <= 100; ++k) record.push_back(c.T * static_cast<double>(k) / 100.0);
  const auto path = sampled_flow_trajectory(spec, v, record, fo);
  out.write_with("trajectory.csv", [&](std::ostream& os) { write_flow_csv(os, path); });
  out.write("report.json", rep.to_json());
  return rep.passed();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "subcommand") c.subcommand = to_str(v, key);
    else if (key == "map") c.map = to_str(v, key);
    else if (key == "gamma") c.gamma = to_double(v, key);
    else if (key == "p") c.p = to_double(v, key);
    else if (key == "eta") c.eta = to_double(v, key);
    else if (key == "observable") c.observable = to_str(v, key);
    else if (key == "n") c.n_grid = parse_list<std::size_t>(v, key, to_count);
    else if (key == "q") c.q_grid = parse_list<double>(v, key, to_double);
    else if (key == "samples") c.samples = to_count(v, key);
    else if (key == "seed") c.seed = to_seed(v);
    else if (key == "initial") c.initial = to_str(v, key);
    else if (key == "burnin") c.burnin = to_count(v, key);
    else if (key == "workers") c.workers = to_count(v, key);
    else if (key == "out") c.out = to_str(v, key);
    else if (key == "allow_high_q") c.allow_high_q = to_bool(v, key);
    else if (key == "x0") c.x0 = to_double(v, key);
    else if (key == "bins") c.bins = to_count(v, key);
    else if (key == "tau_cap") c.tau_cap = to_count(v, key);
    else if (key == "K") c.K = to_count(v, key);
    else if (key == "diagnostics") c.diagnostics = to_bool(v, key);
    else if (key == "methods") c.methods = split_list(v, key);
    else if (key == "orbit_len") c.orbit_len = to_count(v, key);
    else if (key == "n_max") c.n_max = to_count(v, key);
    else if (key == "grid") c.grid = to_count(v, key);
    else if (key == "drift") c.drift = to_str(v, key);
    else if (key == "noise") c.noise = to_str(v, key);
    else if (key == "xi") c.xi = parse_list<double>(v, key, to_double);
    else if (key == "h") c.h = to_double(v, key);
    else if (key == "roof") c.roof = to_str(v, key);
    else if (key == "flow_observable") c.flow_observable = to_str(v, key);
    else if (key == "T") c.T = to_double(v, key);
    else if (key == "dt") c.dt = to_double(v, key);
    else throw ConfigError(key + ": unknown configuration field");
  }
  return c;
}

json ExperimentConfig::to_json() const {
  return json{{"subcommand", subcommand},
              {"map", map},
              {"gamma", gamma},
              {"p", p},
              {"eta", eta},
              {"observable", observable},
              {"n", n_grid},
              {"q", q_grid},
              {"samples", samples},
              {"seed", seed},
              {"initial", initial},
              {"burnin", burnin},
              {"workers", workers},
              {"out", out.string()},
              {"allow_high_q", allow_high_q},
              {"x0", x0},
              {"bins", bins},
              {"tau_cap", tau_cap},
              {"K", K},
              {"diagnostics", diagnostics},
              {"methods", methods},
              {"orbit_len", orbit_len},
              {"n_max", n_max},
              {"grid", grid},
              {"drift", drift},
              {"noise", noise},
              {"xi", xi},
              {"h", h},
              {"roof", roof},
              {"flow_observable", flow_observable},
              {"T", T},
              {"dt", dt}};
}

void ExperimentConfig::validate() const {
  if (std::find(kSubcommands.begin(), kSubcommands.end(), subcommand) == kSubcommands.end())
    throw ConfigError("subcommand: unknown subcommand '" + subcommand + "'");
  (void)map_spec(*this);
  parse_initial_measure(initial);
  if (n_grid.empty()) throw ConfigError("n: at least one value required");
  for (std::size_t n : n_grid)
    if (n < 1) throw ConfigError("n: counts must be at least 1");
  if (samples < 1) throw ConfigError("samples: must be at least 1");
  if (bins < 2) throw ConfigError("bins: must be at least 2");
  if (tau_cap < 1) throw ConfigError("tau_cap: must be at least 1");
  if (K < 1) throw ConfigError("K: must be at least 1");
  if (grid < 1) throw ConfigError("grid: must be at least 1");
  if (orbit_len < 1 || n_max < 1) throw ConfigError("orbit_len: counts must be at least 1");
  if (q_grid.empty()) throw ConfigError("q: at least one value required");
  if (xi.empty()) throw ConfigError("xi: at least one component required");
  static const std::set<std::string> known{"direct", "green_kubo", "martingale"};
  if (methods.empty()) throw ConfigError("methods: at least one method required");
  for (const std::string& m : methods)
    if (!known.count(m)) throw ConfigError("methods: unknown method '" + m + "'");
  if (subcommand != "semiflow" && subcommand != "fastslow") (void)parse_observable(observable);
}

json RunManifest::to_json() const {
  json files_json = json::array();
  for (const auto& [name, sum] : files) files_json.push_back({{"file", name}, {"sha256", sum}});
  return json{{"config", config},
              {"version", version},
              {"wall_seconds", wall_seconds},
              {"gates_passed", gates_passed},
              {"files", files_json}};
}

RunManifest run(const ExperimentConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  OutputDir out(config.out);
  std::filesystem::remove(out.dir() / "manifest.json");
  bool passed = true;
  const std::string& s = config.subcommand;
  if (s == "orbit") passed = run_orbit(config, out);
  else if (s == "density") passed = run_density(config, out);
  else if (s == "tower") passed = run_tower(config, out);
  else if (s == "decompose") passed = run_decompose(config, out);
  else if (s == "coeffs") passed = run_coeffs(config, out);
  else if (s == "moments") passed = run_moments(config, out);
  else if (s == "wip") passed = run_wip(config, out);
  else if (s == "fastslow") passed = run_fastslow(config, out);
  else if (s == "semiflow") passed = run_semiflow(config, out);

  RunManifest m;
  m.config = config.to_json();
  m.version = HOMOG_VERSION;
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m.gates_passed = passed;
  for (const std::string& name : out.names()) m.files.emplace_back(name, sha256_file(out.dir() / name));
  write_file_atomic(out.dir() / "manifest.json", m.to_json().dump(2));
  return m;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e)) return 2;
  if (dynamic_cast<const ConvergenceError*>(&e)) return 3;
  return 1;
}

}  // namespace homog
