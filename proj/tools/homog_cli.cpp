#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "homog/errors.hpp"
#include "homog/harness.hpp"

namespace {

// (flag, config key, help). Every value is passed through as a string and
// converted by the config parser, so file and flag values share validation.
struct Flag {
  const char* flag;
  const char* key;
  const char* help;
};

const Flag kFlags[] = {
    {"--map", "map", "lsv | doubling | quadratic"},
    {"--gamma", "gamma", "LSV parameter in (0, 1/2)"},
    {"--p", "p", "moment order, 2 <= p < 1/gamma for lsv"},
    {"--eta", "eta", "Hoelder exponent in (0, 1]"},
    {"--obs", "observable", "zero | linear | cos | vec3"},
    {"--n", "n", "comma-separated n grid, e.g. 1e3,1e4"},
    {"--q", "q", "comma-separated moment orders"},
    {"--samples", "samples", "number of independent samples M"},
    {"--seed", "seed", "64-bit seed"},
    {"--initial", "initial", "mu | lebesgue"},
    {"--burnin", "burnin", "burn-in steps for mu starts"},
    {"--workers", "workers", "worker threads (0: HOMOG_WORKERS or all cores)"},
    {"--out", "out", "output directory"},
    {"--x0", "x0", "orbit start (negative: random)"},
    {"--bins", "bins", "discretization bins"},
    {"--tau-cap", "tau_cap", "return-time cap"},
    {"--K", "K", "maximal series terms"},
    {"--methods", "methods", "direct,green_kubo,martingale"},
    {"--orbit-len", "orbit_len", "Green-Kubo orbit length"},
    {"--n-max", "n_max", "Green-Kubo lag cutoff"},
    {"--grid", "grid", "intervals of the time grid"},
    {"--drift", "drift", "zero | linear(c)"},
    {"--noise", "noise", "zero | additive | product"},
    {"--xi", "xi", "initial slow state, comma-separated"},
    {"--em-step", "h", "Euler-Maruyama step"},
    {"--roof", "roof", "const1 | affine(alpha)"},
    {"--flow-obs", "flow_observable", "zero | cos | cos_sin | sin_u | u | cos_u"},
    {"--T", "T", "flow time scale"},
    {"--dt", "dt", "flow substep (0: inf h / 50)"},
};

const std::map<std::string, std::string> kAbout{
    {"orbit", "orbit and observable values from x0"},
    {"density", "Ulam invariant density"},
    {"tower", "induced scheme on Y = [1/2, 1] and its transfer operator"},
    {"decompose", "martingale-coboundary decomposition chi', m'"},
    {"coeffs", "Sigma and E by the direct, Green-Kubo and martingale estimators"},
    {"moments", "moment table of max |S_k| and max |SS_k| with scaling fits"},
    {"wip", "path ensemble of (W, WW) with normality and drift tests"},
    {"fastslow", "fast-slow ensemble and its Euler-Maruyama reference"},
    {"semiflow", "suspension flow coefficients, lap law and flow ensemble"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for iterated invariance principles"};
  app.require_subcommand(1);
  std::string config_path;
  std::map<std::string, std::string> values;
  bool allow_high_q = false, diagnostics = false;
  for (const std::string& name : homog::kSubcommands) {
    CLI::App* sub = app.add_subcommand(name, kAbout.at(name));
    sub->add_option("--config", config_path, "JSON config file; flags override its values");
    for (const Flag& f : kFlags) sub->add_option(f.flag, values[f.key], f.help);
    sub->add_flag("--allow-high-q", allow_high_q, "lift the moment-order guard");
    sub->add_flag("--diagnostics", diagnostics, "also run the hypothesis diagnostics");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    nlohmann::json cfg = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw homog::ConfigError("config: cannot open '" + config_path + "'");
      try {
        cfg = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw homog::ConfigError(std::string("config: ") + e.what());
      }
    }
    CLI::App* sub = app.get_subcommands().front();
    cfg["subcommand"] = sub->get_name();
    for (const Flag& f : kFlags)
      if (sub->count(f.flag) > 0) cfg[f.key] = values[f.key];
    if (sub->count("--allow-high-q") > 0) cfg["allow_high_q"] = true;
    if (sub->count("--diagnostics") > 0) cfg["diagnostics"] = true;

    const homog::RunManifest m = homog::run(homog::ExperimentConfig::from_json(cfg));
    std::cout << "wrote " << m.files.size() << " files to " << m.config["out"].get<std::string>()
              << " in " << m.wall_seconds << " s\n";
    if (!m.gates_passed) {
      std::cerr << "statistical gate failed; see report.json\n";
      return 4;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return homog::exit_code_for(e);
  }
}
