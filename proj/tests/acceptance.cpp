// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "homog/dynamics.hpp"
#include "homog/fastslow.hpp"
#include "homog/observable.hpp"
#include "homog/rng.hpp"
#include "homog/sampling.hpp"
#include "homog/semiflow.hpp"
#include "homog/stats.hpp"
#include "homog/tower.hpp"
#include "homog/wip.hpp"

using namespace homog;

namespace {

const std::vector<std::uint64_t> kSeeds{1, 2, 3};

RunOptions seeded(std::uint64_t seed, InitialMeasure initial = InitialMeasure::kMu) {
  RunOptions o;
  o.seed = seed;
  o.initial = initial;
  return o;
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

bool within(double est, double target, double se, double z = 3.0) {
  return std::abs(est - target) <= z * se;
}

// LSV gamma = 1/4 with the centered linear observable, shared by 4, 5, 6 and 9.
const MapSpec& lsv_spec() {
  static const MapSpec s = MapSpec::lsv(0.25, 3.0);
  return s;
}
const Observable& lsv_v() {
  static const Observable v = center_observable(Observable::linear(), lsv_spec());
  return v;
}

MomentOptions moment_opts(std::uint64_t seed, InitialMeasure initial) {
  MomentOptions mo;
  static_cast<RunOptions&>(mo) = seeded(seed, initial);
  mo.n_grid = {1000, 10000, 100000, 1000000};
  mo.q_grid = {2.0};
  mo.samples = 10000;
  return mo;
}

// mu-start results per seed, reused by criterion 6.
std::map<std::uint64_t, MomentTable> g_moments_mu;
std::map<std::uint64_t, PathEnsemble> g_paths_mu;
CoefficientEstimate g_consensus;
bool g_have_consensus = false;

Outcome pair_identity() {
  const std::vector<MapSpec> maps{MapSpec::doubling(), MapSpec::lsv(0.25, 3.0), MapSpec::lsv(0.4, 2.2),
                                  MapSpec::quadratic()};
  const std::vector<Observable> obs{Observable::linear(), Observable::cosine(), Observable::vec3()};
  RngStream rng(11, 0, StreamPurpose::kAux);
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const MapSpec& spec = maps[k % maps.size()];
    const Observable v = center(obs[(k / maps.size()) % obs.size()], spec);
    const auto len = static_cast<std::size_t>(1000 + rng.uniform() * 9000);
    SampledOrbit orbit(spec, 11, k, InitialMeasure::kLebesgue, 0);
    IteratedStats st(v.dim());
    for (std::size_t i = 0; i < len; ++i, orbit.advance()) st.push(v(orbit.x()));
    worst = std::max(worst, st.pair_identity_residual());
  }
  return {worst <= 1e-10, fmt("max relative residual %.3g over 1000 orbits (limit 1e-10)", worst)};
}

Outcome doubling_oracle() {
  const MapSpec spec = MapSpec::doubling();
  const Observable v = Observable::cosine();
  const std::vector<CoefficientEstimate> est{
      direct_coeffs(spec, v, 10000, 10000, seeded(1)),
      green_kubo(spec, v, 100, 10000000, seeded(1)),
      martingale_coeffs(spec, v),
  };
  bool ok = true;
  std::ostringstream os;
  for (const CoefficientEstimate& e : est) {
    const double s = e.Sigma(0, 0), ss = e.Sigma_se(0, 0), E = e.E(0, 0), Es = e.E_se(0, 0);
    const bool pass = within(s, 0.5, ss) && within(E, 0.0, Es);
    ok = ok && pass;
    os << to_string(e.method) << fmt(" Sigma %.5f+-%.2g E %.5f+-%.2g; ", s, ss, E, Es);
  }
  std::string d = os.str();
  return {ok, d.substr(0, d.size() - 2)};
}

Outcome martingale_kernel() {
  const TowerModel tower = ulam_P(build_induced(lsv_spec(), 1000), 4096);
  const MartingaleDecomposition dec = martingale_decompose(tower, lsv_v());
  const double id = dec.residual_identity / dec.phi_norm;
  const double ker = dec.residual_kernel / dec.phi_norm;
  return {id <= 1e-6 && ker <= 1e-6,
          fmt("identity %.3g, |P m'| %.3g relative to |phi'| = %.4g (limit 1e-6)", id, ker, dec.phi_norm)};
}

Outcome moment_scaling() {
  int ok = 0;
  std::ostringstream os;
  for (std::uint64_t seed : kSeeds) {
    const MomentTable t = moment_table(lsv_spec(), lsv_v(), moment_opts(seed, InitialMeasure::kMu));
    const double s = scaling_exponent(t, MomentStat::kS, 2.0).slope;
    const double ss = scaling_exponent(t, MomentStat::kSS, 2.0).slope;
    const bool pass = s >= 0.45 && s <= 0.55 && ss >= 0.9 && ss <= 1.1;
    ok += pass;
    os << fmt("seed %.0f: S %.3f SS %.3f; ", static_cast<double>(seed), s, ss);
    g_moments_mu[seed] = t;
  }
  os << ok << "/3 seeds in range";
  return {ok >= 2, os.str()};
}

CoefficientEstimate lsv_consensus() {
  if (!g_have_consensus) {
    const std::vector<CoefficientEstimate> est{
        direct_coeffs(lsv_spec(), lsv_v(), 10000, 10000, seeded(1)),
        green_kubo(lsv_spec(), lsv_v(), 300, 10000000, seeded(1)),
        martingale_coeffs(lsv_spec(), lsv_v()),
    };
    g_consensus = consensus(est);
    g_have_consensus = true;
  }
  return g_consensus;
}

Outcome iterated_wip() {
  const CoefficientEstimate c = lsv_consensus();
  int ok = 0;
  std::ostringstream os;
  os << fmt("consensus Sigma %.5f+-%.2g E %.5f+-%.2g; ", c.Sigma(0, 0), c.Sigma_se(0, 0), c.E(0, 0),
            c.E_se(0, 0));
  for (std::uint64_t seed : kSeeds) {
    PathEnsemble ens = sample_paths(lsv_spec(), lsv_v(), 100000, 10000, uniform_grid(4), seeded(seed));
    const TestReport norm = marginal_normality(ens, c.Sigma, c.Sigma_se);
    const TestReport drift = drift_check(ens, c.E, c.E_se);
    const TestEntry& ks = norm.entry("ks_W0@1");
    const TestEntry& cov = norm.entry("cov_W00@1");
    const TestEntry& ww = drift.entry("mean_WW00@1");
    const bool pass = ks.p_value > 0.01 && cov.passed && ww.passed;
    ok += pass;
    os << fmt("seed %.0f: KS p %.3f cov %.4f meanWW %.4f", static_cast<double>(seed), ks.p_value,
              cov.estimate, ww.estimate)
       << (pass ? " ok; " : " fail; ");
    g_paths_mu[seed] = std::move(ens);
  }
  os << ok << "/3 seeds";
  return {ok >= 2, os.str()};
}

Outcome lebesgue_robustness() {
  int ok = 0;
  std::ostringstream os;
  for (std::uint64_t seed : kSeeds) {
    if (!g_moments_mu.count(seed))
      g_moments_mu[seed] = moment_table(lsv_spec(), lsv_v(), moment_opts(seed, InitialMeasure::kMu));
    if (!g_paths_mu.count(seed))
      g_paths_mu[seed] = sample_paths(lsv_spec(), lsv_v(), 100000, 10000, uniform_grid(4), seeded(seed));
    const MomentTable leb =
        moment_table(lsv_spec(), lsv_v(), moment_opts(seed + 100, InitialMeasure::kLebesgue));
    int bad = 0;
    double worst = 0.0;
    for (const MomentRow& r : g_moments_mu[seed].rows) {
      const MomentRow& l = leb.row(r.n, r.q, r.stat);
      const double z = std::abs(r.value - l.value) / std::hypot(r.std_err, l.std_err);
      worst = std::max(worst, z);
      bad += z > 3.0;
    }
    const PathEnsemble paths_leb = sample_paths(lsv_spec(), lsv_v(), 100000, 10000, uniform_grid(4),
                                                seeded(seed + 100, InitialMeasure::kLebesgue));
    const TestReport cmp = initial_measure_comparison(g_paths_mu[seed], paths_leb);
    const bool pass = bad == 0 && cmp.passed();
    ok += pass;
    os << fmt("seed %.0f: moment rows beyond 3 stderr %.0f of %.0f (max z %.2f), W(1) ",
              static_cast<double>(seed), bad, static_cast<double>(leb.rows.size()), worst);
    for (const TestEntry& e : cmp.entries)
      if (e.gating && !e.skipped && !e.passed) os << e.name << " differs ";
    os << (pass ? "ok; " : "fail; ");
  }
  os << ok << "/3 seeds";
  return {ok >= 2, os.str()};
}

Outcome homogenization() {
  const MapSpec spec = MapSpec::doubling();
  FastSlowSpec fs;
  fs.drift = parse_slow_preset("linear(-1)");
  fs.noise = parse_slow_preset("additive");
  fs.v = Observable::cosine();
  fs.xi = Vec::Constant(1, 1.0);
  const SDESpec sde = SDESpec::linear_additive(fs.xi, -1.0, Mat::Constant(1, 1, 0.5), 1e-3);
  int ok = 0;
  std::ostringstream os;
  for (std::uint64_t seed : kSeeds) {
    const PathEnsemble fast = simulate_fastslow(fs, spec, 100000, 10000, uniform_grid(4), seeded(seed));
    const PathEnsemble ref = euler_maruyama(sde, 1.0, 10000, uniform_grid(4), seeded(seed + 1000));
    const TestReport rep = homogenization_compare(fast, ref);
    const TestEntry& ks = rep.entry("ks2_x0@1");
    const TestEntry& var = rep.entry("var_x0@1");
    const bool pass = ks.p_value > 0.01 && var.passed;
    ok += pass;
    os << fmt("seed %.0f: KS p %.3f var %.4f vs %.4f", static_cast<double>(seed), ks.p_value, var.estimate,
              var.target)
       << (pass ? " ok; " : " fail; ");
  }
  os << ok << "/3 seeds";
  return {ok >= 2, os.str()};
}

Outcome semiflow() {
  const SuspensionSpec s = SuspensionSpec::make(MapSpec::doubling(), parse_roof("affine(0.5)"));
  const FlowObservable v = center_flow(s, FlowObservable::preset("cos_sin"));
  const FlowCoefficients c = flow_coeffs(s, v);
  const LapLawResult lap = lap_law(s, 1000.0, 10000, seeded(1));
  const bool lap_ok = within(lap.mean, lap.target, lap.std_err);
  std::ostringstream os;
  os << fmt("N(t)/t %.5f target %.5f (se %.2g); ", lap.mean, lap.target, lap.std_err);
  int ok = 0;
  for (std::uint64_t seed : kSeeds) {
    FlowRunOptions fo;
    static_cast<RunOptions&>(fo) = seeded(seed);
    const TestReport rep = flow_wip_check(s, v, c, 1000.0, 10000, fo);
    bool pass = true;
    for (const char* name : {"cov_W00@1", "cov_W01@1", "cov_W11@1", "mean_WW01@1", "mean_WW10@1"})
      pass = pass && rep.entry(name).passed;
    ok += pass;
    const TestEntry& a = rep.entry("mean_WW01@1");
    os << fmt("seed %.0f: WW01 %.4f vs %.4f", static_cast<double>(seed), a.estimate, a.target)
       << (pass ? " ok; " : " fail; ");
  }
  os << ok << "/3 seeds";
  return {lap_ok && ok >= 2, os.str()};
}

Outcome family_continuity() {
  const MapFamily fam = MapFamily::lsv_harmonic(0.25, 0.1, 2.5);
  const MapSpec limit = fam.limit();
  const Observable v_lim = center_observable(Observable::linear(), limit);
  const CoefficientEstimate ref = direct_coeffs(limit, v_lim, 10000, 10000, seeded(9));
  std::ostringstream os;
  os << fmt("gamma=0.25: Sigma %.5f+-%.2g E %.5f+-%.2g; ", ref.Sigma(0, 0), ref.Sigma_se(0, 0), ref.E(0, 0),
            ref.E_se(0, 0));
  bool ok = true;
  for (std::size_t n : {1, 10, 100}) {
    const MapSpec m = fam.member(n);
    const Observable v = center_observable(Observable::linear(), m);
    const CoefficientEstimate e = direct_coeffs(m, v, 10000, 10000, seeded(10 + n));
    const double zs = std::abs(e.Sigma(0, 0) - ref.Sigma(0, 0)) / std::hypot(e.Sigma_se(0, 0), ref.Sigma_se(0, 0));
    const double ze = std::abs(e.E(0, 0) - ref.E(0, 0)) / std::hypot(e.E_se(0, 0), ref.E_se(0, 0));
    os << fmt("n=%.0f: Sigma %.5f (z %.2f) E %.5f", static_cast<double>(n), e.Sigma(0, 0), zs, e.E(0, 0))
       << fmt(" (z %.2f); ", ze);
    if (n == 100) ok = zs <= 3.0 && ze <= 3.0;
  }
  std::string d = os.str();
  return {ok, d.substr(0, d.size() - 2)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, 60, pair_identity},       {2, 300, doubling_oracle},       {3, 120, martingale_kernel},
      {4, 1800, moment_scaling},    {5, 1800, iterated_wip},         {6, 3600, lebesgue_robustness},
      {7, 900, homogenization},     {8, 1200, semiflow},             {9, 600, family_continuity},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.passed;
    std::printf("criterion %d: %s  %s [%.0f s, budget %.0f s%s]\n", c.id, o.passed ? "PASS" : "FAIL",
                o.detail.c_str(), secs, c.budget_s, secs > c.budget_s ? ", over budget" : "");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
