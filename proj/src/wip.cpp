#include "homog/wip.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "homog/errors.hpp"
#include "homog/io.hpp"
#include "homog/kernel.hpp"
#include "homog/parallel.hpp"
#include "homog/stat_tests.hpp"

namespace homog {

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& x) {
  MeanSe r;
  if (x.empty()) return r;
  for (double v : x) r.mean += v;
  r.mean /= static_cast<double>(x.size());
  if (x.size() < 2) return r;
  double s2 = 0.0;
  for (double v : x) s2 += (v - r.mean) * (v - r.mean);
  r.se = std::sqrt(s2 / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  return r;
}

// Sample covariance of (a, b) and the standard error of that estimate.
MeanSe covariance(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean_se(a).mean, mb = mean_se(b).mean;
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) prod[i] = (a[i] - ma) * (b[i] - mb);
  MeanSe r = mean_se(prod);
  r.mean *= static_cast<double>(a.size()) / static_cast<double>(a.size() - 1);
  return r;
}

std::string fmt_t(double t) {
  std::ostringstream os;
  os << t;
  return os.str();
}

TestEntry z_entry(std::string name, double estimate, double target, double se, double z_limit) {
  TestEntry e;
  e.name = std::move(name);
  e.estimate = estimate;
  e.target = target;
  e.std_err = se;
  const double diff = std::abs(estimate - target);
  e.statistic = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  e.p_value = se > 0.0 ? z_p_value(e.statistic) : (diff == 0.0 ? 1.0 : 0.0);
  e.passed = diff <= z_limit * se;
  return e;
}

double entry_or_zero(const Mat& m, int i, int j) {
  return (m.rows() > i && m.cols() > j) ? m(i, j) : 0.0;
}

}  // namespace

std::vector<double> PathEnsemble::w_column(std::size_t g, int i) const {
  std::vector<double> out(paths);
  for (std::size_t p = 0; p < paths; ++p) out[p] = w(p, g, i);
  return out;
}

std::vector<double> PathEnsemble::ww_column(std::size_t g, int i, int j) const {
  std::vector<double> out(paths);
  for (std::size_t p = 0; p < paths; ++p) out[p] = ww(p, g, i, j);
  return out;
}

double PathEnsemble::levy_residual() const {
  const double inv_n = 1.0 / static_cast<double>(provenance.n);
  double worst = 0.0;
  for (std::size_t p = 0; p < paths; ++p)
    for (std::size_t g = 0; g < grid.size(); ++g) {
      double res = 0.0, scale = 1e-300;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          const double ww_ij = ww(p, g, i, j), ww_ji = ww(p, g, j, i);
          const double wiwj = w(p, g, i) * w(p, g, j);
          const double qn = q(p, g, i, j) * inv_n;
          res = std::max(res, std::abs(ww_ij + ww_ji - wiwj + qn));
          scale = std::max({scale, std::abs(wiwj), std::abs(qn), std::abs(ww_ij)});
        }
      worst = std::max(worst, res / scale);
    }
  return worst;
}

std::vector<double> uniform_grid(std::size_t intervals) {
  std::vector<double> g(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i)
    g[i] = static_cast<double>(i) / static_cast<double>(intervals);
  return g;
}

PathEnsemble sample_paths(const MapSpec& spec, const Observable& v, std::size_t n,
                          std::size_t samples, const std::vector<double>& grid,
                          const RunOptions& opt) {
  if (n < 100) throw ConfigError("n: path ensembles need n >= 100");
  if (samples < 1) throw ConfigError("samples: at least one path is required");
  if (grid.empty() || !std::is_sorted(grid.begin(), grid.end()) || grid.front() < 0.0 ||
      grid.back() > 1.0)
    throw ConfigError("grid: times must be sorted and lie in [0, 1]");
  PathEnsemble ens;
  ens.provenance = {spec.name(), v.name(), n, opt.seed, opt.initial};
  ens.grid = grid;
  ens.paths = samples;
  ens.d = v.dim();
  const std::size_t G = grid.size(), d = static_cast<std::size_t>(v.dim());
  ens.W.resize(samples * G * d);
  ens.WW.resize(samples * G * d * d);
  ens.Q.resize(samples * G * d * d);
  std::vector<std::size_t> checkpoints(G);
  for (std::size_t g = 0; g < G; ++g)
    checkpoints[g] = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * grid[g]));
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  const double inv_n = 1.0 / static_cast<double>(n);
  const OrbitSource src = opt.source();
  parallel_blocks(samples, 64, resolve_workers(opt.workers), [&](std::size_t b, std::size_t e) {
    run_samples(spec, v, src, b, e, checkpoints, false,
                [&](std::size_t p, std::size_t g, const auto& s) {
                  const std::size_t base = p * G + g;
                  for (std::size_t i = 0; i < d; ++i) ens.W[base * d + i] = s.S[i] * inv_sqrt_n;
                  for (std::size_t k = 0; k < d * d; ++k) {
                    ens.WW[base * d * d + k] = s.SS[k] * inv_n;
                    ens.Q[base * d * d + k] = s.Q[k];
                  }
                });
  });
  return ens;
}

bool TestReport::passed() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const TestEntry& e) { return e.skipped || !e.gating || e.passed; });
}

const TestEntry& TestReport::entry(const std::string& name) const {
  for (const TestEntry& e : entries)
    if (e.name == name) return e;
  throw ConfigError("report '" + title + "' has no entry named " + name);
}

void TestReport::append(const TestReport& other) {
  entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

std::string TestReport::to_json() const {
  using nlohmann::json;
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  json doc;
  doc["title"] = title;
  doc["significance"] = significance;
  doc["z_limit"] = z_limit;
  doc["passed"] = passed();
  doc["tests"] = json::array();
  for (const TestEntry& e : entries) {
    doc["tests"].push_back({{"name", e.name},
                            {"statistic", num(e.statistic)},
                            {"p_value", num(e.p_value)},
                            {"estimate", num(e.estimate)},
                            {"target", num(e.target)},
                            {"stderr", num(e.std_err)},
                            {"passed", e.passed},
                            {"skipped", e.skipped},
                            {"gating", e.gating},
                            {"note", e.note}});
  }
  return doc.dump(2);
}

TestReport marginal_normality(const PathEnsemble& ens, const Mat& Sigma, const Mat& Sigma_se) {
  if (Sigma.rows() != ens.d || Sigma.cols() != ens.d)
    throw ConfigError("Sigma: dimension does not match the ensemble");
  TestReport rep;
  rep.title = "marginal_normality";
  const std::size_t last = ens.grid.size() - 1;
  for (std::size_t g = 0; g < ens.grid.size(); ++g) {
    const double t = ens.grid[g];
    if (!(t > 0.0)) continue;
    for (int i = 0; i < ens.d; ++i) {
      TestEntry e;
      e.name = "ks_W" + std::to_string(i) + "@" + fmt_t(t);
      const double var = t * Sigma(i, i);
      if (!(var > 0.0)) {
        e.skipped = true;
        e.note = "Sigma_ii = 0, component skipped";
        rep.entries.push_back(e);
        continue;
      }
      const double sd = std::sqrt(var);
      const KsResult ks = ks_one_sample(ens.w_column(g, i),
                                        [sd](double x) { return normal_cdf(x, 0.0, sd); });
      e.statistic = ks.statistic;
      e.p_value = ks.p_value;
      e.target = var;
      e.passed = ks.p_value > rep.significance;
      e.gating = g == last;
      rep.entries.push_back(e);
    }
  }
  for (int i = 0; i < ens.d; ++i)
    for (int j = i; j < ens.d; ++j) {
      const MeanSe c = covariance(ens.w_column(last, i), ens.w_column(last, j));
      const double se_t = entry_or_zero(Sigma_se, i, j);
      rep.entries.push_back(z_entry("cov_W" + std::to_string(i) + std::to_string(j) + "@1", c.mean,
                                    Sigma(i, j), std::hypot(c.se, se_t), rep.z_limit));
    }
  return rep;
}

TestReport drift_check(const PathEnsemble& ens, const Mat& E, const Mat& E_se) {
  if (E.rows() != ens.d || E.cols() != ens.d)
    throw ConfigError("E: dimension does not match the ensemble");
  TestReport rep;
  rep.title = "drift_check";
  double tt = 0.0;
  for (double t : ens.grid) tt += t * t;
  for (int i = 0; i < ens.d; ++i)
    for (int j = 0; j < ens.d; ++j) {
      const std::string ij = std::to_string(i) + std::to_string(j);
      for (std::size_t g = 0; g < ens.grid.size(); ++g) {
        const double t = ens.grid[g];
        if (!(t > 0.0)) continue;
        const MeanSe m = mean_se(ens.ww_column(g, i, j));
        rep.entries.push_back(z_entry("mean_WW" + ij + "@" + fmt_t(t), m.mean, t * E(i, j),
                                      std::hypot(m.se, t * entry_or_zero(E_se, i, j)),
                                      rep.z_limit));
        rep.entries.back().gating = g + 1 == ens.grid.size();
      }
      if (tt > 0.0) {
        std::vector<double> slope(ens.paths, 0.0);
        for (std::size_t p = 0; p < ens.paths; ++p) {
          for (std::size_t g = 0; g < ens.grid.size(); ++g)
            slope[p] += ens.grid[g] * ens.ww(p, g, i, j);
          slope[p] /= tt;
        }
        const MeanSe s = mean_se(slope);
        rep.entries.push_back(z_entry("slope_WW" + ij, s.mean, E(i, j),
                                      std::hypot(s.se, entry_or_zero(E_se, i, j)), rep.z_limit));
      }
    }
  return rep;
}

TestReport time_scaling_check(const PathEnsemble& ens) {
  TestReport rep;
  rep.title = "time_scaling";
  const std::size_t last = ens.grid.size() - 1;
  for (std::size_t g = 0; g + 1 < ens.grid.size(); ++g) {
    const double t = ens.grid[g];
    if (!(t > 0.0)) continue;
    for (int i = 0; i < ens.d; ++i) {
      const std::vector<double> a = ens.w_column(g, i), b = ens.w_column(last, i);
      const double ma = mean_se(a).mean, mb = mean_se(b).mean;
      std::vector<double> diff(a.size());
      for (std::size_t p = 0; p < a.size(); ++p)
        diff[p] = (a[p] - ma) * (a[p] - ma) - t * (b[p] - mb) * (b[p] - mb);
      const MeanSe m = mean_se(diff);
      rep.entries.push_back(z_entry("var_W" + std::to_string(i) + "@" + fmt_t(t) + "_minus_t_var@1",
                                    m.mean, 0.0, m.se, rep.z_limit));
    }
  }
  return rep;
}

TestReport initial_measure_comparison(const PathEnsemble& a, const PathEnsemble& b) {
  if (a.provenance.map != b.provenance.map || a.provenance.observable != b.provenance.observable ||
      a.provenance.n != b.provenance.n || a.grid != b.grid || a.d != b.d)
    throw ConfigError("ensembles differ in map, observable, n or grid and cannot be compared");
  TestReport rep;
  rep.title = "initial_measure_comparison";
  const std::size_t ga = a.grid.size() - 1;
  for (int i = 0; i < a.d; ++i) {
    const std::string si = std::to_string(i);
    const std::vector<double> xa = a.w_column(ga, i), xb = b.w_column(ga, i);
    TestEntry e;
    e.name = "ks2_W" + si + "@1";
    const KsResult ks = ks_two_sample(xa, xb);
    e.statistic = ks.statistic;
    e.p_value = ks.p_value;
    e.passed = ks.p_value > rep.significance;
    rep.entries.push_back(e);

    const MeanSe ma = mean_se(xa), mb = mean_se(xb);
    rep.entries.push_back(z_entry("mean_W" + si + "@1", ma.mean, mb.mean, std::hypot(ma.se, mb.se),
                                  rep.z_limit));
    const MeanSe va = covariance(xa, xa), vb = covariance(xb, xb);
    rep.entries.push_back(z_entry("var_W" + si + "@1", va.mean, vb.mean, std::hypot(va.se, vb.se),
                                  rep.z_limit));
    for (int j = 0; j < a.d; ++j) {
      const MeanSe wa = mean_se(a.ww_column(ga, i, j)), wb = mean_se(b.ww_column(ga, i, j));
      rep.entries.push_back(z_entry("mean_WW" + si + std::to_string(j) + "@1", wa.mean, wb.mean,
                                    std::hypot(wa.se, wb.se), rep.z_limit));
    }
  }
  return rep;
}

void write_ensemble_csv(std::ostream& os, const PathEnsemble& ens) {
  std::vector<std::string> header{"path_id", "t"};
  for (int i = 0; i < ens.d; ++i) header.push_back("W" + std::to_string(i));
  for (int i = 0; i < ens.d; ++i)
    for (int j = 0; j < ens.d; ++j) header.push_back("WW" + std::to_string(i) + std::to_string(j));
  CsvWriter csv(os, header);
  for (std::size_t p = 0; p < ens.paths; ++p)
    for (std::size_t g = 0; g < ens.grid.size(); ++g) {
      csv.cell(p).cell(ens.grid[g]);
      for (int i = 0; i < ens.d; ++i) csv.cell(ens.w(p, g, i));
      for (int i = 0; i < ens.d; ++i)
        for (int j = 0; j < ens.d; ++j) csv.cell(ens.ww(p, g, i, j));
      csv.end_row();
    }
}

}  // namespace homog
