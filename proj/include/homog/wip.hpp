#pragma once

// Path ensembles of (W_n, WW_n) and the distributional checks run on them.

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "homog/dynamics.hpp"
#include "homog/observable.hpp"
#include "homog/stats.hpp"
#include "homog/types.hpp"

namespace homog {

struct Provenance {
  std::string map;
  std::string observable;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  InitialMeasure initial = InitialMeasure::kMu;
};

/// M paths sampled on a fixed grid in [0, 1]. For a path p and grid index g,
///   W(p, g)  = n^{-1/2} S_k,  WW(p, g) = SS_k / n,  Q(p, g) = Q_k (unscaled),
/// with k = ceil(n t_g). Matrices are stored row-major, d*d entries.
struct PathEnsemble {
  Provenance provenance;
  std::vector<double> grid;
  std::size_t paths = 0;
  int d = 1;
  std::vector<double> W;
  std::vector<double> WW;
  std::vector<double> Q;
  std::size_t divergent = 0;  // paths excluded by the overflow guard (fast-slow only)

  std::size_t grid_size() const { return grid.size(); }
  double w(std::size_t p, std::size_t g, int i) const {
    return W[(p * grid.size() + g) * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)];
  }
  double ww(std::size_t p, std::size_t g, int i, int j) const {
    return WW[(p * grid.size() + g) * static_cast<std::size_t>(d * d) +
              static_cast<std::size_t>(i * d + j)];
  }
  double q(std::size_t p, std::size_t g, int i, int j) const {
    return Q[(p * grid.size() + g) * static_cast<std::size_t>(d * d) +
             static_cast<std::size_t>(i * d + j)];
  }
  /// Component i of W at grid index g across paths.
  std::vector<double> w_column(std::size_t g, int i) const;
  std::vector<double> ww_column(std::size_t g, int i, int j) const;
  /// max over paths and grid times of |WW + WW^T - W W^T + Q/n| relative to
  /// max(|W|^2, |Q|/n, |WW|).
  double levy_residual() const;
};

/// Uniform grid 0, 1/G, ..., 1.
std::vector<double> uniform_grid(std::size_t intervals);

PathEnsemble sample_paths(const MapSpec& spec, const Observable& v, std::size_t n,
                          std::size_t samples, const std::vector<double>& grid,
                          const RunOptions& opt);

struct TestEntry {
  std::string name;
  double statistic = 0.0;
  double p_value = std::numeric_limits<double>::quiet_NaN();
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double target = std::numeric_limits<double>::quiet_NaN();
  double std_err = std::numeric_limits<double>::quiet_NaN();
  bool passed = true;
  bool skipped = false;
  bool gating = true;  // false: reported only, ignored by passed()
  std::string note;
};

struct TestReport {
  std::string title;
  double significance = 0.01;
  double z_limit = 3.0;
  std::vector<TestEntry> entries;

  bool passed() const;
  const TestEntry& entry(const std::string& name) const;
  void append(const TestReport& other);
  std::string to_json() const;
};

/// KS test of W(t)_i against N(0, t Sigma_ii) at t = 1 and at every interior
/// grid time, plus the covariance of W(1) against Sigma (3 stderr). Interior
/// times are informational; only t = 1 gates.
TestReport marginal_normality(const PathEnsemble& ens, const Mat& Sigma,
                              const Mat& Sigma_se = Mat());

/// z-tests of mean WW(t) against t E at each grid time, and of the
/// through-origin regression slope of mean WW(t) on t. Interior times are
/// informational.
TestReport drift_check(const PathEnsemble& ens, const Mat& E, const Mat& E_se = Mat());

/// cov(W(t)) against t cov(W(1)) for the interior grid times.
TestReport time_scaling_check(const PathEnsemble& ens);

/// Two-sample KS per component of W(1), and mean / covariance comparisons of
/// W(1) and WW(1) between ensembles started from different initial measures.
TestReport initial_measure_comparison(const PathEnsemble& a, const PathEnsemble& b);

void write_ensemble_csv(std::ostream& os, const PathEnsemble& ens);

}  // namespace homog
