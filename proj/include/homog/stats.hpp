#pragma once

// Birkhoff sums, iterated sums, moment tables and estimators of the diffusion
// coefficient Sigma and the drift matrix E.

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "homog/dynamics.hpp"
#include "homog/kernel.hpp"
#include "homog/observable.hpp"
#include "homog/sampling.hpp"
#include "homog/types.hpp"

namespace homog {

/// S = sum v_j, SS = sum_{i<j} v_i (x) v_j, Q = sum v_j (x) v_j.
struct IteratedStats {
  std::size_t n = 0;
  Vec S;
  Mat SS;
  Mat Q;

  explicit IteratedStats(int d = 1);
  void push(const Vec& v);
  /// |S(x)S - SS - SS^T - Q| relative to max(|S|^2, |Q|, |SS|, 1e-300).
  double pair_identity_residual() const;
};

IteratedStats iterated_sums_stream(const std::vector<Vec>& values);

struct RunOptions {
  std::uint64_t seed = 1;
  InitialMeasure initial = InitialMeasure::kMu;
  std::size_t burnin = kDefaultBurnin;
  std::size_t workers = 0;  // 0: HOMOG_WORKERS or hardware concurrency

  OrbitSource source() const { return {seed, initial, burnin}; }
};

enum class MomentStat { kS, kSS };
std::string to_string(MomentStat s);

struct MomentRow {
  std::size_t n = 0;
  double q = 0.0;
  MomentStat stat = MomentStat::kS;
  double value = 0.0;   // E max_{k<=n} |stat_k|^q
  double std_err = 0.0;  // bootstrap
  std::size_t samples = 0;
};

struct MomentOptions : RunOptions {
  std::vector<std::size_t> n_grid;
  std::vector<double> q_grid{2.0};
  std::size_t samples = 10000;
  std::size_t bootstrap = 200;
  bool allow_high_q = false;  // lift the 2(p-1) / (p-1) guard
};

struct MomentTable {
  std::vector<MomentRow> rows;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  InitialMeasure initial = InitialMeasure::kMu;
  /// boot[b * rows.size() + r]: row r recomputed on bootstrap resample b.
  std::size_t bootstrap = 0;
  std::vector<double> boot;

  const MomentRow& row(std::size_t n, double q, MomentStat stat) const;
};

/// Monte Carlo moments of max_{k<=n}|S_k| and max_{k<=n}|SS_k| (Frobenius).
/// One orbit per sample, snapshotted at every n in the grid.
MomentTable moment_table(const MapSpec& spec, const Observable& v, const MomentOptions& opt);

struct ScalingFit {
  MomentStat stat = MomentStat::kS;
  double q = 0.0;
  double slope = 0.0;
  double ci_lo = 0.0;  // 95% percentile bootstrap interval
  double ci_hi = 0.0;
};

/// Least-squares slope of log(moment)/q against log n.
ScalingFit scaling_exponent(const MomentTable& table, MomentStat stat, double q);
std::vector<ScalingFit> scaling_exponents(const MomentTable& table);

enum class CoefficientMethod { kDirect, kGreenKubo, kMartingale, kConsensus };
std::string to_string(CoefficientMethod m);

struct CoefficientEstimate {
  CoefficientMethod method = CoefficientMethod::kDirect;
  Mat Sigma;
  Mat E;
  Mat Sigma_se;
  Mat E_se;
  std::string truncation_kind;  // "n", "N_max", "K", "bins"
  std::size_t truncation = 0;
};

/// Autocorrelation sums along one long orbit started from mu, truncated at
/// lag n_max; standard errors from 100 batch means.
CoefficientEstimate green_kubo(const MapSpec& spec, const Observable& v, std::size_t n_max,
                               std::size_t orbit_len, const RunOptions& opt);

/// (1/n) times the sample means of S_n (x) S_n and SS_n over independent orbits.
CoefficientEstimate direct_coeffs(const MapSpec& spec, const Observable& v, std::size_t n,
                                  std::size_t samples, const RunOptions& opt);

/// Entrywise inverse-variance weighted combination.
CoefficientEstimate consensus(std::span<const CoefficientEstimate> estimates);

void write_moment_csv(std::ostream& os, const MomentTable& table);
void write_coeff_csv(std::ostream& os, std::span<const CoefficientEstimate> estimates);

}  // namespace homog
