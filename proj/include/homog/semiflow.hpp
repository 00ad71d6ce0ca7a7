#pragma once

// Suspension semiflows over the base maps: roof functions, lap numbers,
// fiber-integrated observables, continuous-time iterated integrals and the
// flow-level WIP coefficients.

#include <cstdint>
#include <array>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "homog/dynamics.hpp"
#include "homog/sampling.hpp"
#include "homog/stats.hpp"
#include "homog/tower.hpp"
#include "homog/types.hpp"
#include "homog/wip.hpp"

namespace homog {

/// h(x) = 1 + alpha x.
struct Roof {
  std::string name = "const1";
  double alpha = 0.0;
  double operator()(double x) const { return 1.0 + alpha * x; }
  double inf(const Interval& dom) const;
  double sup(const Interval& dom) const;
};

/// "const1" or "affine(alpha)".
Roof parse_roof(const std::string& text);

struct SuspensionSpec {
  MapSpec base;
  Roof roof;
  double h_bar = 1.0;  // int h dmu
  double inf_h = 1.0;
  double sup_h = 1.0;

  /// Validates inf h >= c0 and computes h_bar from the Ulam density.
  static SuspensionSpec make(const MapSpec& base, const Roof& roof, double c0 = 1e-3);
  double h(double x) const { return roof(x); }
};

/// 0 <= u < h(x).
struct FlowState {
  double x = 0.0;
  double u = 0.0;
};

/// max{n >= 0 : h(x) + ... + h(T^{n-1} x) <= u + t}.
std::size_t lap_number(const SuspensionSpec& spec, const FlowState& s, double t);
FlowState flow(const SuspensionSpec& spec, const FlowState& s, double t);

/// v(x, u) with values in R^d, minus a constant offset.
class FlowObservable {
 public:
  using RawFn = std::function<void(double x, double u, double* out)>;

  static FlowObservable zero();
  static FlowObservable constant(const Vec& c);
  static FlowObservable custom(std::string name, int dim, RawFn raw);
  /// Presets: "zero", "cos" (cos 2 pi x), "cos_sin" (cos 2 pi x, sin 2 pi x),
  /// "sin_u" (sin u), "u" (u), "cos_u" (cos 2 pi x, u).
  static FlowObservable preset(const std::string& name);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  bool is_zero() const { return zero_; }
  const Vec& offset() const { return offset_; }
  FlowObservable with_offset(const Vec& c) const;
  void operator()(double x, double u, double* out) const {
    (*raw_)(x, u, out);
    for (int i = 0; i < dim_; ++i) out[i] -= offset_[i];
  }
  Vec operator()(double x, double u) const {
    Vec v(dim_);
    (*this)(x, u, v.data());
    return v;
  }

 private:
  std::string name_ = "zero";
  int dim_ = 1;
  bool zero_ = true;
  Vec offset_ = Vec::Zero(1);
  std::shared_ptr<const RawFn> raw_ =
      std::make_shared<const RawFn>([](double, double, double* out) { out[0] = 0.0; });
};

/// 16-point Gauss-Legendre nodes and weights on [0, 1].
struct FiberRule {
  std::array<double, 16> node;
  std::array<double, 16> weight;
  static const FiberRule& get();
};

/// vtilde(x) = int_0^{h(x)} v(x, u) du.
Vec induce_v(const SuspensionSpec& spec, const FlowObservable& v, double x);

/// vtilde as a base observable (offset zero).
Observable induced_observable(const SuspensionSpec& spec, const FlowObservable& v);

/// v - c with c = h_bar^{-1} int vtilde dmu, so that v has mean zero under the
/// normalized flow-invariant measure.
FlowObservable center_flow(const SuspensionSpec& spec, const FlowObservable& v);

struct FlowSample {
  double t = 0.0;
  Vec S;
  Mat SS;
};

/// S_t and the iterated integral SS_t along the flow from s, recorded at the
/// sorted times `record` (all <= t1). Left-endpoint substeps of length at most
/// dt, split at lap boundaries; each substep of length delta with value v adds
/// S (x) v delta + v (x) v delta^2 / 2 to SS and then v delta to S.
/// Throws ConfigError unless 0 < dt <= inf h / 10.
std::vector<FlowSample> flow_iterated_integrals(const SuspensionSpec& spec, const FlowObservable& v,
                                                const FlowState& s, double t1, double dt,
                                                const std::vector<double>& record);

/// S_t along the flow together with the induced sum over the completed laps.
struct FlowInducedPair {
  Vec S;
  Vec S_induced;
  std::size_t laps = 0;
};
FlowInducedPair flow_vs_induced(const SuspensionSpec& spec, const FlowObservable& v,
                                const FlowState& s, double t, double dt);

struct FlowCoefficients {
  double h_bar = 1.0;
  Mat Sigma;        // of vtilde on the base
  Mat E;            // of vtilde on the base
  Mat Sigma_se;
  Mat E_se;
  Mat E_prime;      // h_bar^{-1} int dmu int_0^h H (x) v du
  Mat cov_target;   // h_bar^{-1} Sigma
  Mat drift_target; // h_bar^{-1} E + E_prime
  Mat cov_se;
  Mat drift_se;
};

/// E' by nested fiber quadrature against the Ulam density (tower quadrature
/// for an LSV base).
Mat e_prime(const SuspensionSpec& spec, const FlowObservable& v);

/// Predictions from the martingale estimate for vtilde. v must be centered.
FlowCoefficients flow_coeffs(const SuspensionSpec& spec, const FlowObservable& v,
                             const TowerOptions& topt = {});

struct FlowRunOptions : RunOptions {
  double dt = 0.0;  // 0 means inf h / 50
};

/// Draws s from the normalized flow-invariant measure: x from mu (or
/// Lebesgue) accepted with probability h(x) / sup h, u uniform on [0, h(x)).
template <class Stepper>
typename Stepper::State sample_flow_start(const Stepper& stepper, const SuspensionSpec& spec,
                                          std::uint64_t seed, std::uint64_t index,
                                          InitialMeasure initial, std::size_t burnin, double* u) {
  RngStream aux(seed, index, StreamPurpose::kFlowStart);
  for (std::uint64_t attempt = 0;; ++attempt) {
    auto state = start_orbit(stepper, seed, index + (attempt << 40), initial, burnin);
    const double h = spec.h(Stepper::value(state));
    if (aux.uniform() * spec.sup_h <= h) {
      *u = aux.uniform() * h;
      return state;
    }
  }
}

/// S_t and SS_t at the sorted times `record` along the flow from the start
/// state of sample 0, using the same orbit stepper as the ensembles (exact for
/// the doubling map).
std::vector<FlowSample> sampled_flow_trajectory(const SuspensionSpec& spec, const FlowObservable& v,
                                                const std::vector<double>& record,
                                                const FlowRunOptions& opt);

/// Paths W(t) = T^{-1/2} S_{tT}, WW(t) = SS_{tT} / T on `grid`, Q = 0.
PathEnsemble flow_paths(const SuspensionSpec& spec, const FlowObservable& v, double T,
                        std::size_t samples, const std::vector<double>& grid,
                        const FlowRunOptions& opt);

struct LapLawResult {
  double t = 0.0;
  double mean = 0.0;    // mean of N(t) / t
  double std_err = 0.0;
  double target = 0.0;  // 1 / h_bar
  double max_ratio = 0.0;  // max over samples of N(t) / (((inf h)^{-1} + 1) t)
};
LapLawResult lap_law(const SuspensionSpec& spec, double t, std::size_t samples,
                     const RunOptions& opt);

struct GrowthFit {
  std::vector<double> t1;
  std::vector<double> value;  // L2 norm over samples
  double slope = 0.0;
};
/// | sup_{t <= t1} |N(t) - t / h_bar| |_2 on the t1 grid.
GrowthFit lap_deviation_growth(const SuspensionSpec& spec, const std::vector<double>& t1_grid,
                               std::size_t samples, const RunOptions& opt);
/// | sup_{t <= t1} |S_t| |_2 on the t1 grid.
GrowthFit flow_moment_growth(const SuspensionSpec& spec, const FlowObservable& v,
                             const std::vector<double>& t1_grid, std::size_t samples,
                             const FlowRunOptions& opt);

/// Lap law of large numbers at t = T, covariance of W(1) against h_bar^{-1}
/// Sigma and mean WW against (h_bar^{-1} E + E') t.
TestReport flow_wip_check(const SuspensionSpec& spec, const FlowObservable& v,
                          const FlowCoefficients& coeffs, double T, std::size_t samples,
                          const FlowRunOptions& opt, PathEnsemble* ensemble = nullptr);

/// Columns t, S0..S{d-1}, SS00..SS{d-1}{d-1}.
void write_flow_csv(std::ostream& os, const std::vector<FlowSample>& path);

}  // namespace homog
