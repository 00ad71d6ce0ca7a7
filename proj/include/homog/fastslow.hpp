#pragma once

// Fast-slow systems x_{k+1} = x_k + a(x_k, y_k)/n + b(x_k, y_k)/sqrt(n) driven by
// a chaotic fast map, and the Euler-Maruyama reference SDE they are compared to.

#include <functional>
#include <string>
#include <vector>

#include "homog/dynamics.hpp"
#include "homog/observable.hpp"
#include "homog/stats.hpp"
#include "homog/types.hpp"
#include "homog/wip.hpp"

namespace homog {

/// f(x, y, out) with x in R^d.
using SlowFn = std::function<void(const double* x, double y, double* out)>;

struct SlowPreset {
  std::string name;
  std::vector<double> params;
};

/// Drift presets: "zero"; "linear(c)" meaning a(x, y) = c x.
/// Noise presets: "zero"; "additive" meaning b = v(y); "product" meaning
/// b(x, y) = x (.) v(y) componentwise.
SlowPreset parse_slow_preset(const std::string& text);

struct FastSlowSpec {
  int d = 1;
  SlowPreset drift{"zero", {}};
  SlowPreset noise{"zero", {}};
  Observable v = Observable::zero();  // fast observable used by the noise presets
  Vec xi;                             // initial slow state
  /// Range of the 64-point grid on which the y-mean of b(x, .) is tabulated.
  double center_lo = -4.0;
  double center_hi = 4.0;
};

/// x-grid centering table for b: offset(x) = int b(x, y) dmu(y), linearly
/// interpolated per coordinate between 64 grid points.
struct NoiseCentering {
  std::vector<double> grid;
  std::vector<Vec> offset;
  double max_abs_offset = 0.0;
  Vec at(const Vec& x) const;
};

NoiseCentering center_noise(const FastSlowSpec& fs, const MapSpec& spec);

/// Paths of xhat_n(t) = x_{ceil(n t)} stored in PathEnsemble::W (WW and Q are
/// zero). Paths leaving |x| <= 1e12 are dropped and counted in `divergent`.
/// With a = 0, b = v and xi = 0 the output equals sample_paths bit for bit.
PathEnsemble simulate_fastslow(const FastSlowSpec& fs, const MapSpec& spec, std::size_t n,
                               std::size_t samples, const std::vector<double>& grid,
                               const RunOptions& opt);

struct SDESpec {
  int d = 1;
  std::function<Vec(const Vec&)> drift;
  std::function<Mat(const Vec&)> diffusion;  // d x e
  int noise_dim = 1;
  double h = 1e-3;
  Vec xi;
  std::string note;

  /// dX = c X dt + chol(Sigma) dB.
  static SDESpec linear_additive(const Vec& xi, double c, const Mat& Sigma, double h);
};

PathEnsemble euler_maruyama(const SDESpec& sde, double t1, std::size_t samples,
                            const std::vector<double>& grid, const RunOptions& opt);

/// Two-sample KS on each component of x(1), plus mean and variance
/// comparisons at every positive grid time; interior times are informational.
TestReport homogenization_compare(const PathEnsemble& fast, const PathEnsemble& sde);

}  // namespace homog
