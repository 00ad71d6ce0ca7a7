#pragma once

// Interval maps (LSV intermittent, doubling, Chebyshev quadratic), orbit
// iteration and invariant-measure approximation.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "homog/errors.hpp"

namespace homog {

enum class MapKind { kLsv, kDoubling, kQuadratic };

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// A nonuniformly expanding interval map plus the regularity metadata the
/// moment bounds depend on.
struct MapSpec {
  MapKind kind = MapKind::kDoubling;
  double gamma = 0.0;   // LSV neutral-point strength
  double a_quad = 2.0;  // quadratic parameter; only a = 2 is supported
  double p = 2.0;       // moment order, tau in L^p
  double eta = 1.0;     // Hoelder exponent of observables

  static MapSpec lsv(double gamma, double p = 2.0, double eta = 1.0);
  static MapSpec doubling();
  static MapSpec quadratic(double a = 2.0);

  Interval domain() const;
  /// Throws ConfigError unless the parameters are in the supported range.
  void validate() const;
  std::string name() const;
};

/// Parses "lsv", "doubling", "quadratic". Parameters are filled separately.
MapKind parse_map_kind(const std::string& name);

/// Left branch of the LSV map, x (1 + 2^gamma x^gamma). x^gamma is evaluated
/// with square roots for gamma in {1/4, 1/2} and std::pow otherwise.
class LsvLeftBranch {
 public:
  explicit LsvLeftBranch(double gamma);

  double operator()(double x) const { return x * (1.0 + scale_ * power(x)); }
  double derivative(double x) const { return 1.0 + (1.0 + gamma_) * scale_ * power(x); }
  /// Solves left(x) = w for x in [0, 1/2] by Newton iteration.
  double inverse(double w) const;

  double power(double x) const {
    switch (mode_) {
      case Mode::kQuarter: return std::sqrt(std::sqrt(x));
      case Mode::kHalf: return std::sqrt(x);
      default: return std::pow(x, gamma_);
    }
  }
  double gamma() const { return gamma_; }
  double scale() const { return scale_; }
  bool is_quarter() const { return mode_ == Mode::kQuarter; }

 private:
  enum class Mode { kQuarter, kHalf, kGeneral };
  double gamma_;
  double scale_;
  Mode mode_;
};

/// T x. Throws DomainError if x is outside spec.domain(). The point x = 1/2
/// belongs to the left LSV branch, so T(1/2) = 1.
double apply_map(const MapSpec& spec, double x);

/// Feeds x0, T x0, ..., T^{n-1} x0 to `folder` without storing the orbit.
template <class Folder>
void orbit_fold(const MapSpec& spec, double x0, std::size_t n, Folder&& folder) {
  double x = x0;
  for (std::size_t k = 0; k < n; ++k) {
    folder(x);
    if (k + 1 < n) x = apply_map(spec, x);
  }
}

std::vector<double> collect_orbit(const MapSpec& spec, double x0, std::size_t n);

/// A monotone branch T|_I mapping I onto the whole domain, described by its
/// inverse.
struct MapBranch {
  Interval source;
  bool increasing = true;
  std::function<double(double)> inverse;
};

std::vector<MapBranch> map_branches(const MapSpec& spec);

/// Sequence of maps indexed by n with gamma_n -> gamma_inf.
class MapFamily {
 public:
  /// gamma_n = gamma_inf + amplitude / n; p and eta shared by all members.
  static MapFamily lsv_harmonic(double gamma_inf, double amplitude, double p, double eta = 1.0);

  MapSpec member(std::size_t n) const;
  MapSpec limit() const { return limit_; }
  /// True when |gamma_n - gamma_inf| is nonincreasing over `indices` and the
  /// last one is within `tol`.
  bool converges_on(const std::vector<std::size_t>& indices, double tol) const;

 private:
  MapSpec limit_;
  double amplitude_ = 0.0;
};

/// Discretized invariant density on equal-width bins of the domain.
struct DensityEstimate {
  Interval domain;
  std::vector<double> density;  // per-bin density; sum(density) * width = 1
  std::size_t iterations = 0;
  double residual = 0.0;  // l1 distance between the last two iterates

  double bin_width() const { return domain.width() / static_cast<double>(density.size()); }
  /// Integral of f against the density, Gauss-Legendre inside each bin.
  double integrate(const std::function<double(double)>& f) const;
  double cdf(double x) const;
};

struct UlamOptions {
  std::size_t max_iterations = 200000;
  double tolerance = 1e-10;
};

/// Ulam's method: Markov matrix P_ij = |B_i cap T^{-1} B_j| / |B_i| assembled
/// from exact branch inverses, stationary vector by power iteration.
/// Throws ConvergenceError carrying the residual if the cap is hit.
DensityEstimate invariant_density_ulam(const MapSpec& spec, std::size_t bins,
                                       const UlamOptions& options = {});

/// Draws `count` points, each a Lebesgue-uniform start iterated `burnin`
/// times. Sample i uses the streams keyed by (seed, i).
std::vector<double> sample_invariant(const MapSpec& spec, std::size_t count, std::size_t burnin,
                                     std::uint64_t seed);

}  // namespace homog
