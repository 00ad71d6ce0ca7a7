#pragma once

// First-return induced scheme F = T^tau on Y, a discretized transfer operator
// of F, the martingale-coboundary decomposition of induced observables and
// the coefficient formulas built on it.
//
// Functions on Y are represented by their values at the midpoints of equal
// bins. P acts on such a function through the exact branch inverses of F:
//   (P f)(y) = sum_a zeta_a(y) f(y_a),   zeta_a = rho(y_a) |(F^{-1}_a)'(y)| / rho(y),
// with f(y_a) read off by 4-point Lagrange interpolation. Induced observables
// (phi', the iterated sum S', the return time) are evaluated exactly at the
// preimages by walking the backward orbit, so only chi' is ever interpolated.

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "homog/dynamics.hpp"
#include "homog/observable.hpp"
#include "homog/stats.hpp"
#include "homog/types.hpp"

namespace homog {

struct Cylinder {
  std::size_t tau = 1;
  double left = 0.0;
  double right = 0.0;
};

struct ReturnTime {
  std::size_t tau = 0;
  bool capped = false;  // no return within tau_cap steps; tau == tau_cap
  double image = 0.0;   // T^tau y
};

/// One inverse branch of F evaluated at a point y of Y.
struct Preimage {
  std::size_t cylinder = 0;  // index into InducedScheme::cylinders()
  std::size_t tau = 1;
  double y = 0.0;         // y_a = F_a^{-1}(y)
  double jacobian = 0.0;  // |(F_a^{-1})'(y)|
  // The excursion tail T y_a, ..., T^{tau-1} y_a equals the previous
  // preimage's tail with `next` = T y_a prepended. `fresh` marks the first
  // preimage of a chain, whose tail is empty.
  bool fresh = true;
  double next = 0.0;
};

class InducedScheme {
 public:
  /// Y = [1/2, 1] with first return for LSV; Y = [0, 1], tau = 1 for doubling.
  static InducedScheme build(const MapSpec& spec, std::size_t tau_cap);

  const MapSpec& spec() const { return spec_; }
  Interval Y() const { return y_; }
  std::size_t tau_cap() const { return tau_cap_; }
  const std::vector<Cylinder>& cylinders() const { return cylinders_; }
  /// Normalized Lebesgue measure of {tau > tau_cap} in Y.
  double tail_lebesgue() const { return tail_lebesgue_; }

  ReturnTime return_time(double y) const;
  /// phi'(y) = sum_{l < tau(y)} v(T^l y).
  Vec induce(const Observable& v, double y, ReturnTime* rt = nullptr) const;

  /// Calls f(const Preimage&) for every inverse branch of F at y, in chain
  /// order. For LSV the chain is y_1 = (y+1)/2, y_k = (L^{-(k-1)}(y) + 1)/2.
  template <class F>
  void for_each_preimage(double y, F&& f) const;

 private:
  MapSpec spec_;
  Interval y_;
  std::size_t tau_cap_ = 1;
  std::vector<Cylinder> cylinders_;
  double tail_lebesgue_ = 0.0;
  LsvLeftBranch left_{0.25};
};

InducedScheme build_induced(const MapSpec& spec, std::size_t tau_cap);
ReturnTime return_time(const InducedScheme& scheme, double y);
Vec induce_observable(const InducedScheme& scheme, const Observable& v, double y);

struct TowerOptions {
  std::size_t bins = 4096;
  std::size_t tau_cap = 1000;
  std::size_t max_iterations = 10000;  // density power iteration
  double density_tolerance = 1e-14;    // l1 change between iterates
};

/// Cubic Lagrange stencil on the bin midpoints.
struct Stencil {
  std::size_t first = 0;
  double w[4] = {0, 0, 0, 0};
};

class TowerModel {
 public:
  TowerModel(InducedScheme scheme, const TowerOptions& opt);

  const InducedScheme& scheme() const { return scheme_; }
  std::size_t bins() const { return rho_.size(); }
  double bin_width() const { return width_; }
  double node(std::size_t j) const { return scheme_.Y().lo + (static_cast<double>(j) + 0.5) * width_; }
  /// Invariant density of F with respect to Lebesgue on Y, at the nodes.
  const std::vector<double>& density() const { return rho_; }
  /// Bin masses muY_j = rho_j * width.
  std::vector<double> mu_y() const;
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& P() const { return P_; }
  double tau_bar() const { return tau_bar_; }
  /// muY(a) from Gauss-Legendre on the interpolated density.
  const std::vector<double>& cylinder_mass() const { return cylinder_mass_; }
  /// max_j zeta_a(y_j) / muY(a) per cylinder.
  const std::vector<double>& zeta_ratio() const { return zeta_ratio_; }
  /// muY(tau > tau_cap).
  double tail_mass() const { return tail_mass_; }
  double density_residual() const { return density_residual_; }
  std::size_t density_iterations() const { return density_iterations_; }

  Stencil stencil(double y) const;
  double interpolate(std::span<const double> f, double y) const;
  double density_at(double y) const { return interpolate(rho_, y); }

  /// |P 1 - 1|_inf.
  double constants_residual() const;
  /// l1 distance between the density and its image under the discretized
  /// Perron-Frobenius operator.
  double fixed_point_residual() const;
  /// sum_a muY(a) tau(a).
  double telescoped_tau_bar() const;

  /// Calls f(j, preimage, zeta) for every node and every inverse branch.
  template <class F>
  void for_each_weighted_preimage(F&& f) const;

 private:
  InducedScheme scheme_;
  double width_ = 0.0;
  std::vector<double> rho_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> P_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> pf_;
  double tau_bar_ = 0.0;
  std::vector<double> cylinder_mass_;
  std::vector<double> zeta_ratio_;
  double tail_mass_ = 0.0;
  double density_residual_ = 0.0;
  std::size_t density_iterations_ = 0;
};

TowerModel ulam_P(const InducedScheme& scheme, std::size_t bins);

struct DecomposeOptions {
  std::size_t K = 1000;             // maximal number of series terms
  double series_tolerance = 1e-10;  // stop once |P^k phi'| < tol |phi'|
  double kernel_tolerance = 1e-6;   // relative bound on |P m'|
  double mean_tolerance = 1e-8;     // relative bound on the muY-mean of phi'
};

/// Node values, one row per bin, one column per component (column-major, so
/// each component is contiguous).
using NodeField = Eigen::MatrixXd;

struct MartingaleDecomposition {
  Observable v = Observable::zero();
  NodeField phi_prime;
  NodeField chi_prime;
  NodeField m_prime;
  std::size_t K = 0;              // series terms used
  double phi_norm = 0.0;          // |phi'|_inf over nodes
  double residual_series = 0.0;   // |P^K phi'|_inf
  double residual_kernel = 0.0;   // |P m'|_inf
  double residual_identity = 0.0; // max |phi' - m' - chi' o F + chi'|
  double mean = 0.0;              // |int phi' dmuY|
};

/// Builds phi' from v (which must be mu-centered), then chi' = sum_{k>=1} P^k phi'
/// and m' = phi' - chi' o F + chi'.
MartingaleDecomposition martingale_decompose(const TowerModel& tower, const Observable& v,
                                             const DecomposeOptions& opt = {});

/// Sigma = tau_bar^{-1} int_Y m' (x) m' dmuY.
Mat sigma_from_m(const TowerModel& tower, const MartingaleDecomposition& dec);
/// E = tau_bar^{-1} int_Y (chi' (x) phi' + S') dmuY, S' the iterated sum over
/// one excursion.
Mat e_from_chi(const TowerModel& tower, const MartingaleDecomposition& dec);

/// int v dmu = tau_bar^{-1} int_Y phi' dmuY.
Vec tower_mean(const TowerModel& tower, const Observable& raw);

/// Centered copy of `raw`. LSV uses the tower quadrature (tau_cap and bins
/// from opt); the other maps use the Ulam density.
Observable center_observable(const Observable& raw, const MapSpec& spec,
                             const TowerOptions& opt = {});

/// int v dmu for the observable including its offset; tower quadrature for
/// LSV, Ulam density otherwise.
Vec invariant_mean(const Observable& v, const MapSpec& spec, const TowerOptions& opt = {});

/// Martingale estimate of (Sigma, E); the standard error is the change
/// against a model with half the bins, floored at 1e-9 relative.
CoefficientEstimate martingale_coeffs(const MapSpec& spec, const Observable& v,
                                      const TowerOptions& opt = {},
                                      const DecomposeOptions& dopt = {});

struct TailPoint {
  double q = 0.0;
  double value = 0.0;  // int |m'|^2 1{|m'|^2 > q} dmuY
};

struct DeviationPoint {
  std::size_t n = 0;
  double mean = 0.0;    // mean over samples of |D_n|_F, D_n the Birkhoff deviation
  double stderr_mean = 0.0;
  double signed_mean = 0.0;  // mean of D_n(0,0)
  double signed_stderr = 0.0;
};

struct HypothesisReport {
  double m_mass = 0.0;  // int |m'|^2 dmuY
  std::vector<TailPoint> tail;
  bool tail_decreasing = true;
  std::vector<DeviationPoint> deviation;
  double deviation_slope = 0.0;  // log-log slope of the mean |D_n|
};

/// (a) tail functional of |m'|^2 on q_grid; (c) deviation of the Birkhoff
/// average of UL(m (x) m) from Sigma along tower orbits started from muY.
HypothesisReport hypothesis_diagnostics(const TowerModel& tower, const MartingaleDecomposition& dec,
                                        const std::vector<double>& q_grid,
                                        const std::vector<std::size_t>& n_grid,
                                        std::size_t samples, std::uint64_t seed);

void write_cylinders_csv(std::ostream& os, const TowerModel& tower);
void write_decomposition_csv(std::ostream& os, const TowerModel& tower,
                             const MartingaleDecomposition& dec);
void write_diagnostics_csv(std::ostream& os, const HypothesisReport& report);

// ---------------------------------------------------------------------------

template <class F>
void InducedScheme::for_each_preimage(double y, F&& f) const {
  if (spec_.kind == MapKind::kDoubling) {
    f(Preimage{0, 1, 0.5 * y, 0.5, true, y});
    f(Preimage{1, 1, 0.5 * (y + 1.0), 0.5, true, y});
    return;
  }
  // w runs through the backward orbit of y under the left branch
  double w = y;
  double jac = 0.5;
  for (std::size_t k = 1; k <= tau_cap_; ++k) {
    if (k > 1) {
      w = left_.inverse(w);
      jac /= left_.derivative(w);
    }
    f(Preimage{k - 1, k, 0.5 * (w + 1.0), jac, k == 1, w});
  }
}

template <class F>
void TowerModel::for_each_weighted_preimage(F&& f) const {
  for (std::size_t j = 0; j < bins(); ++j) {
    const double inv_rho = 1.0 / rho_[j];
    scheme_.for_each_preimage(node(j), [&](const Preimage& pre) {
      f(j, pre, density_at(pre.y) * pre.jacobian * inv_rho);
    });
  }
}

}  // namespace homog
