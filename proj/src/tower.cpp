#include "homog/tower.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "homog/errors.hpp"
#include "homog/io.hpp"
#include "homog/kernel.hpp"
#include "homog/rng.hpp"
#include "homog/sampling.hpp"

namespace homog {

InducedScheme InducedScheme::build(const MapSpec& spec, std::size_t tau_cap) {
  spec.validate();
  if (tau_cap < 1) throw ConfigError("tau_cap must be at least 1");
  InducedScheme s;
  s.spec_ = spec;
  s.tau_cap_ = tau_cap;
  switch (spec.kind) {
    case MapKind::kDoubling:
      s.y_ = {0.0, 1.0};
      s.tau_cap_ = 1;
      s.cylinders_ = {{1, 0.0, 0.5}, {1, 0.5, 1.0}};
      return s;
    case MapKind::kQuadratic:
      throw ConfigError("the induced scheme is only implemented for the lsv and doubling maps");
    case MapKind::kLsv: break;
  }
  s.y_ = {0.5, 1.0};
  s.left_ = LsvLeftBranch(spec.gamma);
  // x_0 = 1, x_1 = 1/2, x_{k+1} = L^{-1}(x_k); tau = k on 2y - 1 in (x_k, x_{k-1}]
  double prev = 1.0, cur = 0.5;
  s.cylinders_.reserve(tau_cap);
  for (std::size_t k = 1; k <= tau_cap; ++k) {
    s.cylinders_.push_back({k, 0.5 * (cur + 1.0), 0.5 * (prev + 1.0)});
    prev = cur;
    cur = s.left_.inverse(cur);
  }
  s.tail_lebesgue_ = prev;  // |{2y - 1 <= x_cap}| / |Y|
  if (s.tail_lebesgue_ > 0.5)
    throw ConfigError("tau_cap: the discarded tail {tau > tau_cap} carries more than half of Y");
  return s;
}

ReturnTime InducedScheme::return_time(double y) const {
  if (!y_.contains(y)) throw DomainError("return_time: point outside the inducing set Y");
  double x = y;
  for (std::size_t n = 1; n <= tau_cap_; ++n) {
    x = apply_map(spec_, x);
    if (x >= y_.lo) return {n, false, x};
  }
  return {tau_cap_, true, x};
}

Vec InducedScheme::induce(const Observable& v, double y, ReturnTime* rt) const {
  const ReturnTime r = return_time(y);
  Vec sum = Vec::Zero(v.dim());
  Vec buf(v.dim());
  double x = y;
  for (std::size_t l = 0; l < r.tau; ++l) {
    v(x, buf.data());
    sum += buf;
    if (l + 1 < r.tau) x = apply_map(spec_, x);
  }
  if (rt) *rt = r;
  return sum;
}

InducedScheme build_induced(const MapSpec& spec, std::size_t tau_cap) {
  return InducedScheme::build(spec, tau_cap);
}

ReturnTime return_time(const InducedScheme& scheme, double y) { return scheme.return_time(y); }

Vec induce_observable(const InducedScheme& scheme, const Observable& v, double y) {
  ReturnTime rt;
  Vec out = scheme.induce(v, y, &rt);
  if (rt.capped)
    throw ConvergenceError("induce_observable: no return to Y within tau_cap steps",
                           static_cast<double>(rt.tau));
  return out;
}

namespace {

using SparseRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Accumulates one sparse row in a dense scratch vector.
class RowBuilder {
 public:
  explicit RowBuilder(std::size_t n) : dense_(n, 0.0), used_(n, 0) {}
  void add(std::size_t col, double w) {
    if (!used_[col]) {
      used_[col] = 1;
      touched_.push_back(col);
    }
    dense_[col] += w;
  }
  void flush(int row, std::vector<Eigen::Triplet<double>>& out) {
    std::sort(touched_.begin(), touched_.end());
    for (std::size_t c : touched_) {
      if (dense_[c] != 0.0) out.emplace_back(row, static_cast<int>(c), dense_[c]);
      dense_[c] = 0.0;
      used_[c] = 0;
    }
    touched_.clear();
  }

 private:
  std::vector<double> dense_;
  std::vector<char> used_;
  std::vector<std::size_t> touched_;
};

constexpr double kGl2 = 0.5773502691896257;  // 1/sqrt(3)

}  // namespace

Stencil TowerModel::stencil(double y) const {
  const std::size_t n = bins();
  const double t = (y - scheme_.Y().lo) / width_ - 0.5;
  const double fl = std::floor(t);
  const double first = std::clamp(fl - 1.0, 0.0, static_cast<double>(n - 4));
  const double u = t - first;
  Stencil s;
  s.first = static_cast<std::size_t>(first);
  s.w[0] = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
  s.w[1] = u * (u - 2.0) * (u - 3.0) / 2.0;
  s.w[2] = -u * (u - 1.0) * (u - 3.0) / 2.0;
  s.w[3] = u * (u - 1.0) * (u - 2.0) / 6.0;
  return s;
}

double TowerModel::interpolate(std::span<const double> f, double y) const {
  const Stencil s = stencil(y);
  const double* p = f.data() + s.first;
  return s.w[0] * p[0] + s.w[1] * p[1] + s.w[2] * p[2] + s.w[3] * p[3];
}

TowerModel::TowerModel(InducedScheme scheme, const TowerOptions& opt) : scheme_(std::move(scheme)) {
  if (opt.bins < 16) throw ConfigError("bins: the tower discretization needs at least 16 bins");
  const std::size_t n = opt.bins;
  width_ = scheme_.Y().width() / static_cast<double>(n);
  rho_.assign(n, 1.0 / scheme_.Y().width());

  // Perron-Frobenius operator of F on node values
  std::vector<Eigen::Triplet<double>> trip;
  RowBuilder row(n);
  for (std::size_t j = 0; j < n; ++j) {
    scheme_.for_each_preimage(node(j), [&](const Preimage& pre) {
      const Stencil s = stencil(pre.y);
      for (int k = 0; k < 4; ++k) row.add(s.first + static_cast<std::size_t>(k), pre.jacobian * s.w[k]);
    });
    row.flush(static_cast<int>(j), trip);
  }
  pf_.resize(static_cast<int>(n), static_cast<int>(n));
  pf_.setFromTriplets(trip.begin(), trip.end());

  Eigen::Map<Eigen::VectorXd> rho(rho_.data(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd next(rho.size());
  double residual = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  while (it < opt.max_iterations && !(residual < opt.density_tolerance)) {
    next.noalias() = pf_ * rho;
    next /= next.sum() * width_;
    residual = (next - rho).lpNorm<1>() * width_;
    rho = next;
    ++it;
  }
  density_residual_ = residual;
  density_iterations_ = it;
  if (!(residual < opt.density_tolerance))
    throw ConvergenceError("tower: invariant density of the induced map did not converge",
                           residual);
  if (rho.minCoeff() <= 0.0)
    throw ConvergenceError("tower: discretized invariant density is not positive", rho.minCoeff());

  // transfer operator with respect to muY, return-time integral, zeta bounds
  const std::size_t ncyl = scheme_.cylinders().size();
  std::vector<double> zeta_max(ncyl, 0.0);
  trip.clear();
  double tau_int = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double inv_rho = 1.0 / rho_[j];
    double ptau = 0.0;
    scheme_.for_each_preimage(node(j), [&](const Preimage& pre) {
      const double zeta = density_at(pre.y) * pre.jacobian * inv_rho;
      const Stencil s = stencil(pre.y);
      for (int k = 0; k < 4; ++k) row.add(s.first + static_cast<std::size_t>(k), zeta * s.w[k]);
      ptau += zeta * static_cast<double>(pre.tau);
      zeta_max[pre.cylinder] = std::max(zeta_max[pre.cylinder], zeta);
    });
    row.flush(static_cast<int>(j), trip);
    tau_int += ptau * rho_[j] * width_;
  }
  P_.resize(static_cast<int>(n), static_cast<int>(n));
  P_.setFromTriplets(trip.begin(), trip.end());
  tau_bar_ = tau_int;

  // The interpolant is one cubic between consecutive nodes, so two-point
  // Gauss-Legendre on each piece integrates it exactly.
  auto integrate = [&](double a, double b) {
    double total = 0.0;
    while (a < b) {
      const double t = (a - scheme_.Y().lo) / width_ - 0.5;
      double edge = scheme_.Y().lo + (std::floor(t) + 1.5) * width_;
      if (!(edge > a)) edge = a + width_;
      const double e = std::min(b, edge);
      const double mid = 0.5 * (a + e), half = 0.5 * (e - a);
      total += half * (density_at(mid - half * kGl2) + density_at(mid + half * kGl2));
      a = e;
    }
    return total;
  };
  cylinder_mass_.resize(ncyl);
  zeta_ratio_.resize(ncyl);
  for (std::size_t a = 0; a < ncyl; ++a) {
    const Cylinder& c = scheme_.cylinders()[a];
    cylinder_mass_[a] = integrate(c.left, c.right);
    zeta_ratio_[a] = cylinder_mass_[a] > 0.0 ? zeta_max[a] / cylinder_mass_[a] : 0.0;
  }
  tail_mass_ = scheme_.spec().kind == MapKind::kLsv
                   ? integrate(scheme_.Y().lo, scheme_.cylinders().back().left)
                   : 0.0;
}

std::vector<double> TowerModel::mu_y() const {
  std::vector<double> out(rho_);
  for (double& x : out) x *= width_;
  return out;
}

double TowerModel::constants_residual() const {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(bins()));
  return (P_ * ones - ones).lpNorm<Eigen::Infinity>();
}

double TowerModel::fixed_point_residual() const {
  Eigen::Map<const Eigen::VectorXd> rho(rho_.data(), static_cast<Eigen::Index>(bins()));
  const Eigen::VectorXd image = pf_ * rho;
  return (image - rho).lpNorm<1>() * width_;
}

double TowerModel::telescoped_tau_bar() const {
  double s = 0.0;
  for (std::size_t a = 0; a < cylinder_mass_.size(); ++a)
    s += cylinder_mass_[a] * static_cast<double>(scheme_.cylinders()[a].tau);
  return s;
}

TowerModel ulam_P(const InducedScheme& scheme, std::size_t bins) {
  TowerOptions opt;
  opt.bins = bins;
  opt.tau_cap = scheme.tau_cap();
  return TowerModel(scheme, opt);
}

namespace {

// Running excursion sums along one preimage chain: A = sum of v over the
// tail T y_a, ..., T^{tau-1} y_a and B = the iterated sum over the same tail.
struct ChainSums {
  int d;
  Vec A, B_row, head, next;
  Mat B;
  explicit ChainSums(int dim)
      : d(dim), A(Vec::Zero(dim)), head(dim), next(dim), B(Mat::Zero(dim, dim)) {}

  void step(const Observable& v, const Preimage& pre, bool with_iterated) {
    if (pre.fresh) {
      A.setZero();
      if (with_iterated) B.setZero();
    } else {
      v(pre.next, next.data());
      if (with_iterated) B.noalias() += next * A.transpose();
      A += next;
    }
    v(pre.y, head.data());
  }
  Vec phi() const { return head + A; }
  Mat iterated() const { return B + head * A.transpose(); }
};

Vec interpolate_field(const TowerModel& tower, const NodeField& f, double y) {
  const Stencil s = tower.stencil(y);
  Vec out(f.cols());
  for (Eigen::Index c = 0; c < f.cols(); ++c) {
    const double* p = f.col(c).data() + s.first;
    out[c] = s.w[0] * p[0] + s.w[1] * p[1] + s.w[2] * p[2] + s.w[3] * p[3];
  }
  return out;
}

double sup_norm(const NodeField& f) { return f.size() ? f.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

Vec tower_mean(const TowerModel& tower, const Observable& raw) {
  const Observable v = raw.with_offset(Vec::Zero(raw.dim()));
  ChainSums chain(v.dim());
  Vec total = Vec::Zero(v.dim());
  tower.for_each_weighted_preimage([&](std::size_t j, const Preimage& pre, double zeta) {
    chain.step(v, pre, false);
    total += (zeta * tower.density()[j] * tower.bin_width()) * chain.phi();
  });
  return total / tower.tau_bar();
}

Observable center_observable(const Observable& raw, const MapSpec& spec, const TowerOptions& opt) {
  if (raw.kind() == ObservableKind::kZero) return raw;
  if (spec.kind != MapKind::kLsv) return center(raw, spec);
  const TowerModel tower(InducedScheme::build(spec, opt.tau_cap), opt);
  return raw.with_offset(tower_mean(tower, raw));
}

Vec invariant_mean(const Observable& v, const MapSpec& spec, const TowerOptions& opt) {
  if (v.kind() == ObservableKind::kZero) return Vec::Zero(v.dim());
  if (spec.kind == MapKind::kLsv) {
    const TowerModel tower(InducedScheme::build(spec, opt.tau_cap), opt);
    return tower_mean(tower, v) - v.offset();
  }
  if (spec.kind == MapKind::kQuadratic) return arcsine_mean(v);
  const DensityEstimate rho = invariant_density_ulam(spec, kCenteringBins);
  Vec m(v.dim());
  Vec buf(v.dim());
  for (int i = 0; i < v.dim(); ++i)
    m[i] = rho.integrate([&](double x) {
      v(x, buf.data());
      return buf[i];
    });
  return m;
}

MartingaleDecomposition martingale_decompose(const TowerModel& tower, const Observable& v,
                                             const DecomposeOptions& opt) {
  const std::size_t n = tower.bins();
  const int d = v.dim();
  const InducedScheme& scheme = tower.scheme();
  MartingaleDecomposition dec;
  dec.v = v;
  dec.phi_prime.resize(static_cast<Eigen::Index>(n), d);
  std::vector<double> image(n);
  for (std::size_t j = 0; j < n; ++j) {
    ReturnTime rt;
    dec.phi_prime.row(static_cast<Eigen::Index>(j)) = scheme.induce(v, tower.node(j), &rt).transpose();
    if (rt.capped)
      throw ConvergenceError("martingale_decompose: a bin center does not return within tau_cap",
                             tower.node(j));
    image[j] = rt.image;
  }
  dec.phi_norm = sup_norm(dec.phi_prime);

  // g = P phi', with phi' evaluated exactly at the preimages
  NodeField g = NodeField::Zero(static_cast<Eigen::Index>(n), d);
  ChainSums chain(d);
  tower.for_each_weighted_preimage([&](std::size_t j, const Preimage& pre, double zeta) {
    chain.step(v, pre, false);
    g.row(static_cast<Eigen::Index>(j)) += zeta * chain.phi().transpose();
  });
  Eigen::Map<const Eigen::VectorXd> rho(tower.density().data(), static_cast<Eigen::Index>(n));
  dec.mean = (g.transpose() * rho).cwiseAbs().maxCoeff() * tower.bin_width();
  if (dec.mean > opt.mean_tolerance * std::max(dec.phi_norm, 1e-300) && dec.phi_norm > 0.0)
    throw ConfigError("observable: the induced observable has muY-mean " +
                      std::to_string(dec.mean) + "; center v with respect to mu first");

  dec.chi_prime = NodeField::Zero(static_cast<Eigen::Index>(n), d);
  NodeField term = g;
  std::size_t k = 0;
  const double stop = opt.series_tolerance * dec.phi_norm;
  while (sup_norm(term) >= stop && dec.phi_norm > 0.0) {
    if (k == opt.K)
      throw ConvergenceError("martingale_decompose: series P^k phi' has not decayed after K=" +
                                 std::to_string(opt.K) + " terms; increase K",
                             sup_norm(term));
    dec.chi_prime += term;
    term = tower.P() * term;
    // P^k phi' tends to a constant of size the discrete mean error; constants
    // cancel in m', so project them out
    const Eigen::RowVectorXd mean = (rho.transpose() * term) * tower.bin_width();
    term.rowwise() -= mean;
    ++k;
  }
  dec.K = k;
  dec.residual_series = sup_norm(term);

  dec.m_prime.resize(static_cast<Eigen::Index>(n), d);
  double identity = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    const Vec chi_f = interpolate_field(tower, dec.chi_prime, image[j]);
    dec.m_prime.row(r) = dec.phi_prime.row(r) - chi_f.transpose() + dec.chi_prime.row(r);
    const Vec back = dec.phi_prime.row(r).transpose() - dec.m_prime.row(r).transpose() - chi_f +
                     dec.chi_prime.row(r).transpose();
    identity = std::max(identity, back.cwiseAbs().maxCoeff());
  }
  dec.residual_identity = identity;

  // P m' = P phi' + P chi' - chi' P 1
  const Eigen::VectorXd p1 = tower.P() * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  const NodeField pm = g + tower.P() * dec.chi_prime - p1.asDiagonal() * dec.chi_prime;
  dec.residual_kernel = sup_norm(pm);
  if (dec.residual_kernel > opt.kernel_tolerance * dec.phi_norm && dec.phi_norm > 0.0)
    throw ConvergenceError("martingale_decompose: |P m'| exceeds the kernel tolerance",
                           dec.residual_kernel);
  return dec;
}

Mat sigma_from_m(const TowerModel& tower, const MartingaleDecomposition& dec) {
  const int d = dec.v.dim();
  Mat sigma = Mat::Zero(d, d);
  ChainSums chain(d);
  tower.for_each_weighted_preimage([&](std::size_t j, const Preimage& pre, double zeta) {
    chain.step(dec.v, pre, false);
    const Vec m = chain.phi() + interpolate_field(tower, dec.chi_prime, pre.y) -
                  dec.chi_prime.row(static_cast<Eigen::Index>(j)).transpose();
    sigma.noalias() += (zeta * tower.density()[j] * tower.bin_width()) * (m * m.transpose());
  });
  sigma /= tower.tau_bar();
  return 0.5 * (sigma + sigma.transpose());
}

Mat e_from_chi(const TowerModel& tower, const MartingaleDecomposition& dec) {
  const int d = dec.v.dim();
  Mat e = Mat::Zero(d, d);
  ChainSums chain(d);
  tower.for_each_weighted_preimage([&](std::size_t j, const Preimage& pre, double zeta) {
    chain.step(dec.v, pre, true);
    const Vec chi = interpolate_field(tower, dec.chi_prime, pre.y);
    e.noalias() += (zeta * tower.density()[j] * tower.bin_width()) *
                   (chi * chain.phi().transpose() + chain.iterated());
  });
  return e / tower.tau_bar();
}

CoefficientEstimate martingale_coeffs(const MapSpec& spec, const Observable& v,
                                      const TowerOptions& opt, const DecomposeOptions& dopt) {
  const InducedScheme scheme = InducedScheme::build(spec, opt.tau_cap);
  auto solve = [&](std::size_t bins) {
    TowerOptions o = opt;
    o.bins = bins;
    const TowerModel tower(scheme, o);
    const MartingaleDecomposition dec = martingale_decompose(tower, v, dopt);
    return std::make_pair(sigma_from_m(tower, dec), e_from_chi(tower, dec));
  };
  const auto [sigma, e] = solve(opt.bins);
  const auto [sigma_half, e_half] = solve(std::max<std::size_t>(16, opt.bins / 2));
  CoefficientEstimate est;
  est.method = CoefficientMethod::kMartingale;
  est.truncation_kind = "bins";
  est.truncation = opt.bins;
  est.Sigma = sigma;
  est.E = e;
  const double scale = std::max(sigma.cwiseAbs().maxCoeff(), e.cwiseAbs().maxCoeff());
  est.Sigma_se = (sigma - sigma_half).cwiseAbs().cwiseMax(1e-9 * scale);
  est.E_se = (e - e_half).cwiseAbs().cwiseMax(1e-9 * scale);
  return est;
}

HypothesisReport hypothesis_diagnostics(const TowerModel& tower, const MartingaleDecomposition& dec,
                                        const std::vector<double>& q_grid,
                                        const std::vector<std::size_t>& n_grid,
                                        std::size_t samples, std::uint64_t seed) {
  const int d = dec.v.dim();
  const std::size_t n = tower.bins();
  HypothesisReport rep;
  rep.tail.resize(q_grid.size());
  for (std::size_t i = 0; i < q_grid.size(); ++i) rep.tail[i].q = q_grid[i];

  // R = P(m' (x) m') at the nodes, used as UL(m (x) m) on level 0
  NodeField R = NodeField::Zero(static_cast<Eigen::Index>(n), d * d);
  ChainSums chain(d);
  tower.for_each_weighted_preimage([&](std::size_t j, const Preimage& pre, double zeta) {
    chain.step(dec.v, pre, false);
    const Vec m = chain.phi() + interpolate_field(tower, dec.chi_prime, pre.y) -
                  dec.chi_prime.row(static_cast<Eigen::Index>(j)).transpose();
    const double m2 = m.squaredNorm();
    const double w = zeta * tower.density()[j] * tower.bin_width();
    rep.m_mass += w * m2;
    for (TailPoint& t : rep.tail)
      if (m2 > t.q) t.value += w * m2;
    const Mat mm = m * m.transpose();
    for (int a = 0; a < d * d; ++a) R(static_cast<Eigen::Index>(j), a) += zeta * mm(a / d, a % d);
  });
  for (std::size_t i = 1; i < rep.tail.size(); ++i)
    if (rep.tail[i].q >= rep.tail[i - 1].q && rep.tail[i].value > rep.tail[i - 1].value)
      rep.tail_decreasing = false;

  std::vector<std::size_t> grid = n_grid;
  std::sort(grid.begin(), grid.end());
  if (grid.empty() || samples < 2) return rep;
  const Mat sigma = sigma_from_m(tower, dec);
  const double y_lo = tower.scheme().Y().lo;
  std::vector<std::vector<double>> dev_norm(grid.size()), dev_00(grid.size());

  with_stepper(tower.scheme().spec(), [&](const auto& stepper) {
    for (std::size_t i = 0; i < samples; ++i) {
      auto state = start_orbit(stepper, seed, i, InitialMeasure::kLebesgue, 0);
      // enter Y, then run 20 returns so the start is close to muY
      std::size_t returns = 0;
      while (returns < 21) {
        stepper.advance(state);
        if (stepper.value(state) >= y_lo) ++returns;
      }
      Vec acc = Vec::Zero(d * d);
      std::size_t g = 0;
      for (std::size_t step = 1; step <= grid.back(); ++step) {
        stepper.advance(state);
        const double x = stepper.value(state);
        if (x >= y_lo) acc += interpolate_field(tower, R, x);
        while (g < grid.size() && grid[g] == step) {
          Mat dn(d, d);
          for (int a = 0; a < d * d; ++a) dn(a / d, a % d) = acc[a] / static_cast<double>(step);
          dn -= sigma;
          dev_norm[g].push_back(dn.norm());
          dev_00[g].push_back(dn(0, 0));
          ++g;
        }
      }
    }
  });
  auto mean_se = [](const std::vector<double>& x) {
    double s = 0.0, s2 = 0.0;
    for (double v : x) s += v;
    const double m = s / static_cast<double>(x.size());
    for (double v : x) s2 += (v - m) * (v - m);
    return std::make_pair(m, std::sqrt(s2 / static_cast<double>(x.size() - 1) /
                                       static_cast<double>(x.size())));
  };
  std::vector<double> lx, ly;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    DeviationPoint p;
    p.n = grid[g];
    std::tie(p.mean, p.stderr_mean) = mean_se(dev_norm[g]);
    std::tie(p.signed_mean, p.signed_stderr) = mean_se(dev_00[g]);
    rep.deviation.push_back(p);
    if (p.mean > 0.0) {
      lx.push_back(std::log(static_cast<double>(p.n)));
      ly.push_back(std::log(p.mean));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    rep.deviation_slope = sxy / sxx;
  }
  return rep;
}

void write_cylinders_csv(std::ostream& os, const TowerModel& tower) {
  CsvWriter csv(os, {"tau", "left", "right", "muY_mass"});
  const auto& cyl = tower.scheme().cylinders();
  for (std::size_t a = 0; a < cyl.size(); ++a) {
    csv.cell(cyl[a].tau).cell(cyl[a].left).cell(cyl[a].right).cell(tower.cylinder_mass()[a]);
    csv.end_row();
  }
}

void write_decomposition_csv(std::ostream& os, const TowerModel& tower,
                             const MartingaleDecomposition& dec) {
  const int d = dec.v.dim();
  std::vector<std::string> header{"bin_center"};
  for (int i = 0; i < d; ++i) header.push_back("chi" + std::to_string(i));
  for (int i = 0; i < d; ++i) header.push_back("m" + std::to_string(i));
  CsvWriter csv(os, header);
  for (std::size_t j = 0; j < tower.bins(); ++j) {
    csv.cell(tower.node(j));
    for (int i = 0; i < d; ++i) csv.cell(dec.chi_prime(static_cast<Eigen::Index>(j), i));
    for (int i = 0; i < d; ++i) csv.cell(dec.m_prime(static_cast<Eigen::Index>(j), i));
    csv.end_row();
  }
}

void write_diagnostics_csv(std::ostream& os, const HypothesisReport& report) {
  CsvWriter csv(os, {"kind", "x", "value", "stderr"});
  csv.cell("m_mass").cell(0LL).cell(report.m_mass).cell(0.0);
  csv.end_row();
  for (const TailPoint& t : report.tail) {
    csv.cell("tail").cell(t.q).cell(t.value).cell(0.0);
    csv.end_row();
  }
  for (const DeviationPoint& p : report.deviation) {
    csv.cell("deviation_norm").cell(p.n).cell(p.mean).cell(p.stderr_mean);
    csv.end_row();
    csv.cell("deviation_00").cell(p.n).cell(p.signed_mean).cell(p.signed_stderr);
    csv.end_row();
  }
}

}  // namespace homog
