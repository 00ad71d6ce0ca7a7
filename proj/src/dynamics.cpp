#include "homog/dynamics.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <array>
#include <limits>
#include <sstream>

#include "homog/sampling.hpp"

namespace homog {

MapSpec MapSpec::lsv(double gamma, double p, double eta) {
  MapSpec s;
  s.kind = MapKind::kLsv;
  s.gamma = gamma;
  s.p = p;
  s.eta = eta;
  return s;
}

MapSpec MapSpec::doubling() {
  MapSpec s;
  s.kind = MapKind::kDoubling;
  s.p = std::numeric_limits<double>::infinity();
  return s;
}

MapSpec MapSpec::quadratic(double a) {
  MapSpec s;
  s.kind = MapKind::kQuadratic;
  s.a_quad = a;
  s.p = std::numeric_limits<double>::infinity();
  return s;
}

Interval MapSpec::domain() const {
  if (kind == MapKind::kQuadratic) return {-1.0, 1.0};
  return {0.0, 1.0};
}

void MapSpec::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in (0, 1]");
  if (!(p >= 2.0)) throw ConfigError("p must be >= 2");
  switch (kind) {
    case MapKind::kLsv:
      if (!(gamma > 0.0 && gamma < 0.5))
        throw ConfigError("gamma must lie in (0, 1/2) for the lsv map");
      if (!(p < 1.0 / gamma)) throw ConfigError("p must satisfy p < 1/gamma for the lsv map");
      break;
    case MapKind::kQuadratic:
      if (a_quad != 2.0) throw ConfigError("quadratic map is only supported at a = 2");
      break;
    case MapKind::kDoubling: break;
  }
}

std::string MapSpec::name() const {
  std::ostringstream os;
  switch (kind) {
    case MapKind::kLsv: os << "lsv(gamma=" << gamma << ")"; break;
    case MapKind::kDoubling: os << "doubling"; break;
    case MapKind::kQuadratic: os << "quadratic(a=" << a_quad << ")"; break;
  }
  return os.str();
}

MapKind parse_map_kind(const std::string& name) {
  if (name == "lsv") return MapKind::kLsv;
  if (name == "doubling") return MapKind::kDoubling;
  if (name == "quadratic") return MapKind::kQuadratic;
  throw ConfigError("unknown map '" + name + "' (expected lsv, doubling or quadratic)");
}

LsvLeftBranch::LsvLeftBranch(double gamma)
    : gamma_(gamma),
      scale_(std::exp2(gamma)),
      mode_(gamma == 0.25 ? Mode::kQuarter : gamma == 0.5 ? Mode::kHalf : Mode::kGeneral) {}

double LsvLeftBranch::inverse(double w) const {
  if (w <= 0.0) return 0.0;
  // left(x) >= x, so the root lies below w; start from the fixed-point guess
  double x = std::min(0.5, w / (1.0 + scale_ * power(w)));
  for (int it = 0; it < 60; ++it) {
    const double f = (*this)(x) - w;
    const double step = f / derivative(x);
    double next = x - step;
    if (next <= 0.0) next = 0.5 * x;
    if (next > 0.5) next = 0.5;
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * x) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

double apply_map(const MapSpec& spec, double x) {
  const Interval dom = spec.domain();
  if (!(x >= dom.lo && x <= dom.hi)) {
    std::ostringstream os;
    os << "point " << x << " outside the domain [" << dom.lo << ", " << dom.hi << "] of "
       << spec.name();
    throw DomainError(os.str());
  }
  switch (spec.kind) {
    case MapKind::kLsv: {
      if (x <= 0.5) return std::min(1.0, LsvLeftBranch(spec.gamma)(x));
      return 2.0 * x - 1.0;
    }
    case MapKind::kDoubling: return x < 0.5 ? 2.0 * x : 2.0 * x - 1.0;
    case MapKind::kQuadratic: break;
  }
  return std::clamp(1.0 - spec.a_quad * x * x, -1.0, 1.0);
}

std::vector<double> collect_orbit(const MapSpec& spec, double x0, std::size_t n) {
  std::vector<double> out;
  out.reserve(n);
  orbit_fold(spec, x0, n, [&](double x) { out.push_back(x); });
  return out;
}

std::vector<MapBranch> map_branches(const MapSpec& spec) {
  switch (spec.kind) {
    case MapKind::kLsv: {
      LsvLeftBranch left(spec.gamma);
      return {MapBranch{{0.0, 0.5}, true, [left](double w) { return left.inverse(w); }},
              MapBranch{{0.5, 1.0}, true, [](double w) { return 0.5 * (w + 1.0); }}};
    }
    case MapKind::kDoubling:
      return {MapBranch{{0.0, 0.5}, true, [](double w) { return 0.5 * w; }},
              MapBranch{{0.5, 1.0}, true, [](double w) { return 0.5 * (w + 1.0); }}};
    case MapKind::kQuadratic: break;
  }
  const double a = spec.a_quad;
  return {MapBranch{{-1.0, 0.0}, true,
                    [a](double w) { return -std::sqrt(std::max(0.0, (1.0 - w) / a)); }},
          MapBranch{{0.0, 1.0}, false,
                    [a](double w) { return std::sqrt(std::max(0.0, (1.0 - w) / a)); }}};
}

MapFamily MapFamily::lsv_harmonic(double gamma_inf, double amplitude, double p, double eta) {
  MapFamily f;
  f.limit_ = MapSpec::lsv(gamma_inf, p, eta);
  f.amplitude_ = amplitude;
  return f;
}

MapSpec MapFamily::member(std::size_t n) const {
  if (n == 0) throw ConfigError("family members are indexed from 1");
  MapSpec s = limit_;
  s.gamma = limit_.gamma + amplitude_ / static_cast<double>(n);
  return s;
}

bool MapFamily::converges_on(const std::vector<std::size_t>& indices, double tol) const {
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t n : indices) {
    const double gap = std::abs(member(n).gamma - limit_.gamma);
    if (gap > prev) return false;
    prev = gap;
  }
  return prev <= tol;
}

namespace {

// 4-point Gauss-Legendre on [-1, 1]
constexpr std::array<double, 4> kGl4Nodes{-0.8611363115940526, -0.3399810435848563,
                                          0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> kGl4Weights{0.3478548451374538, 0.6521451548625461,
                                            0.6521451548625461, 0.3478548451374538};

}  // namespace

double DensityEstimate::integrate(const std::function<double(double)>& f) const {
  const double w = bin_width();
  double total = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double mid = domain.lo + (static_cast<double>(i) + 0.5) * w;
    double bin = 0.0;
    for (int g = 0; g < 4; ++g) bin += kGl4Weights[g] * f(mid + 0.5 * w * kGl4Nodes[g]);
    total += density[i] * 0.5 * w * bin;
  }
  return total;
}

double DensityEstimate::cdf(double x) const {
  if (x <= domain.lo) return 0.0;
  if (x >= domain.hi) return 1.0;
  const double w = bin_width();
  const double pos = (x - domain.lo) / w;
  const auto full = static_cast<std::size_t>(pos);
  double acc = 0.0;
  for (std::size_t i = 0; i < full && i < density.size(); ++i) acc += density[i] * w;
  if (full < density.size()) acc += density[full] * (pos - static_cast<double>(full)) * w;
  return std::min(1.0, acc);
}

DensityEstimate invariant_density_ulam(const MapSpec& spec, std::size_t bins,
                                       const UlamOptions& options) {
  if (bins < 2) throw ConfigError("Ulam discretization needs at least 2 bins");
  const Interval dom = spec.domain();
  const double w = dom.width() / static_cast<double>(bins);
  const auto edge = [&](std::size_t j) { return dom.lo + static_cast<double>(j) * w; };
  const auto bin_of = [&](double x) {
    const double pos = (x - dom.lo) / w;
    return std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, pos)));
  };

  // transpose of the Ulam matrix: row j collects mass flowing into bin j
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(bins * 8);
  for (const MapBranch& br : map_branches(spec)) {
    std::vector<double> pre(bins + 1);
    for (std::size_t j = 0; j <= bins; ++j) pre[j] = br.inverse(std::min(dom.hi, edge(j)));
    for (std::size_t j = 0; j < bins; ++j) {
      double lo = pre[j], hi = pre[j + 1];
      if (lo > hi) std::swap(lo, hi);
      lo = std::max(lo, br.source.lo);
      hi = std::min(hi, br.source.hi);
      if (!(hi > lo)) continue;
      for (std::size_t i = bin_of(lo); i < bins; ++i) {
        const double a = std::max(lo, edge(i));
        const double b = std::min(hi, edge(i + 1));
        if (b > a) triplets.emplace_back(static_cast<int>(j), static_cast<int>(i), (b - a) / w);
        if (edge(i + 1) >= hi) break;
      }
    }
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> flow(static_cast<int>(bins), static_cast<int>(bins));
  flow.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::VectorXd pi = Eigen::VectorXd::Constant(static_cast<int>(bins), 1.0 / bins);
  Eigen::VectorXd next(pi.size());
  DensityEstimate out;
  out.domain = dom;
  double residual = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (; it < options.max_iterations; ++it) {
    next.noalias() = flow * pi;
    next /= next.sum();
    residual = (next - pi).lpNorm<1>();
    pi.swap(next);
    if (residual < options.tolerance) break;
  }
  if (!(residual < options.tolerance)) {
    throw ConvergenceError("Ulam power iteration did not converge for " + spec.name(), residual);
  }
  out.iterations = it + 1;
  out.residual = residual;
  out.density.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) out.density[i] = pi[static_cast<int>(i)] / w;
  return out;
}

std::vector<double> sample_invariant(const MapSpec& spec, std::size_t count, std::size_t burnin,
                                     std::uint64_t seed) {
  std::vector<double> out(count);
  with_stepper(spec, [&](const auto& stepper) {
    for (std::size_t i = 0; i < count; ++i) {
      auto state = start_orbit(stepper, seed, i, InitialMeasure::kMu, burnin);
      out[i] = stepper.value(state);
    }
  });
  return out;
}

}  // namespace homog
