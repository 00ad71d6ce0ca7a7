#include "homog/semiflow.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "homog/errors.hpp"
#include "homog/io.hpp"
#include "homog/parallel.hpp"
#include "homog/stat_tests.hpp"
#include "homog/rng.hpp"

namespace homog {

double Roof::inf(const Interval& dom) const { return std::min((*this)(dom.lo), (*this)(dom.hi)); }
double Roof::sup(const Interval& dom) const { return std::max((*this)(dom.lo), (*this)(dom.hi)); }

Roof parse_roof(const std::string& text) {
  if (text == "const1") return {"const1", 0.0};
  if (text.rfind("affine(", 0) == 0 && text.back() == ')') {
    const std::string arg = text.substr(7, text.size() - 8);
    try {
      std::size_t used = 0;
      const double alpha = std::stod(arg, &used);
      if (used == arg.size()) return {text, alpha};
    } catch (const std::exception&) {
    }
    throw ConfigError("roof: '" + arg + "' is not a number");
  }
  throw ConfigError("roof: unknown preset '" + text + "' (expected const1 or affine(alpha))");
}

SuspensionSpec SuspensionSpec::make(const MapSpec& base, const Roof& roof, double c0) {
  base.validate();
  SuspensionSpec s;
  s.base = base;
  s.roof = roof;
  const Interval dom = base.domain();
  s.inf_h = roof.inf(dom);
  s.sup_h = roof.sup(dom);
  if (!(c0 > 0.0)) throw ConfigError("c0: roof lower bound must be positive");
  if (s.inf_h < c0) throw ConfigError("roof: inf h is below the configured lower bound");
  s.h_bar = roof.alpha == 0.0 ? 1.0 : 1.0 + roof.alpha * invariant_mean(Observable::linear(), base)[0];
  return s;
}

namespace {

// Plain floating-point iteration of the base map, for the deterministic
// operations.
struct MapStepper {
  struct State {
    double x;
  };
  MapSpec spec;
  void advance(State& s) const { s.x = apply_map(spec, s.x); }
  static double value(const State& s) { return s.x; }
};

// Walks the flow in left-endpoint substeps, split at lap boundaries and at
// the requested stop times, and accumulates S and SS.
template <class Stepper>
struct FlowWalker {
  const Stepper& stepper;
  const SuspensionSpec& spec;
  const FlowObservable& v;
  double dt;
  typename Stepper::State state;
  double u;
  double h;
  double t = 0.0;
  Vec S;
  Mat SS;
  Vec buf;
  std::size_t laps = 0;

  FlowWalker(const Stepper& st, const SuspensionSpec& sp, const FlowObservable& obs, double step,
             typename Stepper::State s0, double u0)
      : stepper(st), spec(sp), v(obs), dt(step), state(s0), u(u0),
        h(sp.h(Stepper::value(s0))), S(Vec::Zero(obs.dim())), SS(Mat::Zero(obs.dim(), obs.dim())),
        buf(obs.dim()) {}

  template <class OnStep, class OnLap>
  void run_to(double target, OnStep&& on_step, OnLap&& on_lap) {
    while (t < target) {
      const double x = Stepper::value(state);
      const double to_lap = h - u;
      const double to_target = target - t;
      double delta = dt;
      bool lap_end = false, at_target = false;
      if (to_lap <= delta) {
        delta = to_lap;
        lap_end = true;
      }
      if (to_target <= delta) {
        delta = to_target;
        at_target = true;
        lap_end = to_target == to_lap;
      }
      if (!v.is_zero()) {
        v(x, u, buf.data());
        SS.noalias() += (S * buf.transpose()) * delta;
        SS.noalias() += (buf * buf.transpose()) * (0.5 * delta * delta);
        S += buf * delta;
      }
      t = at_target ? target : t + delta;
      on_step();
      if (lap_end) {
        on_lap(x);
        stepper.advance(state);
        u = 0.0;
        h = spec.h(Stepper::value(state));
        ++laps;
      } else {
        u += delta;
      }
    }
  }
  void run_to(double target) {
    run_to(target, [] {}, [](double) {});
  }
};

void check_dt(const SuspensionSpec& spec, double dt) {
  if (!(dt > 0.0) || dt > spec.inf_h / 10.0)
    throw ConfigError("dt: flow substep must lie in (0, inf h / 10]");
}

double resolve_dt(const SuspensionSpec& spec, double dt) {
  const double r = dt > 0.0 ? dt : spec.inf_h / 50.0;
  check_dt(spec, r);
  return r;
}

// int f dmu over the base; tower quadrature for LSV, Ulam density otherwise.
class BaseIntegrator {
 public:
  explicit BaseIntegrator(const MapSpec& spec) : spec_(spec) {
    if (spec.kind == MapKind::kLsv) {
      const TowerOptions opt;
      tower_ = std::make_unique<TowerModel>(InducedScheme::build(spec, opt.tau_cap), opt);
    } else {
      density_ = std::make_unique<DensityEstimate>(invariant_density_ulam(spec, kCenteringBins));
    }
  }
  double operator()(const std::function<double(double)>& f) const {
    if (density_) return density_->integrate(f);
    const Observable o = Observable::custom("f", 1, [&f](double x, double* out) { out[0] = f(x); });
    return tower_mean(*tower_, o)[0];
  }

 private:
  MapSpec spec_;
  std::unique_ptr<TowerModel> tower_;
  std::unique_ptr<DensityEstimate> density_;
};

double fit_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t n = t.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(t[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(t[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(t[i]) - mx) * (std::log(t[i]) - mx);
  }
  return sxy / sxx;
}

void check_t1_grid(const std::vector<double>& g) {
  if (g.size() < 2 || !std::is_sorted(g.begin(), g.end()) || !(g.front() > 0.0))
    throw ConfigError("t1 grid: need at least two increasing positive times");
}

}  // namespace

std::size_t lap_number(const SuspensionSpec& spec, const FlowState& s, double t) {
  double r = s.u + t;
  double x = s.x;
  std::size_t n = 0;
  for (double h = spec.h(x); r >= h; h = spec.h(x)) {
    r -= h;
    x = apply_map(spec.base, x);
    ++n;
  }
  return n;
}

FlowState flow(const SuspensionSpec& spec, const FlowState& s, double t) {
  double r = s.u + t;
  double x = s.x;
  for (double h = spec.h(x); r >= h; h = spec.h(x)) {
    r -= h;
    x = apply_map(spec.base, x);
  }
  return {x, r};
}

FlowObservable FlowObservable::zero() {
  FlowObservable o;
  o.name_ = "zero";
  o.dim_ = 1;
  o.zero_ = true;
  o.offset_ = Vec::Zero(1);
  o.raw_ = std::make_shared<const RawFn>([](double, double, double* out) { out[0] = 0.0; });
  return o;
}

FlowObservable FlowObservable::constant(const Vec& c) {
  FlowObservable o = custom("constant", static_cast<int>(c.size()),
                            [c](double, double, double* out) {
                              for (Eigen::Index i = 0; i < c.size(); ++i) out[i] = c[i];
                            });
  return o;
}

FlowObservable FlowObservable::custom(std::string name, int dim, RawFn raw) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("flow observable: dimension must be in [1, 4]");
  FlowObservable o;
  o.name_ = std::move(name);
  o.dim_ = dim;
  o.zero_ = false;
  o.offset_ = Vec::Zero(dim);
  o.raw_ = std::make_shared<const RawFn>(std::move(raw));
  return o;
}

FlowObservable FlowObservable::preset(const std::string& name) {
  constexpr double tau = 2.0 * M_PI;
  if (name == "zero") return zero();
  if (name == "cos")
    return custom(name, 1, [](double x, double, double* o) { o[0] = std::cos(tau * x); });
  if (name == "cos_sin")
    return custom(name, 2, [](double x, double, double* o) {
      o[0] = std::cos(tau * x);
      o[1] = std::sin(tau * x);
    });
  if (name == "sin_u") return custom(name, 1, [](double, double u, double* o) { o[0] = std::sin(u); });
  if (name == "u") return custom(name, 1, [](double, double u, double* o) { o[0] = u; });
  if (name == "cos_u")
    return custom(name, 2, [](double x, double u, double* o) {
      o[0] = std::cos(tau * x);
      o[1] = u;
    });
  throw ConfigError("flow observable: unknown preset '" + name + "'");
}

FlowObservable FlowObservable::with_offset(const Vec& c) const {
  if (c.size() != dim_) throw ConfigError("flow observable: offset dimension mismatch");
  FlowObservable o = *this;
  o.offset_ = c;
  if (zero_ && c.cwiseAbs().maxCoeff() > 0.0) o.zero_ = false;
  return o;
}

const FiberRule& FiberRule::get() {
  static const FiberRule rule = [] {
    using G = boost::math::quadrature::gauss<double, 16>;
    FiberRule r{};
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    // abscissae are the 8 nonnegative nodes on [-1, 1]
    for (std::size_t k = 0; k < 8; ++k) {
      r.node[7 - k] = 0.5 * (1.0 - a[k]);
      r.node[8 + k] = 0.5 * (1.0 + a[k]);
      r.weight[7 - k] = 0.5 * w[k];
      r.weight[8 + k] = 0.5 * w[k];
    }
    return r;
  }();
  return rule;
}

Vec induce_v(const SuspensionSpec& spec, const FlowObservable& v, double x) {
  const FiberRule& rule = FiberRule::get();
  const double h = spec.h(x);
  Vec sum = Vec::Zero(v.dim());
  Vec buf(v.dim());
  for (std::size_t k = 0; k < 16; ++k) {
    v(x, h * rule.node[k], buf.data());
    sum += rule.weight[k] * buf;
  }
  return h * sum;
}

Observable induced_observable(const SuspensionSpec& spec, const FlowObservable& v) {
  if (v.is_zero()) return Observable::zero();
  return Observable::custom("tilde_" + v.name(), v.dim(), [spec, v](double x, double* out) {
    const Vec r = induce_v(spec, v, x);
    for (Eigen::Index i = 0; i < r.size(); ++i) out[i] = r[i];
  });
}

FlowObservable center_flow(const SuspensionSpec& spec, const FlowObservable& v) {
  if (v.is_zero()) return v;
  const FlowObservable raw = v.with_offset(Vec::Zero(v.dim()));
  return raw.with_offset(invariant_mean(induced_observable(spec, raw), spec.base) / spec.h_bar);
}

std::vector<FlowSample> flow_iterated_integrals(const SuspensionSpec& spec, const FlowObservable& v,
                                                const FlowState& s, double t1, double dt,
                                                const std::vector<double>& record) {
  check_dt(spec, dt);
  if (!(t1 >= 0.0)) throw ConfigError("t1: flow time must be nonnegative");
  if (!std::is_sorted(record.begin(), record.end()) ||
      (!record.empty() && (record.front() < 0.0 || record.back() > t1)))
    throw ConfigError("record: times must be sorted and lie in [0, t1]");
  const MapStepper stepper{spec.base};
  FlowWalker<MapStepper> walk(stepper, spec, v, dt, {s.x}, s.u);
  std::vector<FlowSample> out;
  for (double r : record) {
    walk.run_to(r);
    out.push_back({r, walk.S, walk.SS});
  }
  walk.run_to(t1);
  if (record.empty() || record.back() < t1) out.push_back({t1, walk.S, walk.SS});
  return out;
}

FlowInducedPair flow_vs_induced(const SuspensionSpec& spec, const FlowObservable& v,
                                const FlowState& s, double t, double dt) {
  check_dt(spec, dt);
  const MapStepper stepper{spec.base};
  FlowWalker<MapStepper> walk(stepper, spec, v, dt, {s.x}, s.u);
  FlowInducedPair out;
  out.S_induced = Vec::Zero(v.dim());
  walk.run_to(t, [] {}, [&](double x) { out.S_induced += induce_v(spec, v, x); });
  out.S = walk.S;
  out.laps = walk.laps;
  return out;
}

Mat e_prime(const SuspensionSpec& spec, const FlowObservable& v) {
  const int d = v.dim();
  Mat out = Mat::Zero(d, d);
  if (v.is_zero()) return out;
  const FiberRule& rule = FiberRule::get();
  // fiber integral int_0^h H (x) v du with H(x, u) = int_0^u v(x, s) ds
  auto fiber = [&](double x) {
    const double h = spec.h(x);
    Mat acc = Mat::Zero(d, d);
    Vec vu(d), vs(d), H(d);
    for (std::size_t k = 0; k < 16; ++k) {
      const double u = h * rule.node[k];
      H.setZero();
      for (std::size_t l = 0; l < 16; ++l) {
        v(x, u * rule.node[l], vs.data());
        H += rule.weight[l] * vs;
      }
      H *= u;
      v(x, u, vu.data());
      acc += (h * rule.weight[k]) * (H * vu.transpose());
    }
    return acc;
  };
  const BaseIntegrator integrate(spec.base);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out(i, j) = integrate([&](double x) { return fiber(x)(i, j); });
  return out / spec.h_bar;
}

FlowCoefficients flow_coeffs(const SuspensionSpec& spec, const FlowObservable& v,
                             const TowerOptions& topt) {
  FlowCoefficients c;
  c.h_bar = spec.h_bar;
  const int d = v.dim();
  if (v.is_zero()) {
    c.Sigma = c.E = c.Sigma_se = c.E_se = c.E_prime = Mat::Zero(d, d);
    c.cov_target = c.drift_target = c.cov_se = c.drift_se = Mat::Zero(d, d);
    return c;
  }
  const CoefficientEstimate est = martingale_coeffs(spec.base, induced_observable(spec, v), topt);
  c.Sigma = est.Sigma;
  c.E = est.E;
  c.Sigma_se = est.Sigma_se;
  c.E_se = est.E_se;
  c.E_prime = e_prime(spec, v);
  c.cov_target = c.Sigma / spec.h_bar;
  c.drift_target = c.E / spec.h_bar + c.E_prime;
  c.cov_se = c.Sigma_se / spec.h_bar;
  c.drift_se = c.E_se / spec.h_bar;
  return c;
}

std::vector<FlowSample> sampled_flow_trajectory(const SuspensionSpec& spec, const FlowObservable& v,
                                                const std::vector<double>& record,
                                                const FlowRunOptions& opt) {
  if (!std::is_sorted(record.begin(), record.end()) || (!record.empty() && record.front() < 0.0))
    throw ConfigError("record: times must be sorted and nonnegative");
  const double dt = resolve_dt(spec, opt.dt);
  return with_stepper(spec.base, [&](const auto& stepper) {
    double u = 0.0;
    auto s0 = sample_flow_start(stepper, spec, opt.seed, 0, opt.initial, opt.burnin, &u);
    FlowWalker walk(stepper, spec, v, dt, s0, u);
    std::vector<FlowSample> out;
    for (double r : record) {
      walk.run_to(r);
      out.push_back({r, walk.S, walk.SS});
    }
    return out;
  });
}

PathEnsemble flow_paths(const SuspensionSpec& spec, const FlowObservable& v, double T,
                        std::size_t samples, const std::vector<double>& grid,
                        const FlowRunOptions& opt) {
  if (!(T >= 1.0)) throw ConfigError("T: flow time scale must be at least 1");
  if (grid.empty() || !std::is_sorted(grid.begin(), grid.end()) || grid.front() < 0.0 ||
      grid.back() > 1.0)
    throw ConfigError("grid: times must be sorted and lie in [0, 1]");
  const double dt = resolve_dt(spec, opt.dt);
  const int d = v.dim();
  const std::size_t G = grid.size(), ud = static_cast<std::size_t>(d);
  const double inv_sqrt_T = 1.0 / std::sqrt(T), inv_T = 1.0 / T;
  PathEnsemble ens;
  ens.provenance = {"suspension:" + spec.base.name() + "/" + spec.roof.name, "flow:" + v.name(),
                    static_cast<std::size_t>(std::llround(T)), opt.seed, opt.initial};
  ens.grid = grid;
  ens.d = d;
  ens.paths = samples;
  ens.W.assign(samples * G * ud, 0.0);
  ens.WW.assign(samples * G * ud * ud, 0.0);
  ens.Q.assign(samples * G * ud * ud, 0.0);
  parallel_blocks(samples, 16, resolve_workers(opt.workers), [&](std::size_t b, std::size_t e) {
    with_stepper(spec.base, [&](const auto& stepper) {
      for (std::size_t p = b; p < e; ++p) {
        double u = 0.0;
        auto s0 = sample_flow_start(stepper, spec, opt.seed, p, opt.initial, opt.burnin, &u);
        FlowWalker walk(stepper, spec, v, dt, s0, u);
        for (std::size_t g = 0; g < G; ++g) {
          walk.run_to(grid[g] * T);
          const std::size_t base = p * G + g;
          for (int i = 0; i < d; ++i) {
            ens.W[base * ud + static_cast<std::size_t>(i)] = walk.S[i] * inv_sqrt_T;
            for (int j = 0; j < d; ++j)
              ens.WW[base * ud * ud + static_cast<std::size_t>(i * d + j)] = walk.SS(i, j) * inv_T;
          }
        }
      }
    });
  });
  return ens;
}

LapLawResult lap_law(const SuspensionSpec& spec, double t, std::size_t samples,
                     const RunOptions& opt) {
  if (!(t >= 1.0)) throw ConfigError("t: lap law needs t >= 1");
  if (samples < 2) throw ConfigError("samples: need at least two states");
  std::vector<double> ratio(samples);
  parallel_blocks(samples, 64, resolve_workers(opt.workers), [&](std::size_t b, std::size_t e) {
    with_stepper(spec.base, [&](const auto& stepper) {
      for (std::size_t p = b; p < e; ++p) {
        double u = 0.0;
        auto state = sample_flow_start(stepper, spec, opt.seed, p, opt.initial, opt.burnin, &u);
        double r = u + t;
        std::size_t n = 0;
        for (double h = spec.h(stepper.value(state)); r >= h; h = spec.h(stepper.value(state))) {
          r -= h;
          stepper.advance(state);
          ++n;
        }
        ratio[p] = static_cast<double>(n) / t;
      }
    });
  });
  LapLawResult res;
  res.t = t;
  res.target = 1.0 / spec.h_bar;
  const double m = std::accumulate(ratio.begin(), ratio.end(), 0.0) / static_cast<double>(samples);
  double ss = 0.0;
  for (double r : ratio) ss += (r - m) * (r - m);
  res.mean = m;
  res.std_err = std::sqrt(ss / static_cast<double>(samples - 1) / static_cast<double>(samples));
  res.max_ratio = *std::max_element(ratio.begin(), ratio.end()) / (1.0 / spec.inf_h + 1.0);
  return res;
}

GrowthFit lap_deviation_growth(const SuspensionSpec& spec, const std::vector<double>& t1_grid,
                               std::size_t samples, const RunOptions& opt) {
  check_t1_grid(t1_grid);
  const std::size_t G = t1_grid.size();
  const double rate = 1.0 / spec.h_bar;
  std::vector<double> sup(samples * G);
  parallel_blocks(samples, 16, resolve_workers(opt.workers), [&](std::size_t b, std::size_t e) {
    with_stepper(spec.base, [&](const auto& stepper) {
      for (std::size_t p = b; p < e; ++p) {
        double u = 0.0;
        auto state = sample_flow_start(stepper, spec, opt.seed, p, opt.initial, opt.burnin, &u);
        // crossing k happens at s_k; N jumps from k - 1 to k there
        double s = spec.h(stepper.value(state)) - u;
        double k = 1.0, best = 0.0;
        for (std::size_t g = 0; g < G; ++g) {
          const double t1 = t1_grid[g];
          while (s <= t1) {
            best = std::max({best, std::abs(k - 1.0 - s * rate), std::abs(k - s * rate)});
            stepper.advance(state);
            s += spec.h(stepper.value(state));
            k += 1.0;
          }
          sup[p * G + g] = std::max(best, std::abs(k - 1.0 - t1 * rate));
        }
      }
    });
  });
  GrowthFit fit;
  fit.t1 = t1_grid;
  for (std::size_t g = 0; g < G; ++g) {
    double m2 = 0.0;
    for (std::size_t p = 0; p < samples; ++p) m2 += sup[p * G + g] * sup[p * G + g];
    fit.value.push_back(std::sqrt(m2 / static_cast<double>(samples)));
  }
  fit.slope = fit_slope(fit.t1, fit.value);
  return fit;
}

GrowthFit flow_moment_growth(const SuspensionSpec& spec, const FlowObservable& v,
                             const std::vector<double>& t1_grid, std::size_t samples,
                             const FlowRunOptions& opt) {
  check_t1_grid(t1_grid);
  if (v.is_zero()) throw DomainError("flow_moment_growth: zero observable has no growth exponent");
  const double dt = resolve_dt(spec, opt.dt);
  const std::size_t G = t1_grid.size();
  std::vector<double> sup(samples * G);
  parallel_blocks(samples, 16, resolve_workers(opt.workers), [&](std::size_t b, std::size_t e) {
    with_stepper(spec.base, [&](const auto& stepper) {
      for (std::size_t p = b; p < e; ++p) {
        double u = 0.0;
        auto s0 = sample_flow_start(stepper, spec, opt.seed, p, opt.initial, opt.burnin, &u);
        FlowWalker walk(stepper, spec, v, dt, s0, u);
        double best = 0.0;
        for (std::size_t g = 0; g < G; ++g) {
          walk.run_to(t1_grid[g], [&] { best = std::max(best, walk.S.squaredNorm()); },
                      [](double) {});
          sup[p * G + g] = std::sqrt(best);
        }
      }
    });
  });
  GrowthFit fit;
  fit.t1 = t1_grid;
  for (std::size_t g = 0; g < G; ++g) {
    double m2 = 0.0;
    for (std::size_t p = 0; p < samples; ++p) m2 += sup[p * G + g] * sup[p * G + g];
    fit.value.push_back(std::sqrt(m2 / static_cast<double>(samples)));
  }
  fit.slope = fit_slope(fit.t1, fit.value);
  return fit;
}

TestReport flow_wip_check(const SuspensionSpec& spec, const FlowObservable& v,
                          const FlowCoefficients& coeffs, double T, std::size_t samples,
                          const FlowRunOptions& opt, PathEnsemble* ensemble) {
  if (samples < 1000) throw ConfigError("samples: flow WIP check needs at least 1000 states");
  TestReport rep;
  rep.title = "flow_wip_check";

  const LapLawResult lap = lap_law(spec, T, samples, opt);
  std::ostringstream ts;
  ts << T;
  TestEntry e;
  e.name = "lap_mean@" + ts.str();
  e.estimate = lap.mean;
  e.target = lap.target;
  e.std_err = lap.std_err;
  e.statistic = lap.std_err > 0.0 ? std::abs(lap.mean - lap.target) / lap.std_err : 0.0;
  e.p_value = z_p_value(e.statistic);
  e.passed = std::abs(lap.mean - lap.target) <= rep.z_limit * lap.std_err + 1e-12;
  rep.entries.push_back(e);
  TestEntry bound;
  bound.name = "lap_bound@" + ts.str();
  bound.estimate = lap.max_ratio;
  bound.target = 1.0;
  bound.passed = lap.max_ratio <= 1.0;
  bound.note = "max N(t) / (((inf h)^-1 + 1) t)";
  rep.entries.push_back(bound);

  PathEnsemble ens = flow_paths(spec, v, T, samples, uniform_grid(4), opt);
  TestReport normal = marginal_normality(ens, coeffs.cov_target, coeffs.cov_se);
  TestReport drift = drift_check(ens, coeffs.drift_target, coeffs.drift_se);
  rep.append(normal);
  rep.append(drift);
  if (ensemble) *ensemble = std::move(ens);
  return rep;
}

void write_flow_csv(std::ostream& os, const std::vector<FlowSample>& path) {
  const int d = path.empty() ? 1 : static_cast<int>(path.front().S.size());
  std::vector<std::string> header{"t"};
  for (int i = 0; i < d; ++i) header.push_back("S" + std::to_string(i));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) header.push_back("SS" + std::to_string(i) + std::to_string(j));
  CsvWriter csv(os, header);
  for (const FlowSample& s : path) {
    csv.cell(s.t);
    for (int i = 0; i < d; ++i) csv.cell(s.S[i]);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) csv.cell(s.SS(i, j));
    csv.end_row();
  }
}

}  // namespace homog
