#include "homog/fastslow.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "homog/errors.hpp"
#include "homog/parallel.hpp"
#include "homog/rng.hpp"
#include "homog/sampling.hpp"
#include "homog/stat_tests.hpp"
#include "homog/tower.hpp"

namespace homog {

SlowPreset parse_slow_preset(const std::string& text) {
  SlowPreset p;
  const auto open = text.find('(');
  p.name = text.substr(0, open);
  if (open != std::string::npos) {
    const auto close = text.find(')', open);
    if (close == std::string::npos) throw ConfigError("preset '" + text + "': missing ')'");
    std::stringstream ss(text.substr(open + 1, close - open - 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        p.params.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError("preset '" + text + "': parameter '" + item + "' is not a number");
      }
    }
  }
  const bool known = p.name == "zero" || p.name == "additive" || p.name == "product" ||
                     p.name == "linear";
  if (!known) throw ConfigError("unknown slow-variable preset '" + p.name + "'");
  if (p.name == "linear" && p.params.size() != 1)
    throw ConfigError("preset linear(c) takes exactly one parameter");
  return p;
}

namespace {

// a(x, y) = drift(x); b(x, y) = noise(x, v(y)). Every preset's b depends on
// x only through the matching coordinate x_i, so its y-mean can be tabulated
// on a scalar grid.
using DriftFn = std::function<void(const double*, double*)>;
using NoiseFn = std::function<void(const double*, const double*, double*)>;

DriftFn make_drift(const SlowPreset& p, int d) {
  if (p.name == "zero") return [d](const double*, double* out) { std::fill_n(out, d, 0.0); };
  if (p.name == "linear") {
    const double c = p.params.at(0);
    return [d, c](const double* x, double* out) {
      for (int i = 0; i < d; ++i) out[i] = c * x[i];
    };
  }
  throw ConfigError("preset '" + p.name + "' is not a drift preset");
}

NoiseFn make_noise(const SlowPreset& p, int d) {
  if (p.name == "zero")
    return [d](const double*, const double*, double* out) { std::fill_n(out, d, 0.0); };
  if (p.name == "additive")
    return [d](const double*, const double* vy, double* out) { std::copy_n(vy, d, out); };
  if (p.name == "product")
    return [d](const double* x, const double* vy, double* out) {
      for (int i = 0; i < d; ++i) out[i] = x[i] * vy[i];
    };
  throw ConfigError("preset '" + p.name + "' is not a noise preset");
}

void check_spec(const FastSlowSpec& fs) {
  if (fs.d < 1 || fs.d > kMaxDim) throw ConfigError("d: slow dimension must be in [1, 4]");
  if (fs.xi.size() != fs.d) throw ConfigError("xi: initial state must have d components");
  if (fs.noise.name != "zero" && fs.v.dim() != fs.d)
    throw ConfigError("observable: noise presets need a fast observable of dimension d");
}

// Offsets below this size are quadrature noise of an already centered
// observable and are not applied.
constexpr double kOffsetFloor = 1e-12;

}  // namespace

Vec NoiseCentering::at(const Vec& x) const {
  Vec out(x.size());
  if (grid.empty()) return Vec::Zero(x.size());
  const double lo = grid.front(), hi = grid.back();
  const double step = (hi - lo) / static_cast<double>(grid.size() - 1);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double pos = std::clamp((x[i] - lo) / step, 0.0, static_cast<double>(grid.size() - 1));
    const auto k = std::min(static_cast<std::size_t>(pos), grid.size() - 2);
    const double f = pos - static_cast<double>(k);
    out[i] = (1.0 - f) * offset[k][i] + f * offset[k + 1][i];
  }
  return out;
}

NoiseCentering center_noise(const FastSlowSpec& fs, const MapSpec& spec) {
  check_spec(fs);
  NoiseCentering c;
  if (fs.noise.name == "zero") return c;
  const Vec mean_v = invariant_mean(fs.v, spec);
  const NoiseFn noise = make_noise(fs.noise, fs.d);
  constexpr std::size_t kGrid = 64;
  for (std::size_t g = 0; g < kGrid; ++g) {
    const double xg = fs.center_lo + (fs.center_hi - fs.center_lo) * static_cast<double>(g) /
                                         static_cast<double>(kGrid - 1);
    const Vec x = Vec::Constant(fs.d, xg);
    Vec off(fs.d);
    noise(x.data(), mean_v.data(), off.data());
    c.grid.push_back(xg);
    c.offset.push_back(off);
    c.max_abs_offset = std::max(c.max_abs_offset, off.cwiseAbs().maxCoeff());
  }
  return c;
}

PathEnsemble simulate_fastslow(const FastSlowSpec& fs, const MapSpec& spec, std::size_t n,
                               std::size_t samples, const std::vector<double>& grid,
                               const RunOptions& opt) {
  check_spec(fs);
  if (n < 100) throw ConfigError("n: fast-slow simulation needs n >= 100");
  if (grid.empty() || !std::is_sorted(grid.begin(), grid.end()) || grid.front() < 0.0 ||
      grid.back() > 1.0)
    throw ConfigError("grid: times must be sorted and lie in [0, 1]");
  const int d = fs.d;
  const std::size_t G = grid.size(), ud = static_cast<std::size_t>(d);
  const DriftFn drift = make_drift(fs.drift, d);
  const NoiseFn noise = make_noise(fs.noise, d);
  const NoiseCentering centering = center_noise(fs, spec);
  const bool apply_offset = centering.max_abs_offset > kOffsetFloor;

  std::vector<std::size_t> checkpoints(G);
  for (std::size_t g = 0; g < G; ++g)
    checkpoints[g] = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * grid[g]));
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

  std::vector<double> xs(samples * G * ud);
  std::vector<char> bad(samples, 0);
  const Observable v = fs.noise.name == "zero" ? Observable::zero() : fs.v;

  parallel_blocks(samples, 16, resolve_workers(opt.workers), [&](std::size_t b, std::size_t e) {
    with_stepper(spec, [&](const auto& stepper) {
      with_evaluator(v, [&](const auto& eval) {
        std::array<double, kMaxDim> vy{}, a{}, bn{};
        Vec x(d), A(d), B(d);
        for (std::size_t p = b; p < e; ++p) {
          auto state = start_orbit(stepper, opt.seed, p, opt.initial, opt.burnin);
          A.setZero();
          B.setZero();
          // slow state kept as xi + A/n + B/sqrt(n) with unscaled sums A, B
          auto current = [&] { return Vec(fs.xi + A * inv_n + B * inv_sqrt_n); };
          std::size_t step = 0;
          for (std::size_t g = 0; g < G && !bad[p]; ++g) {
            for (; step < checkpoints[g]; ++step) {
              x = current();
              eval(stepper.value(state), vy.data());
              stepper.advance(state);
              drift(x.data(), a.data());
              noise(x.data(), vy.data(), bn.data());
              if (apply_offset) {
                const Vec off = centering.at(x);
                for (int i = 0; i < d; ++i) bn[static_cast<std::size_t>(i)] -= off[i];
              }
              for (int i = 0; i < d; ++i) {
                A[i] += a[static_cast<std::size_t>(i)];
                B[i] += bn[static_cast<std::size_t>(i)];
              }
            }
            x = current();
            if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e12) {
              bad[p] = 1;
              break;
            }
            for (int i = 0; i < d; ++i) xs[(p * G + g) * ud + static_cast<std::size_t>(i)] = x[i];
          }
        }
      });
    });
  });

  PathEnsemble ens;
  ens.provenance = {spec.name(), "fastslow:" + fs.drift.name + "/" + fs.noise.name + "/" + v.name(),
                    n, opt.seed, opt.initial};
  ens.grid = grid;
  ens.d = d;
  for (std::size_t p = 0; p < samples; ++p) {
    if (bad[p]) {
      ++ens.divergent;
      continue;
    }
    ens.W.insert(ens.W.end(), xs.begin() + static_cast<std::ptrdiff_t>(p * G * ud),
                 xs.begin() + static_cast<std::ptrdiff_t>((p + 1) * G * ud));
    ++ens.paths;
  }
  ens.WW.assign(ens.paths * G * ud * ud, 0.0);
  ens.Q.assign(ens.paths * G * ud * ud, 0.0);
  return ens;
}

SDESpec SDESpec::linear_additive(const Vec& xi, double c, const Mat& Sigma, double h) {
  SDESpec s;
  s.d = static_cast<int>(xi.size());
  if (Sigma.rows() != s.d || Sigma.cols() != s.d)
    throw ConfigError("Sigma: dimension does not match xi");
  s.xi = xi;
  s.h = h;
  s.noise_dim = s.d;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(0.5 * (Sigma + Sigma.transpose())));
  if (eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff()))
    throw ConfigError("Sigma: diffusion matrix is not positive semidefinite");
  const Eigen::MatrixXd root = eig.eigenvectors() *
                               eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                               eig.eigenvectors().transpose();
  const Mat sigma = root;
  s.drift = [c](const Vec& x) { return Vec(c * x); };
  s.diffusion = [sigma](const Vec&) { return sigma; };
  std::ostringstream note;
  note << "additive noise, drift " << c << " x, no stochastic-integral correction";
  s.note = note.str();
  return s;
}

PathEnsemble euler_maruyama(const SDESpec& sde, double t1, std::size_t samples,
                            const std::vector<double>& grid, const RunOptions& opt) {
  if (!(sde.h > 0.0) || sde.h > 1e-2) throw ConfigError("h: Euler-Maruyama step must be in (0, 1e-2]");
  if (!(t1 > 0.0)) throw ConfigError("t1: horizon must be positive");
  if (sde.xi.size() != sde.d) throw ConfigError("xi: initial state must have d components");
  if (grid.empty() || !std::is_sorted(grid.begin(), grid.end()) || grid.front() < 0.0 ||
      grid.back() > 1.0)
    throw ConfigError("grid: times must be sorted and lie in [0, 1]");
  const auto steps = static_cast<std::size_t>(std::llround(t1 / sde.h));
  const double h = t1 / static_cast<double>(steps);
  const double sqrt_h = std::sqrt(h);
  const std::size_t G = grid.size(), ud = static_cast<std::size_t>(sde.d);
  std::vector<std::size_t> checkpoints(G);
  for (std::size_t g = 0; g < G; ++g)
    checkpoints[g] = static_cast<std::size_t>(std::ceil(static_cast<double>(steps) * grid[g] - 1e-9));

  std::vector<double> xs(samples * G * ud);
  std::vector<char> bad(samples, 0);
  parallel_blocks(samples, 16, resolve_workers(opt.workers), [&](std::size_t b, std::size_t e) {
    Vec z(sde.noise_dim);
    for (std::size_t p = b; p < e; ++p) {
      RngStream rng(opt.seed, p, StreamPurpose::kGaussian);
      std::normal_distribution<double> normal;
      Vec x = sde.xi;
      std::size_t step = 0;
      for (std::size_t g = 0; g < G; ++g) {
        for (; step < checkpoints[g]; ++step) {
          for (int k = 0; k < sde.noise_dim; ++k) z[k] = normal(rng);
          const Vec drift = sde.drift(x);
          const Mat sig = sde.diffusion(x);
          x += drift * h + sig * z * sqrt_h;
        }
        if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e12) {
          bad[p] = 1;
          break;
        }
        for (std::size_t i = 0; i < ud; ++i) xs[(p * G + g) * ud + i] = x[static_cast<Eigen::Index>(i)];
      }
    }
  });

  PathEnsemble ens;
  ens.provenance = {"sde", "euler_maruyama", steps, opt.seed, InitialMeasure::kLebesgue};
  ens.grid = grid;
  ens.d = sde.d;
  for (std::size_t p = 0; p < samples; ++p) {
    if (bad[p]) {
      ++ens.divergent;
      continue;
    }
    ens.W.insert(ens.W.end(), xs.begin() + static_cast<std::ptrdiff_t>(p * G * ud),
                 xs.begin() + static_cast<std::ptrdiff_t>((p + 1) * G * ud));
    ++ens.paths;
  }
  ens.WW.assign(ens.paths * G * ud * ud, 0.0);
  ens.Q.assign(ens.paths * G * ud * ud, 0.0);
  return ens;
}

TestReport homogenization_compare(const PathEnsemble& fast, const PathEnsemble& sde) {
  if (fast.d != sde.d) throw ConfigError("ensembles have different dimensions");
  if (fast.grid != sde.grid) throw ConfigError("ensembles use different time grids");
  if (fast.paths < 2 || sde.paths < 2) throw ConfigError("ensembles need at least two paths");
  TestReport rep;
  rep.title = "homogenization_compare";
  const std::size_t last = fast.grid.size() - 1;
  auto moments = [](const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double s2 = 0.0, s4 = 0.0;
    for (double v : x) {
      s2 += (v - m) * (v - m);
      s4 += std::pow(v - m, 4);
    }
    const double nn = static_cast<double>(x.size());
    const double var = s2 / (nn - 1.0);
    const double m4 = s4 / nn;
    return std::array<double, 3>{m, var, std::sqrt(std::max(0.0, m4 - var * var) / nn)};
  };
  for (int i = 0; i < fast.d; ++i) {
    const std::string si = std::to_string(i);
    TestEntry e;
    e.name = "ks2_x" + si + "@1";
    const KsResult ks = ks_two_sample(fast.w_column(last, i), sde.w_column(last, i));
    e.statistic = ks.statistic;
    e.p_value = ks.p_value;
    e.passed = ks.p_value > rep.significance;
    rep.entries.push_back(e);
    for (std::size_t g = 0; g < fast.grid.size(); ++g) {
      const double t = fast.grid[g];
      if (!(t > 0.0)) continue;
      std::ostringstream ts;
      ts << t;
      const auto a = moments(fast.w_column(g, i)), b = moments(sde.w_column(g, i));
      const double se_mean = std::sqrt(a[1] / static_cast<double>(fast.paths) +
                                       b[1] / static_cast<double>(sde.paths));
      TestEntry m;
      m.name = "mean_x" + si + "@" + ts.str();
      m.estimate = a[0];
      m.target = b[0];
      m.std_err = se_mean;
      m.statistic = se_mean > 0.0 ? std::abs(a[0] - b[0]) / se_mean : 0.0;
      m.p_value = z_p_value(m.statistic);
      m.passed = std::abs(a[0] - b[0]) <= rep.z_limit * se_mean + 1e-12;
      m.gating = g == last;
      rep.entries.push_back(m);
      const double se_var = std::hypot(a[2], b[2]);
      TestEntry v;
      v.name = "var_x" + si + "@" + ts.str();
      v.estimate = a[1];
      v.target = b[1];
      v.std_err = se_var;
      v.statistic = se_var > 0.0 ? std::abs(a[1] - b[1]) / se_var : 0.0;
      v.p_value = z_p_value(v.statistic);
      v.passed = std::abs(a[1] - b[1]) <= rep.z_limit * se_var + 1e-12;
      v.gating = g == last;
      rep.entries.push_back(v);
    }
  }
  return rep;
}

}  // namespace homog
