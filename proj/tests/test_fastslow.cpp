#include <doctest.h>

#include <cmath>
#include <vector>

#include "homog/dynamics.hpp"
#include "homog/errors.hpp"
#include "homog/fastslow.hpp"
#include "homog/observable.hpp"
#include "homog/tower.hpp"
#include "homog/wip.hpp"

using namespace homog;

namespace {

FastSlowSpec scalar_spec(const std::string& drift, const std::string& noise, double xi,
                         const Observable& v = Observable::cosine()) {
  FastSlowSpec fs;
  fs.d = 1;
  fs.drift = parse_slow_preset(drift);
  fs.noise = parse_slow_preset(noise);
  fs.v = v;
  fs.xi = Vec::Constant(1, xi);
  return fs;
}

RunOptions seeded(std::uint64_t seed) {
  RunOptions opt;
  opt.seed = seed;
  return opt;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments(const std::vector<double>& x) {
  Moments m;
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(x.size());
  for (double v : x) m.var += (v - m.mean) * (v - m.mean);
  m.var /= static_cast<double>(x.size() - 1);
  return m;
}

// Standard error of the sample variance from the fourth central moment.
double var_se(const std::vector<double>& x) {
  const Moments m = moments(x);
  double m4 = 0.0;
  for (double v : x) m4 += std::pow(v - m.mean, 4);
  m4 /= static_cast<double>(x.size());
  return std::sqrt((m4 - m.var * m.var) / static_cast<double>(x.size()));
}

}  // namespace

TEST_SUITE("fastslow") {
  TEST_CASE("slow presets parse") {
    const SlowPreset lin = parse_slow_preset("linear(-1.5)");
    CHECK(lin.name == "linear");
    REQUIRE(lin.params.size() == 1);
    CHECK(lin.params[0] == -1.5);
    CHECK(parse_slow_preset("additive").params.empty());
    CHECK_THROWS_AS(parse_slow_preset("cubic"), ConfigError);
    CHECK_THROWS_AS(parse_slow_preset("linear"), ConfigError);
    CHECK_THROWS_AS(parse_slow_preset("linear(1,2)"), ConfigError);
    CHECK_THROWS_AS(parse_slow_preset("linear(x)"), ConfigError);
    CHECK_THROWS_AS(parse_slow_preset("linear(1"), ConfigError);
  }

  TEST_CASE("fast-slow configuration validation") {
    FastSlowSpec fs = scalar_spec("zero", "additive", 0.0);
    fs.xi = Vec::Zero(2);
    CHECK_THROWS_AS(simulate_fastslow(fs, MapSpec::doubling(), 100, 10, {0.0, 1.0}, {}), ConfigError);
    FastSlowSpec bad_drift = scalar_spec("additive", "zero", 0.0);
    CHECK_THROWS_AS(simulate_fastslow(bad_drift, MapSpec::doubling(), 100, 10, {0.0, 1.0}, {}),
                    ConfigError);
    CHECK_THROWS_AS(simulate_fastslow(scalar_spec("zero", "zero", 0.0), MapSpec::doubling(), 99, 10,
                                      {0.0, 1.0}, {}),
                    ConfigError);
  }

  TEST_CASE("no drift and no noise keeps x at xi") {
    const PathEnsemble ens = simulate_fastslow(scalar_spec("zero", "zero", 0.7), MapSpec::lsv(0.25, 3.0),
                                               1000, 20, uniform_grid(4), {});
    CHECK(ens.paths == 20);
    for (double x : ens.W) CHECK(x == 0.7);
  }

  TEST_CASE("linear decay follows the product formula") {
    const std::size_t n = 10000;
    const PathEnsemble ens = simulate_fastslow(scalar_spec("linear(-1)", "zero", 2.0), MapSpec::doubling(),
                                               n, 4, {0.0, 0.5, 1.0}, {});
    const long double one = std::pow(1.0L - 1.0L / n, static_cast<long double>(n));
    const long double half = std::pow(1.0L - 1.0L / n, static_cast<long double>(n / 2));
    for (std::size_t p = 0; p < ens.paths; ++p) {
      CHECK(std::abs(ens.w(p, 2, 0) - 2.0 * static_cast<double>(one)) < 1e-12);
      CHECK(std::abs(ens.w(p, 1, 0) - 2.0 * static_cast<double>(half)) < 1e-12);
    }
    CHECK(std::abs(ens.w(0, 2, 0) - 2.0 * std::exp(-1.0)) < 2.0 / static_cast<double>(n));
  }

  TEST_CASE("additive noise reproduces the W paths bit for bit") {
    const MapSpec spec = MapSpec::doubling();
    const Observable v = Observable::cosine();
    const std::vector<double> grid = uniform_grid(5);
    const PathEnsemble fast = simulate_fastslow(scalar_spec("zero", "additive", 0.0, v), spec, 2000, 100,
                                                grid, seeded(7));
    const PathEnsemble w = sample_paths(spec, v, 2000, 100, grid, seeded(7));
    CHECK(fast.W == w.W);

    const MapSpec lsv = MapSpec::lsv(0.3, 3.0);
    const Observable c = center_observable(Observable::linear(), lsv);
    const PathEnsemble fast_l = simulate_fastslow(scalar_spec("zero", "additive", 0.0, c), lsv, 1000, 50,
                                                  grid, seeded(8));
    const PathEnsemble w_l = sample_paths(lsv, c, 1000, 50, grid, seeded(8));
    CHECK(fast_l.W == w_l.W);
  }

  TEST_CASE("noise centering on the x grid") {
    // product noise with v = x on the doubling map: int x v(y) dmu = x / 2
    const FastSlowSpec fs = scalar_spec("zero", "product", 1.0, Observable::linear());
    const NoiseCentering c = center_noise(fs, MapSpec::doubling());
    REQUIRE(c.grid.size() == 64);
    CHECK(c.grid.front() == -4.0);
    CHECK(c.grid.back() == 4.0);
    for (std::size_t g = 0; g < c.grid.size(); ++g)
      CHECK(std::abs(c.offset[g][0] - 0.5 * c.grid[g]) < 1e-10);
    CHECK(c.max_abs_offset == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(c.at(Vec::Constant(1, 1.3))[0] == doctest::Approx(0.65).epsilon(1e-10));

    // an already centered observable needs no offset
    const NoiseCentering z = center_noise(scalar_spec("zero", "additive", 0.0), MapSpec::doubling());
    CHECK(z.max_abs_offset < 1e-12);
  }

  TEST_CASE("exploding paths are dropped and counted") {
    const PathEnsemble ens = simulate_fastslow(scalar_spec("linear(50)", "zero", 1.0), MapSpec::doubling(),
                                               1000, 10, {0.0, 0.5, 1.0}, {});
    CHECK(ens.divergent == 10);
    CHECK(ens.paths == 0);
  }

  TEST_CASE("Euler-Maruyama on the decay ODE") {
    const SDESpec sde = SDESpec::linear_additive(Vec::Constant(1, 1.0), -1.0, Mat::Zero(1, 1), 1e-3);
    const PathEnsemble ens = euler_maruyama(sde, 1.0, 5, {0.0, 1.0}, {});
    for (std::size_t p = 0; p < ens.paths; ++p)
      CHECK(std::abs(ens.w(p, 1, 0) - std::exp(-1.0)) <= 10.0 * sde.h);
    CHECK(ens.w(0, 1, 0) == doctest::Approx(std::pow(1.0 - 1e-3, 1000)).epsilon(1e-12));
  }

  TEST_CASE("Euler-Maruyama guards") {
    SDESpec sde = SDESpec::linear_additive(Vec::Constant(1, 0.0), 0.0, Mat::Identity(1, 1), 2e-2);
    CHECK_THROWS_AS(euler_maruyama(sde, 1.0, 10, {0.0, 1.0}, {}), ConfigError);
    sde.h = 0.0;
    CHECK_THROWS_AS(euler_maruyama(sde, 1.0, 10, {0.0, 1.0}, {}), ConfigError);
    Mat neg(2, 2);
    neg << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(SDESpec::linear_additive(Vec::Zero(2), 0.0, neg, 1e-3), ConfigError);
    CHECK_THROWS_AS(SDESpec::linear_additive(Vec::Zero(1), 0.0, neg, 1e-3), ConfigError);
    CHECK(SDESpec::linear_additive(Vec::Zero(1), -1.0, Mat::Identity(1, 1), 1e-3).note.find("no stochastic-integral correction") !=
          std::string::npos);
  }

  TEST_CASE("Euler-Maruyama with constant diffusion is exactly Gaussian") {
    Mat sigma(2, 2);
    sigma << 0.5, 0.2, 0.2, 0.3;
    Vec xi(2);
    xi << 1.0, -1.0;
    const SDESpec sde = SDESpec::linear_additive(xi, 0.0, sigma, 1e-2);
    const PathEnsemble ens = euler_maruyama(sde, 1.0, 20000, {0.0, 1.0}, seeded(4));
    const std::vector<double> a = ens.w_column(1, 0), b = ens.w_column(1, 1);
    const Moments ma = moments(a), mb = moments(b);
    CHECK(std::abs(ma.mean - 1.0) <= 3.0 * std::sqrt(0.5 / 20000.0));
    CHECK(std::abs(mb.mean + 1.0) <= 3.0 * std::sqrt(0.3 / 20000.0));
    CHECK(std::abs(ma.var - 0.5) <= 3.0 * var_se(a));
    CHECK(std::abs(mb.var - 0.3) <= 3.0 * var_se(b));
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) prod[i] = (a[i] - ma.mean) * (b[i] - mb.mean);
    const Moments mp = moments(prod);
    CHECK(std::abs(mp.mean - 0.2) <= 3.0 * std::sqrt(mp.var / static_cast<double>(prod.size())));
  }

  TEST_CASE("Euler-Maruyama reproduces the OU variance") {
    const double h = 1e-3;
    const SDESpec sde = SDESpec::linear_additive(Vec::Constant(1, 0.0), -1.0, Mat::Constant(1, 1, 2.0), h);
    const PathEnsemble ens = euler_maruyama(sde, 1.0, 20000, {0.0, 1.0}, seeded(5));
    const std::vector<double> x = ens.w_column(1, 0);
    const double target = 1.0 - std::exp(-2.0);
    CHECK(std::abs(moments(x).var - target) <= 3.0 * var_se(x) + 2.0 * h);
  }

  TEST_CASE("deterministic limit: error of order 1/n") {
    const SDESpec sde = SDESpec::linear_additive(Vec::Constant(1, 1.0), -1.0, Mat::Zero(1, 1), 1e-6);
    const std::vector<double> grid = uniform_grid(4);
    const PathEnsemble ode = euler_maruyama(sde, 1.0, 1, grid, {});
    std::vector<double> scaled;
    for (std::size_t n : {1000u, 10000u}) {
      const PathEnsemble fast = simulate_fastslow(scalar_spec("linear(-1)", "zero", 1.0), MapSpec::doubling(),
                                                  n, 1, grid, {});
      double dev = 0.0;
      for (std::size_t g = 0; g < grid.size(); ++g)
        dev = std::max(dev, std::abs(fast.w(0, g, 0) - ode.w(0, g, 0)));
      scaled.push_back(dev / (1.0 / static_cast<double>(n) + sde.h));
    }
    CHECK(scaled[0] < 1.0);
    CHECK(scaled[1] < 1.0);
    CHECK(scaled[1] == doctest::Approx(scaled[0]).epsilon(0.5));
  }

  TEST_CASE("fast-slow OU matches the Euler-Maruyama OU") {
    // a(x) = -x, b = cos 2 pi y on the doubling map; Sigma = 1/2, no correction
    const std::vector<double> grid = uniform_grid(4);
    const FastSlowSpec fs = scalar_spec("linear(-1)", "additive", 1.0);
    const SDESpec sde = SDESpec::linear_additive(fs.xi, -1.0, Mat::Constant(1, 1, 0.5), 1e-3);
    int ok = 0;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const PathEnsemble fast = simulate_fastslow(fs, MapSpec::doubling(), 10000, 4000, grid, seeded(seed));
      const PathEnsemble ref = euler_maruyama(sde, 1.0, 4000, grid, seeded(seed + 50));
      const TestReport rep = homogenization_compare(fast, ref);
      CHECK(rep.entry("ks2_x0@1").p_value >= 0.0);
      CHECK_FALSE(rep.entry("mean_x0@0.5").gating);
      ok += rep.passed();
    }
    CHECK(ok >= 2);
  }

  TEST_CASE("comparison guards") {
    const SDESpec sde = SDESpec::linear_additive(Vec::Zero(1), -1.0, Mat::Identity(1, 1), 1e-2);
    const PathEnsemble a = euler_maruyama(sde, 1.0, 10, {0.0, 1.0}, {});
    const PathEnsemble b = euler_maruyama(sde, 1.0, 10, {0.0, 0.5, 1.0}, {});
    CHECK_THROWS_AS(homogenization_compare(a, b), ConfigError);
    const SDESpec sde2 = SDESpec::linear_additive(Vec::Zero(2), -1.0, Mat::Identity(2, 2), 1e-2);
    CHECK_THROWS_AS(homogenization_compare(a, euler_maruyama(sde2, 1.0, 10, {0.0, 1.0}, {})), ConfigError);
  }
}
