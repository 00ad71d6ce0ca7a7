#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "homog/dynamics.hpp"
#include "homog/errors.hpp"
#include "homog/observable.hpp"
#include "homog/stat_tests.hpp"
#include "homog/tower.hpp"
#include "homog/wip.hpp"

using namespace homog;

namespace {

RunOptions seeded(std::uint64_t seed, InitialMeasure initial = InitialMeasure::kMu) {
  RunOptions opt;
  opt.seed = seed;
  opt.initial = initial;
  return opt;
}

// Ensemble whose W(t) is exactly N(0, t Sigma) with independent increments.
PathEnsemble gaussian_ensemble(double sigma2, std::size_t paths, std::uint64_t seed) {
  PathEnsemble ens;
  ens.grid = {0.0, 0.5, 1.0};
  ens.paths = paths;
  ens.d = 1;
  ens.W.resize(paths * 3);
  ens.WW.assign(paths * 3, 0.0);
  ens.Q.assign(paths * 3, 0.0);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, std::sqrt(0.5 * sigma2));
  for (std::size_t p = 0; p < paths; ++p) {
    ens.W[p * 3] = 0.0;
    ens.W[p * 3 + 1] = z(gen);
    ens.W[p * 3 + 2] = ens.W[p * 3 + 1] + z(gen);
  }
  return ens;
}

}  // namespace

TEST_SUITE("wip") {
  TEST_CASE("sample_paths guards") {
    const Observable v = Observable::cosine();
    CHECK_THROWS_AS(sample_paths(MapSpec::doubling(), v, 99, 10, uniform_grid(4), {}), ConfigError);
    CHECK_THROWS_AS(sample_paths(MapSpec::doubling(), v, 100, 10, {0.5, 0.25}, {}), ConfigError);
    CHECK_THROWS_AS(sample_paths(MapSpec::doubling(), v, 100, 10, {0.0, 1.5}, {}), ConfigError);
  }

  TEST_CASE("zero observable gives zero paths") {
    const PathEnsemble ens = sample_paths(MapSpec::lsv(0.25, 3.0), Observable::zero(), 1000, 50,
                                          uniform_grid(4), {});
    for (double w : ens.W) CHECK(w == 0.0);
    for (double w : ens.WW) CHECK(w == 0.0);
    const TestReport norm = marginal_normality(ens, Mat::Zero(1, 1));
    for (const TestEntry& e : norm.entries)
      if (e.name.rfind("ks_", 0) == 0) CHECK(e.skipped);
    const TestReport drift = drift_check(ens, Mat::Zero(1, 1));
    CHECK(drift.entry("mean_WW00@1").estimate == 0.0);
  }

  TEST_CASE("paths start at zero and satisfy the discrete Levy identity") {
    const MapSpec spec = MapSpec::lsv(0.3, 3.0);
    const Observable v = center(Observable::vec3(), spec);
    const PathEnsemble ens = sample_paths(spec, v, 2000, 200, uniform_grid(8), seeded(4));
    for (std::size_t p = 0; p < ens.paths; ++p)
      for (int i = 0; i < 3; ++i) {
        CHECK(ens.w(p, 0, i) == 0.0);
        for (int j = 0; j < 3; ++j) CHECK(ens.ww(p, 0, i, j) == 0.0);
      }
    CHECK(ens.levy_residual() <= 1e-10);
  }

  TEST_CASE("snapshots agree with a direct orbit replay") {
    const MapSpec spec = MapSpec::lsv(0.25, 3.0);
    const Observable v = Observable::linear().with_offset(Vec::Constant(1, 0.4));
    const std::size_t n = 1000;
    const PathEnsemble ens = sample_paths(spec, v, n, 3, {0.0, 0.25, 1.0}, seeded(6));
    for (std::size_t p = 0; p < 3; ++p) {
      SampledOrbit orbit(spec, 6, p, InitialMeasure::kMu);
      double s = 0.0, ss = 0.0;
      for (std::size_t k = 0; k < n; ++k, orbit.advance()) {
        const double x = orbit.x() - 0.4;
        ss += s * x;
        s += x;
        if (k + 1 == n / 4) CHECK(ens.w(p, 1, 0) == doctest::Approx(s / std::sqrt(1000.0)));
      }
      CHECK(ens.w(p, 2, 0) == doctest::Approx(s / std::sqrt(1000.0)));
      CHECK(ens.ww(p, 2, 0, 0) == doctest::Approx(ss / 1000.0));
    }
  }

  TEST_CASE("ensembles do not depend on the worker count") {
    const Observable v = Observable::cosine();
    RunOptions a = seeded(12), b = seeded(12);
    a.workers = 1;
    b.workers = 3;
    const PathEnsemble x = sample_paths(MapSpec::doubling(), v, 500, 300, uniform_grid(5), a);
    const PathEnsemble y = sample_paths(MapSpec::doubling(), v, 500, 300, uniform_grid(5), b);
    CHECK(x.W == y.W);
    CHECK(x.WW == y.WW);
    CHECK(x.Q == y.Q);
  }

  TEST_CASE("doubling map: W(1) is normal with variance 1/2 and WW(1) has mean 0") {
    const Observable v = Observable::cosine();
    const Mat sigma = Mat::Constant(1, 1, 0.5);
    int normal_ok = 0, drift_ok = 0, cov_ok = 0;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const PathEnsemble ens = sample_paths(MapSpec::doubling(), v, 10000, 10000, uniform_grid(4),
                                            seeded(seed));
      const TestReport norm = marginal_normality(ens, sigma);
      normal_ok += norm.entry("ks_W0@1").p_value > 0.01;
      cov_ok += norm.entry("cov_W00@1").passed;
      drift_ok += drift_check(ens, Mat::Zero(1, 1)).entry("mean_WW00@1").passed;
      CHECK(time_scaling_check(ens).entries.size() == 3);
    }
    CHECK(normal_ok >= 2);
    CHECK(cov_ok >= 2);
    CHECK(drift_ok >= 2);
  }

  TEST_CASE("LSV drift matches the martingale E") {
    const MapSpec spec = MapSpec::lsv(0.25, 3.0);
    const Observable v = center_observable(Observable::linear(), spec);
    const CoefficientEstimate m = martingale_coeffs(spec, v);
    int ok = 0;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const PathEnsemble ens = sample_paths(spec, v, 10000, 10000, uniform_grid(4), seeded(seed));
      ok += drift_check(ens, m.E, m.E_se).entry("mean_WW00@1").passed;
    }
    CHECK(ok >= 2);
  }

  TEST_CASE("KS p-values of an exact Gaussian ensemble are uniform") {
    std::vector<double> pv;
    for (std::uint64_t r = 0; r < 200; ++r) {
      const TestReport rep = marginal_normality(gaussian_ensemble(0.7, 1000, r + 1), Mat::Constant(1, 1, 0.7));
      pv.push_back(rep.entry("ks_W0@1").p_value);
      CHECK(pv.back() >= 0.0);
      CHECK(pv.back() <= 1.0);
    }
    const KsResult u = ks_one_sample(pv, [](double x) { return std::clamp(x, 0.0, 1.0); });
    CHECK(u.p_value > 0.001);
  }

  TEST_CASE("initial measure comparison") {
    const Observable v = Observable::cosine();
    const PathEnsemble mu = sample_paths(MapSpec::doubling(), v, 1000, 2000, uniform_grid(4), seeded(5));
    const PathEnsemble leb = sample_paths(MapSpec::doubling(), v, 1000, 2000, uniform_grid(4),
                                          seeded(6, InitialMeasure::kLebesgue));
    const TestReport rep = initial_measure_comparison(mu, leb);
    CHECK(rep.entry("ks2_W0@1").p_value >= 0.0);
    CHECK(rep.entry("ks2_W0@1").p_value <= 1.0);

    const PathEnsemble other_n = sample_paths(MapSpec::doubling(), v, 2000, 100, uniform_grid(4), seeded(5));
    CHECK_THROWS_AS(initial_measure_comparison(mu, other_n), ConfigError);
  }

  TEST_CASE("LSV: Lebesgue and mu starts give the same law of W(1)") {
    const MapSpec spec = MapSpec::lsv(0.25, 3.0);
    const Observable v = center_observable(Observable::linear(), spec);
    int ok = 0;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const PathEnsemble mu = sample_paths(spec, v, 100000, 2000, {0.0, 1.0}, seeded(seed));
      const PathEnsemble leb = sample_paths(spec, v, 100000, 2000, {0.0, 1.0},
                                            seeded(seed + 100, InitialMeasure::kLebesgue));
      ok += initial_measure_comparison(mu, leb).entry("ks2_W0@1").p_value > 0.01;
    }
    CHECK(ok >= 2);
  }

  TEST_CASE("report JSON and ensemble CSV") {
    const PathEnsemble ens = sample_paths(MapSpec::doubling(), Observable::cosine(), 200, 1000,
                                          uniform_grid(2), seeded(2));
    TestReport rep = marginal_normality(ens, Mat::Constant(1, 1, 0.5));
    rep.append(drift_check(ens, Mat::Zero(1, 1)));
    const nlohmann::json doc = nlohmann::json::parse(rep.to_json());
    CHECK(doc["tests"].size() == rep.entries.size());
    for (const auto& t : doc["tests"]) {
      CHECK(t.contains("gating"));
      if (!t["p_value"].is_null()) {
        CHECK(t["p_value"].get<double>() >= 0.0);
        CHECK(t["p_value"].get<double>() <= 1.0);
      }
    }
    CHECK_FALSE(rep.entry("ks_W0@0.5").gating);
    CHECK(rep.entry("ks_W0@1").gating);
    CHECK_THROWS_AS(rep.entry("no_such_test"), ConfigError);

    std::ostringstream os;
    write_ensemble_csv(os, ens);
    CHECK(os.str().rfind("path_id,t,W0,WW00\n", 0) == 0);
  }

  TEST_CASE("a failing non-gating entry does not fail the report") {
    TestReport rep;
    TestEntry e;
    e.name = "informational";
    e.passed = false;
    e.gating = false;
    rep.entries.push_back(e);
    CHECK(rep.passed());
    rep.entries.back().gating = true;
    CHECK_FALSE(rep.passed());
  }
}
