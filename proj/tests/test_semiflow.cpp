#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "homog/dynamics.hpp"
#include "homog/errors.hpp"
#include "homog/rng.hpp"
#include "homog/semiflow.hpp"

using namespace homog;

namespace {

SuspensionSpec doubling_affine() {
  return SuspensionSpec::make(MapSpec::doubling(), parse_roof("affine(0.5)"));
}

SuspensionSpec lsv_affine() {
  return SuspensionSpec::make(MapSpec::lsv(0.25, 3.0), parse_roof("affine(0.5)"));
}

FlowRunOptions flow_opts(std::uint64_t seed) {
  FlowRunOptions o;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_SUITE("semiflow") {
  TEST_CASE("roof presets and suspension validation") {
    CHECK(parse_roof("const1").alpha == 0.0);
    CHECK(parse_roof("affine(0.5)").alpha == 0.5);
    CHECK_THROWS_AS(parse_roof("affine(x)"), ConfigError);
    CHECK_THROWS_AS(parse_roof("quadratic"), ConfigError);
    CHECK_THROWS_AS(SuspensionSpec::make(MapSpec::doubling(), parse_roof("affine(-1.5)")), ConfigError);
    CHECK_THROWS_AS(SuspensionSpec::make(MapSpec::doubling(), parse_roof("const1"), 2.0), ConfigError);
    const SuspensionSpec s = doubling_affine();
    CHECK(s.inf_h == 1.0);
    CHECK(s.sup_h == 1.5);
    CHECK(s.h_bar == doctest::Approx(1.25).epsilon(1e-10));
  }

  TEST_CASE("lap numbers") {
    const SuspensionSpec one = SuspensionSpec::make(MapSpec::doubling(), parse_roof("const1"));
    CHECK(lap_number(one, {0.3, 0.2}, 2.5) == 2);
    CHECK(lap_number(one, {0.3, 0.2}, 0.0) == 0);
    CHECK(lap_number(doubling_affine(), {0.7, 1.2}, 0.0) == 0);

    // h along 0.1, 0.2, 0.4, 0.8: partial sums 1.05, 2.15, 3.35
    const SuspensionSpec s = doubling_affine();
    CHECK(lap_number(s, {0.1, 0.0}, 3.0) == 2);

    // brute-force partial-sum scan on LSV orbits
    const SuspensionSpec l = lsv_affine();
    RngStream rng(2, 0, StreamPurpose::kAux);
    for (int k = 0; k < 200; ++k) {
      const double x = rng.uniform();
      const double u = rng.uniform() * l.h(x);
      const double t = 40.0 * rng.uniform();
      std::vector<double> partial{0.0};
      double y = x;
      while (partial.back() <= u + t) {
        partial.push_back(partial.back() + l.h(y));
        y = apply_map(l.base, y);
      }
      CHECK(lap_number(l, {x, u}, t) == partial.size() - 2);
    }
  }

  TEST_CASE("flow maps states along the suspension") {
    const SuspensionSpec one = SuspensionSpec::make(MapSpec::doubling(), parse_roof("const1"));
    const FlowState s = flow(one, {0.1, 0.5}, 1.0);
    CHECK(s.x == doctest::Approx(0.2));
    CHECK(s.u == doctest::Approx(0.5));
    const FlowState same = flow(doubling_affine(), {0.3, 0.4}, 0.0);
    CHECK(same.x == 0.3);
    CHECK(same.u == 0.4);
  }

  TEST_CASE("flow satisfies the semigroup law") {
    const SuspensionSpec l = lsv_affine();
    RngStream rng(3, 0, StreamPurpose::kAux);
    for (int k = 0; k < 1000; ++k) {
      const double x = rng.uniform();
      const FlowState s{x, rng.uniform() * l.h(x)};
      const double t1 = 20.0 * rng.uniform(), t2 = 20.0 * rng.uniform();
      const FlowState a = flow(l, flow(l, s, t1), t2);
      const FlowState b = flow(l, s, t1 + t2);
      CHECK(std::abs(a.x - b.x) < 1e-9);
      CHECK(std::abs(a.u - b.u) < 1e-9);
      CHECK(a.u >= 0.0);
      CHECK(a.u < l.h(a.x));
    }
  }

  TEST_CASE("fiber integrals") {
    const SuspensionSpec s = doubling_affine();
    const FlowObservable one = FlowObservable::constant(Vec::Constant(1, 1.0));
    const FlowObservable sin_u = FlowObservable::preset("sin_u");
    for (double x : {0.0, 0.3, 0.77, 0.999}) {
      CHECK(induce_v(s, one, x)(0) == doctest::Approx(s.h(x)).epsilon(1e-14));
      CHECK(std::abs(induce_v(s, sin_u, x)(0) - (1.0 - std::cos(s.h(x)))) < 1e-12);
    }
    const SuspensionSpec c = SuspensionSpec::make(MapSpec::doubling(), parse_roof("const1"));
    CHECK(induce_v(c, FlowObservable::preset("u"), 0.4)(0) == doctest::Approx(0.5).epsilon(1e-14));

    double wsum = 0.0;
    for (double w : FiberRule::get().weight) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("flow integrals of zero and constant observables") {
    const SuspensionSpec one = SuspensionSpec::make(MapSpec::doubling(), parse_roof("const1"));
    const auto zero = flow_iterated_integrals(one, FlowObservable::zero(), {0.2, 0.0}, 5.0, 0.02, {});
    CHECK(zero.back().S.isZero(0.0));
    CHECK(zero.back().SS.isZero(0.0));

    Vec c(2);
    c << 0.7, -1.1;
    const auto path = flow_iterated_integrals(one, FlowObservable::constant(c), {0.2, 0.3}, 7.5, 0.02,
                                              {1.0, 2.5, 7.5});
    REQUIRE(path.size() == 3);
    for (const FlowSample& f : path) {
      CHECK((f.S - c * f.t).norm() < 1e-9);
      CHECK((f.SS - 0.5 * f.t * f.t * c * c.transpose()).norm() < 1e-9);
    }
    CHECK_THROWS_AS(flow_iterated_integrals(one, FlowObservable::constant(c), {0.2, 0.3}, 1.0, 0.2, {}),
                    ConfigError);
    CHECK_THROWS_AS(flow_iterated_integrals(one, FlowObservable::constant(c), {0.2, 0.3}, 1.0, 0.0, {}),
                    ConfigError);
  }

  TEST_CASE("flow sums stay within 2 |h| |v| of the induced sums") {
    const SuspensionSpec l = lsv_affine();
    const FlowObservable v = FlowObservable::preset("cos_u");
    const double vmax = l.sup_h;  // |cos| <= 1 and u < sup h
    const double dt = l.inf_h / 50.0;
    RngStream rng(4, 0, StreamPurpose::kAux);
    for (int k = 0; k < 200; ++k) {
      const double x = rng.uniform();
      const FlowState s{x, rng.uniform() * l.h(x)};
      const double t = 100.0 * rng.uniform();
      const FlowInducedPair p = flow_vs_induced(l, v, s, t, dt);
      CHECK(p.laps == lap_number(l, s, t));
      CHECK((p.S - p.S_induced).cwiseAbs().maxCoeff() <= 2.0 * l.sup_h * vmax + 10.0 * dt * vmax);
    }
  }

  TEST_CASE("E' for a constant observable") {
    // H = u c, so E' = c^2 int h^2 / 2 dmu / h_bar = c^2 (19/24) / 1.25
    const SuspensionSpec s = doubling_affine();
    const Mat ep = e_prime(s, FlowObservable::constant(Vec::Constant(1, 0.8)));
    CHECK(ep(0, 0) == doctest::Approx(0.64 * (19.0 / 24.0) / 1.25).epsilon(1e-8));
  }

  TEST_CASE("zero observable gives zero coefficients") {
    const FlowCoefficients c = flow_coeffs(doubling_affine(), FlowObservable::zero());
    CHECK(c.cov_target.isZero(0.0));
    CHECK(c.drift_target.isZero(0.0));
    CHECK(c.E_prime.isZero(0.0));
  }

  TEST_CASE("constant roof reduces to the map") {
    // h = 1, v = cos 2 pi x: Sigma = 1/2, E = 0 and E' = int cos^2 / 2 = 1/4
    const SuspensionSpec s = SuspensionSpec::make(MapSpec::doubling(), parse_roof("const1"));
    const FlowObservable v = center_flow(s, FlowObservable::preset("cos"));
    CHECK(std::abs(v.offset()(0)) < 1e-12);
    const FlowCoefficients c = flow_coeffs(s, v);
    CHECK(c.cov_target(0, 0) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(c.E_prime(0, 0) == doctest::Approx(0.25).epsilon(1e-8));
    CHECK(c.drift_target(0, 0) == doctest::Approx(0.25).epsilon(1e-6));

    int ok = 0;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const TestReport rep = flow_wip_check(s, v, c, 200.0, 2000, flow_opts(seed));
      ok += rep.entry("cov_W00@1").passed && rep.entry("mean_WW00@1").passed;
    }
    CHECK(ok >= 2);
  }

  TEST_CASE("affine roof: covariance and drift are consistent in one dimension") {
    // for d = 1 the Levy area vanishes, so mean WW(1) = cov / 2
    const SuspensionSpec s = doubling_affine();
    const FlowCoefficients c = flow_coeffs(s, center_flow(s, FlowObservable::preset("cos")));
    CHECK(c.drift_target(0, 0) == doctest::Approx(0.5 * c.cov_target(0, 0)).epsilon(1e-6));
  }

  TEST_CASE("lap numbers obey the law of large numbers and the linear bound") {
    const SuspensionSpec s = doubling_affine();
    const LapLawResult r = lap_law(s, 1000.0, 10000, flow_opts(5));
    CHECK(r.target == doctest::Approx(1.0 / 1.25).epsilon(1e-10));
    CHECK(std::abs(r.mean - r.target) <= 3.0 * r.std_err);
    CHECK(r.max_ratio <= 1.0);
    CHECK_THROWS_AS(lap_law(s, 0.5, 100, flow_opts(5)), ConfigError);
  }

  TEST_CASE("lap deviation and flow moments grow like t^(1/2)") {
    const SuspensionSpec s = doubling_affine();
    const GrowthFit laps = lap_deviation_growth(s, {100.0, 300.0, 1000.0, 3000.0, 10000.0}, 1000, flow_opts(6));
    CHECK(laps.slope >= 0.4);
    CHECK(laps.slope <= 0.6);
    const FlowObservable v = center_flow(s, FlowObservable::preset("cos"));
    const GrowthFit mom = flow_moment_growth(s, v, {30.0, 100.0, 300.0, 1000.0}, 500, flow_opts(7));
    CHECK(mom.slope >= 0.4);
    CHECK(mom.slope <= 0.6);
    CHECK_THROWS_AS(flow_moment_growth(s, FlowObservable::zero(), {10.0, 100.0}, 100, flow_opts(7)),
                    DomainError);
  }

  TEST_CASE("sampled trajectory over the doubling base stays diffusive") {
    // a plain double-precision doubling orbit collapses to 0 within ~53 laps,
    // which would make S_t grow linearly
    const SuspensionSpec s = doubling_affine();
    const FlowObservable v = center_flow(s, FlowObservable::preset("cos"));
    std::vector<double> record;
    for (int k = 1; k <= 10; ++k) record.push_back(200.0 * k);
    const auto path = sampled_flow_trajectory(s, v, record, flow_opts(8));
    REQUIRE(path.size() == record.size());
    for (std::size_t k = 0; k < path.size(); ++k) CHECK(path[k].t == doctest::Approx(record[k]));
    CHECK(std::abs(path.back().S(0)) < 0.1 * path.back().t);

    const auto again = sampled_flow_trajectory(s, v, record, flow_opts(8));
    CHECK(again.back().S(0) == path.back().S(0));
  }

  TEST_CASE("flow check guards and trajectory CSV") {
    const SuspensionSpec s = doubling_affine();
    const FlowObservable v = center_flow(s, FlowObservable::preset("cos"));
    const FlowCoefficients c = flow_coeffs(s, v);
    CHECK_THROWS_AS(flow_wip_check(s, v, c, 100.0, 999, flow_opts(1)), ConfigError);
    CHECK_THROWS_AS(flow_paths(s, v, 0.5, 10, {0.0, 1.0}, flow_opts(1)), ConfigError);
    CHECK_THROWS_AS(FlowObservable::preset("tan"), ConfigError);

    std::ostringstream os;
    write_flow_csv(os, flow_iterated_integrals(s, v, {0.3, 0.0}, 2.0, 0.02, {1.0}));
    CHECK(os.str().rfind("t,S0,SS00\n", 0) == 0);
  }
}
