#pragma once

// Orbit steppers used by every Monte Carlo kernel. Each stepper owns the
// per-orbit state; kernels are templates over the stepper type so the map
// branch is resolved at compile time.
//
// The doubling map is simulated exactly: the state is a 64-bit binary window
// on the expansion of a Lebesgue-random real, and each step shifts in a fresh
// random bit from the orbit's refill stream. Plain floating-point iteration of
// 2x mod 1 collapses to 0 after ~53 steps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "homog/dynamics.hpp"
#include "homog/rng.hpp"

namespace homog {

enum class InitialMeasure { kMu, kLebesgue };

InitialMeasure parse_initial_measure(const std::string& name);
std::string to_string(InitialMeasure m);

/// Burn-in used to approximate the invariant measure from uniform starts.
inline constexpr std::size_t kDefaultBurnin = 1000;

struct LsvStepper {
  struct State {
    double x;
  };
  LsvLeftBranch left;

  State start(RngStream& start_stream, std::uint64_t /*seed*/, std::uint64_t /*index*/) const {
    return {start_stream.uniform()};
  }
  void advance(State& s) const {
    if (left.is_quarter()) {
      // branch-free so independent orbits interleave
      const double l = std::min(1.0, left(s.x));
      const double r = 2.0 * s.x - 1.0;
      s.x = s.x <= 0.5 ? l : r;
    } else {
      s.x = s.x <= 0.5 ? std::min(1.0, left(s.x)) : 2.0 * s.x - 1.0;
    }
  }
  static double value(const State& s) { return s.x; }
};

struct DoublingStepper {
  struct State {
    std::uint64_t word;
    std::uint64_t bits;
    int nbits;
    RngStream refill;
  };

  State start(RngStream& start_stream, std::uint64_t seed, std::uint64_t index) const {
    return {start_stream(), 0, 0, RngStream(seed, index, StreamPurpose::kRefill)};
  }
  static void advance(State& s) {
    if (s.nbits == 0) {
      s.bits = s.refill();
      s.nbits = 64;
    }
    s.word = (s.word << 1) | (s.bits & 1u);
    s.bits >>= 1;
    --s.nbits;
  }
  static double value(const State& s) { return RngStream::to_open_unit(s.word); }
};

/// Chebyshev member x -> 1 - 2x^2 on [-1, 1].
struct QuadraticStepper {
  struct State {
    double x;
  };
  State start(RngStream& start_stream, std::uint64_t, std::uint64_t) const {
    return {2.0 * start_stream.uniform() - 1.0};
  }
  static void advance(State& s) { s.x = 1.0 - 2.0 * s.x * s.x; }
  static double value(const State& s) { return s.x; }
};

/// Calls f(stepper) with the stepper type matching spec.
template <class F>
decltype(auto) with_stepper(const MapSpec& spec, F&& f) {
  switch (spec.kind) {
    case MapKind::kLsv: return f(LsvStepper{LsvLeftBranch(spec.gamma)});
    case MapKind::kDoubling: return f(DoublingStepper{});
    case MapKind::kQuadratic: break;
  }
  return f(QuadraticStepper{});
}

/// Initial state of sample `index`: uniform start, then `burnin` steps when
/// sampling the invariant measure.
template <class Stepper>
typename Stepper::State start_orbit(const Stepper& stepper, std::uint64_t seed, std::uint64_t index,
                                    InitialMeasure initial, std::size_t burnin) {
  RngStream start(seed, index, StreamPurpose::kStart);
  auto state = stepper.start(start, seed, index);
  if (initial == InitialMeasure::kMu) {
    for (std::size_t k = 0; k < burnin; ++k) stepper.advance(state);
  }
  return state;
}

/// Type-erased single orbit, for code paths that are not throughput bound.
class SampledOrbit {
 public:
  SampledOrbit(const MapSpec& spec, std::uint64_t seed, std::uint64_t index, InitialMeasure initial,
               std::size_t burnin = kDefaultBurnin);

  double x() const { return x_; }
  void advance();

 private:
  MapKind kind_;
  LsvStepper lsv_;
  LsvStepper::State lsv_state_{};
  DoublingStepper::State dbl_state_;
  QuadraticStepper::State quad_state_{};
  double x_ = 0.0;
};

}  // namespace homog
