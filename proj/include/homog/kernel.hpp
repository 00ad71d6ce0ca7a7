#pragma once

// Lane-interleaved Monte Carlo kernel shared by stats, wip and fastslow.
// L independent orbits advance in lockstep so the map evaluations of
// different samples can overlap; each orbit still owns its own random streams.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <type_traits>
#include <utility>

#include "homog/errors.hpp"
#include "homog/observable.hpp"
#include "homog/sampling.hpp"

namespace homog {

struct OrbitSource {
  std::uint64_t seed = 1;
  InitialMeasure initial = InitialMeasure::kMu;
  std::size_t burnin = kDefaultBurnin;
};

/// Streaming sums of one orbit: S, the strictly ordered pair sum SS, the
/// diagonal sum Q, and running maxima of |S_k|^2 and |SS_k|_F^2.
template <int D>
struct OrbitSums {
  std::array<double, D> S{};
  std::array<double, D * D> SS{};
  std::array<double, D * D> Q{};
  double max_s2 = 0.0;
  double max_ss2 = 0.0;
  std::size_t n = 0;

  void push(const double* v, bool track_max) {
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) {
        SS[i * D + j] += S[i] * v[j];
        Q[i * D + j] += v[i] * v[j];
      }
    for (int i = 0; i < D; ++i) S[i] += v[i];
    ++n;
    if (track_max) {
      double s2 = 0.0, ss2 = 0.0;
      for (int i = 0; i < D; ++i) s2 += S[i] * S[i];
      for (int k = 0; k < D * D; ++k) ss2 += SS[k] * SS[k];
      max_s2 = std::max(max_s2, s2);
      max_ss2 = std::max(max_ss2, ss2);
    }
  }
};

/// Calls f(std::integral_constant<int, D>{}) with D = d.
template <class F>
decltype(auto) with_dim(int d, F&& f) {
  switch (d) {
    case 1: return f(std::integral_constant<int, 1>{});
    case 2: return f(std::integral_constant<int, 2>{});
    case 3: return f(std::integral_constant<int, 3>{});
    case 4: return f(std::integral_constant<int, 4>{});
    default: break;
  }
  throw ConfigError("observable dimension must be in [1, 4]");
}

/// Like with_dim, but evaluators with a compile-time dimension only
/// instantiate that one.
template <class Eval, class F>
decltype(auto) with_eval_dim(const Eval&, int d, F&& f) {
  if constexpr (requires { std::integral_constant<int, Eval::dim()>{}; }) {
    if (d != Eval::dim()) throw ConfigError("observable dimension does not match its evaluator");
    return f(std::integral_constant<int, Eval::dim()>{});
  } else {
    return with_dim(d, std::forward<F>(f));
  }
}

inline constexpr int kLanes = 4;

/// Runs samples [first, first + count), count <= kLanes, for
/// checkpoints.back() steps. After k values have been pushed, for every k in
/// the ascending list `checkpoints`, calls snap(lane, checkpoint_index, sums).
template <int D, class Stepper, class Eval, class Snap>
void run_lanes(const Stepper& stepper, const Eval& eval, const OrbitSource& src,
               std::uint64_t first, int count, std::span<const std::size_t> checkpoints,
               bool track_max, Snap&& snap) {
  constexpr int L = kLanes;
  using State = typename Stepper::State;
  std::array<State, L> state{start_orbit(stepper, src.seed, first, src.initial, src.burnin),
                             start_orbit(stepper, src.seed, first + (count > 1 ? 1 : 0),
                                         src.initial, src.burnin),
                             start_orbit(stepper, src.seed, first + (count > 2 ? 2 : 0),
                                         src.initial, src.burnin),
                             start_orbit(stepper, src.seed, first + (count > 3 ? 3 : 0),
                                         src.initial, src.burnin)};
  std::array<OrbitSums<D>, L> sums{};
  std::array<std::array<double, D>, L> v{};
  std::size_t step = 0;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const std::size_t target = checkpoints[c];
    for (; step < target; ++step) {
      for (int l = 0; l < L; ++l) eval(Stepper::value(state[l]), v[l].data());
      for (int l = 0; l < L; ++l) sums[l].push(v[l].data(), track_max);
      for (int l = 0; l < L; ++l) stepper.advance(state[l]);
    }
    for (int l = 0; l < count; ++l) snap(l, c, std::as_const(sums[l]));
  }
}

/// Resolves stepper, evaluator and dimension, then runs all samples in
/// [begin, end) in groups of kLanes. snap receives the absolute sample index.
template <class Snap>
void run_samples(const MapSpec& spec, const Observable& v, const OrbitSource& src,
                 std::size_t begin, std::size_t end, std::span<const std::size_t> checkpoints,
                 bool track_max, Snap&& snap) {
  with_stepper(spec, [&](const auto& stepper) {
    with_evaluator(v, [&](const auto& eval) {
      with_eval_dim(eval, v.dim(), [&](auto dim) {
        constexpr int D = decltype(dim)::value;
        for (std::size_t i = begin; i < end; i += kLanes) {
          const int count = static_cast<int>(std::min<std::size_t>(kLanes, end - i));
          run_lanes<D>(stepper, eval, src, i, count, checkpoints, track_max,
                       [&](int lane, std::size_t c, const OrbitSums<D>& s) {
                         snap(i + static_cast<std::size_t>(lane), c, s);
                       });
        }
      });
    });
  });
}

}  // namespace homog
