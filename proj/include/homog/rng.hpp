#pragma once

// Counter-based random streams. Every Monte Carlo sample draws from its own
// stream keyed by (seed, sample index, purpose), so results never depend on
// which worker ran the sample or in what order.

#include <array>
#include <cstdint>
#include <limits>

namespace homog {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept;
};

/// What a stream is used for. Distinct purposes never share random bits.
enum class StreamPurpose : std::uint32_t {
  kStart = 1,      // initial condition of an orbit
  kRefill = 2,     // low-order bits for the exact doubling-map orbit
  kBootstrap = 3,  // resampling indices
  kGaussian = 4,   // SDE increments
  kFlowStart = 5,  // fiber coordinate / rejection sampling for semiflows
  kAux = 6,
};

/// A keyed stream of 64-bit words. Satisfies UniformRandomBitGenerator so it
/// can drive <random> distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t index, StreamPurpose purpose) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    if (pos_ == 2) refill();
    return buf_[pos_++];
  }

  /// Uniform double in the open interval (0, 1) with 53 random bits.
  double uniform() noexcept { return to_open_unit((*this)()); }

  static double to_open_unit(std::uint64_t u) noexcept {
    return (static_cast<double>(u >> 12) + 0.5) * 0x1.0p-52;
  }

 private:
  void refill() noexcept;

  Philox4x32::Key key_;
  std::uint64_t index_;
  std::uint32_t purpose_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int pos_ = 2;
};

}  // namespace homog
