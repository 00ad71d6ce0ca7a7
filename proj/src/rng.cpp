#include "homog/rng.hpp"

namespace homog {

namespace {

constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;
constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter c, Key k) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kMulA, c[0], lo0, hi0);
    mulhilo(kMulB, c[2], lo1, hi1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeylA;
    k[1] += kWeylB;
  }
  return c;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t index, StreamPurpose purpose) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      index_(index),
      purpose_(static_cast<std::uint32_t>(purpose)) {}

void RngStream::refill() noexcept {
  // counter layout: [block lo32, purpose<<16 | block hi16, index lo32, index hi32]
  const Philox4x32::Counter ctr{
      static_cast<std::uint32_t>(block_),
      (purpose_ << 16) | static_cast<std::uint32_t>((block_ >> 32) & 0xFFFFu),
      static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32)};
  const auto out = Philox4x32::block(ctr, key_);
  buf_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buf_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  ++block_;
  pos_ = 0;
}

}  // namespace homog
