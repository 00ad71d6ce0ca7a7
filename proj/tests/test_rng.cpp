#include <doctest.h>

#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "homog/parallel.hpp"
#include "homog/rng.hpp"

using namespace homog;

TEST_SUITE("rng") {
  TEST_CASE("philox4x32-10 known-answer vectors") {
    // Random123 kat_vectors
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}) ==
          C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::block(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                            K{0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::block(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                            K{0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
  }

  TEST_CASE("streams are reproducible and separated by key") {
    RngStream a(7, 3, StreamPurpose::kStart), b(7, 3, StreamPurpose::kStart);
    RngStream c(7, 3, StreamPurpose::kRefill), d(7, 4, StreamPurpose::kStart), e(8, 3, StreamPurpose::kStart);
    bool differ_c = false, differ_d = false, differ_e = false;
    for (int i = 0; i < 16; ++i) {
      const auto x = a();
      CHECK(x == b());
      differ_c |= x != c();
      differ_d |= x != d();
      differ_e |= x != e();
    }
    CHECK(differ_c);
    CHECK(differ_d);
    CHECK(differ_e);
  }

  TEST_CASE("uniform lies in the open unit interval") {
    CHECK(RngStream::to_open_unit(0) > 0.0);
    CHECK(RngStream::to_open_unit(~0ull) < 1.0);
    RngStream r(1, 0, StreamPurpose::kAux);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) sum += r.uniform();
    // mean of 1e5 uniforms: stderr 9.1e-4
    CHECK(std::abs(sum / 1e5 - 0.5) < 4e-3);
  }

  TEST_CASE("parallel_blocks output is independent of the worker count") {
    auto run = [](std::size_t workers) {
      std::vector<std::uint64_t> out(1000);
      parallel_blocks(out.size(), 64, workers, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          RngStream r(99, i, StreamPurpose::kAux);
          out[i] = r() ^ r();
        }
      });
      return out;
    };
    const auto one = run(1);
    CHECK(one == run(3));
    CHECK(one == run(8));
  }

  TEST_CASE("worker exceptions propagate") {
    CHECK_THROWS_AS(parallel_blocks(100, 10, 4,
                                    [](std::size_t b, std::size_t) {
                                      if (b == 50) throw std::runtime_error("boom");
                                    }),
                    std::runtime_error);
  }

  TEST_CASE("resolve_workers honours explicit requests and the environment") {
    CHECK(resolve_workers(5) == 5);
    setenv("HOMOG_WORKERS", "3", 1);
    CHECK(resolve_workers(0) == 3);
    unsetenv("HOMOG_WORKERS");
    CHECK(resolve_workers(0) >= 1);
  }
}
