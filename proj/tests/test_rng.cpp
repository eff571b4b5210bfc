#include "mdbmlab/parallel.hpp"
#include "mdbmlab/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace mdbmlab;

TEST_CASE("Philox4x32-10 known answers") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::block(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, K{0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::block(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("derive_noise_stream is deterministic and path-specific") {
  NoiseStream a = derive_noise_stream(42, 0, 0), b = derive_noise_stream(42, 0, 0);
  NoiseStream c = derive_noise_stream(42, 0, 1), d = derive_noise_stream(42, 1, 0);
  bool differs_path = false, differs_stream = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    differs_path |= x != c.normal();
    differs_stream |= x != d.normal();
  }
  CHECK(differs_path);
  CHECK(differs_stream);
}

TEST_CASE("first million increments: mean and variance") {
  NoiseStream s = derive_noise_stream(42, 0, 0);
  constexpr int n = 1000000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = s.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n, var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 4e-3);
  CHECK(std::abs(var - 1.0) < 0.01);
}

TEST_CASE("uniform lies in the open unit interval") {
  NoiseStream s = derive_noise_stream(3, 0, 0);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double u = s.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / 200000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("gamma and chi moments") {
  NoiseStream s = derive_noise_stream(5, 0, 0);
  constexpr int n = 200000;
  for (double shape : {0.5, 1.0, 3.7}) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += s.gamma(shape);
    CHECK(sum / n == doctest::Approx(shape).epsilon(0.02));
  }
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = s.chi(5.0);
    sq += c * c;
  }
  CHECK(sq / n == doctest::Approx(5.0).epsilon(0.02));
}

TEST_CASE("streams are independent of thread count") {
  constexpr std::size_t paths = 64;
  auto run = [&](unsigned threads) {
    std::vector<double> out(paths);
    parallel_for(
        paths,
        [&](std::size_t i) {
          NoiseStream s = derive_noise_stream(9, 2, i);
          double acc = 0.0;
          for (int k = 0; k < 100; ++k) acc += s.normal() * (k + 1);
          out[i] = acc;
        },
        threads);
    return out;
  };
  const auto serial = run(1);
  CHECK(run(4) == serial);
  CHECK(run(paths) == serial);
}
