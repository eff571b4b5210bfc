#include "mdbmlab/dbm.hpp"
#include "mdbmlab/parallel.hpp"
#include "mdbmlab/stats.hpp"
#include "mdbmlab/warren.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace mdbmlab;

namespace {

WeylVector v(std::initializer_list<double> xs) {
  WeylVector out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("skorokhod_step examples") {
  auto a = skorokhod_step(0.9, 0.3, 0.0, 1.0);
  CHECK(a.value == 1.0);
  CHECK(a.push == doctest::Approx(-0.2));
  auto b = skorokhod_step(0.5, -0.1, 0.0, 1.0);
  CHECK(b.value == doctest::Approx(0.4));
  CHECK(b.push == 0.0);
  auto c = skorokhod_step(0.0, -0.4, -0.1, 1.0);
  CHECK(c.value == -0.1);
  CHECK(c.push == doctest::Approx(0.3));
  CHECK_THROWS_AS(skorokhod_step(0.0, 0.0, 1.0, 0.5), BarrierCrossing);
}

TEST_CASE("is_exceptional") {
  CHECK(is_exceptional(GTPattern<double>::from_levels({v({0}), v({0, 0}), v({-1, 0, 1})})));
  CHECK_FALSE(is_exceptional(GTPattern<double>::from_levels({v({0}), v({-0.5, 0.5}), v({-1, 0, 1})})));
  // Equal entries on the top level do not count.
  CHECK_FALSE(is_exceptional(GTPattern<double>::from_levels({v({0}), v({-0.5, 0.5}), v({-1, 0, 0})})));
}

TEST_CASE("simulate_warren interlaces and level 1 is never pushed") {
  SimScheme s;
  s.T = 0.3;
  s.h = 1e-3;
  for (bool bridge : {true, false}) {
    WarrenOptions o;
    o.bridge_correction = bridge;
    NoiseStream noise = derive_noise_stream(51, bridge, 0);
    const auto path = simulate_warren(GTPattern<double>(3), s, noise, o);
    CHECK(path.states.size() == path.pushes.size());
    for (std::size_t j = 0; j < path.states.size(); ++j) {
      CHECK(validate_interlacing(path.states[j]));
      CHECK(path.pushes[j][0] == 0.0);
    }
  }
}

TEST_CASE("frozen barriers: each level stays in the previous lower level's slots") {
  SimScheme s;
  s.T = 0.3;
  s.h = 1e-3;
  for (bool bridge : {true, false}) {
    WarrenOptions o;
    o.bridge_correction = bridge;
    o.frozen_barriers = true;
    NoiseStream noise = derive_noise_stream(51, bridge, 1);
    const auto path = simulate_warren(GTPattern<double>(3), s, noise, o);
    for (std::size_t j = 1; j < path.states.size(); ++j) {
      const auto &prev = path.states[j - 1], &cur = path.states[j];
      for (int k = 2; k <= 3; ++k)
        for (int i = 0; i < k; ++i) {
          if (i > 0) CHECK(cur(k, i) >= prev(k - 1, i - 1));
          if (i < k - 1) CHECK(cur(k, i) <= prev(k - 1, i));
        }
      CHECK(path.pushes[j][0] == 0.0);
    }
  }
}

TEST_CASE("plain clamp: pushes act only at contact") {
  SimScheme s;
  s.T = 0.3;
  s.h = 1e-3;
  WarrenOptions o;
  o.bridge_correction = false;
  NoiseStream noise = derive_noise_stream(52, 0, 0);
  const auto path = simulate_warren(GTPattern<double>::from_levels({v({0}), v({-1, 1})}), s, noise, o);
  for (std::size_t j = 1; j < path.states.size(); ++j) {
    const Eigen::VectorXd d = path.pushes[j] - path.pushes[j - 1];
    const auto& p = path.states[j];
    if (d[1] != 0.0) CHECK(p(2, 0) == p(1, 0));
    if (d[2] != 0.0) CHECK(p(2, 1) == p(1, 0));
    CHECK(d[1] <= 0.0);
    CHECK(d[2] >= 0.0);
  }
}

TEST_CASE("exceptional_occupation") {
  SimScheme s;
  s.T = 0.5;
  s.h = 1e-3;
  NoiseStream noise = derive_noise_stream(53, 0, 0);
  const auto path = simulate_warren(GTPattern<double>::from_levels({v({0.5}), v({0.2, 2.0}), v({0, 1, 3})}), s, noise);
  CHECK(exceptional_occupation(path, 0.0) == 0.0);
  double prev = 0.0;
  for (double tol : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
    const double occ = exceptional_occupation(path, tol);
    CHECK(occ >= prev);
    CHECK(occ <= 1.0);
    prev = occ;
  }
}

TEST_CASE("Warren with N = 2: top is GUE and bottom is Brownian") {
  constexpr std::size_t n = 20000;
  SimScheme s;
  s.T = 1.0;
  s.h = 1e-3;
  std::vector<double> lo(n), hi(n), x1(n), ref_lo(n), ref_hi(n);
  parallel_for(n, [&](std::size_t i) {
    NoiseStream noise = derive_noise_stream(54, 0, i), ref = derive_noise_stream(54, 1, i);
    const auto p = simulate_warren_terminal(GTPattern<double>(2), s, noise);
    const auto x = sample_beta_hermite(2, Theta(1.0), 1.0, ref);
    lo[i] = p(2, 0);
    hi[i] = p(2, 1);
    x1[i] = p(1, 0);
    ref_lo[i] = x[0];
    ref_hi[i] = x[1];
  });
  CHECK(ks_one_sample(x1, [](double x) { return normal_cdf(x); }).p_value > 0.01);
  CHECK(ks_two_sample(lo, ref_lo).p_value > 0.01);
  CHECK(ks_two_sample(hi, ref_hi).p_value > 0.01);
}
