#include "mdbmlab/dbm.hpp"
#include "mdbmlab/parallel.hpp"
#include "mdbmlab/stats.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
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

SimScheme scheme(double h, double T) {
  SimScheme s;
  s.h = h;
  s.T = T;
  return s;
}

}  // namespace

TEST_CASE("dbm_drift examples") {
  const auto d2 = dbm_drift(v({0, 1}), 1.0);
  CHECK(d2[0] == -1.0);
  CHECK(d2[1] == 1.0);
  const auto d3 = dbm_drift(v({0, 1, 3}), 2.0);
  CHECK(d3[0] == doctest::Approx(-8.0 / 3.0));
  CHECK(d3[1] == doctest::Approx(1.0));
  CHECK(d3[2] == doctest::Approx(5.0 / 3.0));
  CHECK_THROWS_AS(dbm_drift(v({0, 1, 1}), 1.0), SingularityError);
}

TEST_CASE("dbm_drift components sum to zero") {
  NoiseStream noise = derive_noise_stream(1, 0, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + trial % 7;
    WeylVector x(n);
    double acc = noise.normal();
    for (int i = 0; i < n; ++i) x[i] = acc += 0.01 + noise.uniform();
    const auto d = dbm_drift(x, 0.5 + 3 * noise.uniform());
    CHECK(std::abs(d.sum()) <= 1e-12 * d.cwiseAbs().sum());
  }
}

TEST_CASE("N = 1 paths are Brownian") {
  constexpr std::size_t n = 100000;
  const auto s = scheme(0.1, 1.0);
  std::vector<double> end(n);
  parallel_for(n, [&](std::size_t i) {
    NoiseStream noise = derive_noise_stream(2, 0, i);
    end[i] = simulate_dbm_terminal(v({0.5}), Theta(1.0), s, noise)[0];
  });
  CHECK(ks_one_sample(end, [](double x) { return normal_cdf(x, 0.5, 1.0); }).p_value > 0.01);
}

TEST_CASE("paths start exactly at x0 and stay ordered") {
  const auto s = scheme(1e-2, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    NoiseStream noise = derive_noise_stream(seed, 0, 0);
    const WeylVector x0 = seed % 2 ? v({0, 0, 0, 0}) : v({-0.3, 0.1, 0.1, 2.0 / 3.0});
    const auto path = simulate_dbm(x0, Theta(0.5 + 0.25 * static_cast<double>(seed % 5)), s, noise);
    CHECK(path.states.front() == x0);
    CHECK(path.times.back() == 1.0);
    for (const auto& x : path.states) CHECK(is_weyl(x));
  }
}

TEST_CASE("save stride keeps both ends") {
  const auto s = scheme(0.1, 1.0);
  NoiseStream noise = derive_noise_stream(3, 0, 0);
  PathOptions po;
  po.save_stride = 3;
  const auto path = simulate_dbm(v({0, 1}), Theta(1.0), s, noise, po);
  REQUIRE(path.times.size() == 5);
  const std::vector<double> expected = {0.0, 0.3, 0.6, 0.9, 1.0};
  for (std::size_t i = 0; i < 5; ++i) CHECK(path.times[i] == doctest::Approx(expected[i]));
  CHECK(path.times.back() == 1.0);
}

TEST_CASE("coupled paths from equal starts coincide") {
  NoiseStream noise = derive_noise_stream(4, 0, 0);
  const auto c = simulate_coupled(v({0, 1, 2}), v({0, 1, 2}), Theta(1.0), scheme(1e-3, 1.0), noise);
  CHECK(c.path_x.states == c.path_y.states);
}

TEST_CASE("N = 2, theta = 1 gap from zero matches the oracle") {
  constexpr std::size_t n = 100000;
  const auto s = scheme(1e-3, 1.0);
  std::vector<double> sim(n), oracle(n);
  parallel_for(n, [&](std::size_t i) {
    NoiseStream a = derive_noise_stream(5, 0, i), b = derive_noise_stream(5, 1, i);
    const auto x = simulate_dbm_terminal(v({0, 0}), Theta(1.0), s, a);
    const auto y = sample_beta_hermite(2, Theta(1.0), 1.0, b);
    sim[i] = x[1] - x[0];
    oracle[i] = y[1] - y[0];
  });
  CHECK(ks_two_sample(sim, oracle).p_value > 0.01);
}

TEST_CASE("beta-Hermite variance anchor: n = 1 is N(0, t)") {
  constexpr std::size_t n = 100000;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    NoiseStream noise = derive_noise_stream(6, 0, i);
    x[i] = sample_beta_hermite(1, Theta(2.7), 4.0, noise)[0];
  }
  CHECK(ks_one_sample(x, [](double u) { return normal_cdf(u, 0.0, 4.0); }).p_value > 0.01);
}

TEST_CASE("beta-Hermite n = 2 against a rejection sampler of the joint density") {
  // Density prop. to (x2 - x1)^2 exp(-(x1^2 + x2^2) / 2): propose the Gaussian
  // factor, accept with probability (x2 - x1)^2 / L^2 on |x2 - x1| <= L.
  constexpr std::size_t n = 100000;
  constexpr double L = 10.0;
  std::vector<double> rej_lo, rej_hi;
  NoiseStream noise = derive_noise_stream(7, 0, 0);
  while (rej_lo.size() < n) {
    double a = noise.normal(), b = noise.normal();
    const double d2 = (a - b) * (a - b);
    if (d2 > L * L || noise.uniform() * L * L > d2) continue;
    if (a > b) std::swap(a, b);
    rej_lo.push_back(a);
    rej_hi.push_back(b);
  }
  std::vector<double> lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    NoiseStream s = derive_noise_stream(7, 1, i);
    const auto x = sample_beta_hermite(2, Theta(1.0), 1.0, s);
    lo[i] = x[0];
    hi[i] = x[1];
  }
  CHECK(ks_two_sample(lo, rej_lo).p_value > 0.01);
  CHECK(ks_two_sample(hi, rej_hi).p_value > 0.01);
}

TEST_CASE("beta-Hermite n = 3, theta = 1: second moment against grid quadrature") {
  // Trapezoid rule on [-L, L]^3 of the unnormalized density; the integrand is
  // a polynomial times a Gaussian, so the rule converges spectrally.
  constexpr double L = 9.0, step = 0.1;
  const int m = static_cast<int>(std::lround(2 * L / step));
  double z = 0.0, s2 = 0.0;
  for (int a = 0; a <= m; ++a)
    for (int b = a + 1; b <= m; ++b)
      for (int c = b + 1; c <= m; ++c) {
        const double x = -L + a * step, y = -L + b * step, w = -L + c * step;
        const double vd = (y - x) * (w - x) * (w - y);
        const double f = vd * vd * std::exp(-(x * x + y * y + w * w) / 2);
        z += f;
        s2 += f * (x * x + y * y + w * w);
      }
  const double expected = s2 / z;
  constexpr std::size_t n = 100000;
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    NoiseStream noise = derive_noise_stream(8, 0, i);
    sq[i] = sample_beta_hermite(3, Theta(1.0), 1.0, noise).squaredNorm();
  }
  const auto m2 = mean_estimate(sq);
  CHECK(std::abs(m2.mean - expected) <= 3 * m2.std_error);
}

TEST_CASE("inverse gap moment: edge cases") {
  CHECK(estimate_inverse_gap_moment(2, Theta(1.0), 0.0, 0, 1.0, 10, 1).estimate == 1.0);
  CHECK_THROWS_AS(estimate_inverse_gap_moment(2, Theta(1.0), 3.0, 0, 1.0, 10, 1), DomainError);
  CHECK_THROWS_AS(estimate_inverse_gap_moment(2, Theta(1.0), 1.0, 1, 1.0, 10, 1), DomainError);
}

TEST_CASE("inverse gap moment: quadrature oracle and Brownian scaling") {
  // Gap density of the two-point ensemble: prop. to g^{2 theta} exp(-g^2 / (4 t)).
  boost::math::quadrature::exp_sinh<double> q;
  const double num = q.integrate([](double g) { return g * std::exp(-g * g / 4); });
  const double den = q.integrate([](double g) { return g * g * std::exp(-g * g / 4); });
  const auto e1 = estimate_inverse_gap_moment(2, Theta(1.0), 1.0, 0, 1.0, 100000, 9, 0, 100);
  CHECK(std::abs(e1.estimate - num / den) <= 3 * e1.std_error);
  const auto e4 = estimate_inverse_gap_moment(2, Theta(1.0), 1.0, 0, 4.0, 100000, 9, 1, 100);
  CHECK(std::abs(2 * e4.estimate - e1.estimate) <= 3 * std::hypot(2 * e4.std_error, e1.std_error));
}
