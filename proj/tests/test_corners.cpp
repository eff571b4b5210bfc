#include "mdbmlab/corners.hpp"
#include "mdbmlab/dbm.hpp"
#include "mdbmlab/parallel.hpp"
#include "mdbmlab/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace mdbmlab;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

WeylVector v(std::initializer_list<double> xs) {
  WeylVector out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

/// Random strictly interlacing pattern with the given top.
GTPattern<double> random_interior(const WeylVector& top, NoiseStream& noise) {
  const int n = static_cast<int>(top.size());
  GTPattern<double> p(n);
  p.top() = top;
  for (int k = n - 1; k >= 1; --k)
    for (int i = 0; i < k; ++i)
      p(k, i) = p(k + 1, i) + (0.05 + 0.9 * noise.uniform()) * (p(k + 1, i + 1) - p(k + 1, i));
  return p;
}

}  // namespace

TEST_CASE("da_log_density examples") {
  CHECK(da_log_density<double>(v({0, 2}), v({0.7}), 1.0) == doctest::Approx(std::log(0.5)));
  CHECK(da_log_density<double>(v({0, 1}), v({0.5}), 2.0) == doctest::Approx(std::log(1.5)));
  CHECK(da_log_density<double>(v({0, 1}), v({0.0}), 2.0) == kNegInf);
  CHECK(da_log_density<double>(v({0, 1}), v({1.5}), 2.0) == kNegInf);
  // theta = 1: boundary contact keeps the interior value.
  CHECK(da_log_density<double>(v({0, 2}), v({0.0}), 1.0) == doctest::Approx(std::log(0.5)));
  CHECK_THROWS_AS(da_log_density<double>(v({0, 0}), v({0.0}), 1.0), SingularityError);
  CHECK_THROWS_AS(da_log_density<double>(v({0, 1, 2}), v({0.5}), 1.0), ShapeError);
}

TEST_CASE("da_log_density in extended precision") {
  Vector<long double> hi(3), lo(2);
  hi << 0.0L, 1.0L, 3.0L;
  lo << 0.5L, 2.0L;
  const long double ld = da_log_density<long double>(hi, lo, 1.5L);
  CHECK(static_cast<double>(ld) == doctest::Approx(da_log_density<double>(v({0, 1, 3}), v({0.5, 2.0}), 1.5)));
}

TEST_CASE("gibbs_log_density at theta = 1 is flat in the lower levels") {
  NoiseStream noise = derive_noise_stream(31, 0, 0);
  for (const WeylVector& top : {v({0, 1, 3}), v({-1, 0, 2, 5})}) {
    const int n = static_cast<int>(top.size());
    double expected = 0.0;
    for (int k = 2; k <= n; ++k) expected += std::lgamma(static_cast<double>(k));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) expected -= std::log(top[j] - top[i]);
    for (int fill = 0; fill < 10; ++fill)
      CHECK(std::abs(gibbs_log_density(random_interior(top, noise), 1.0) - expected) <= 1e-12);
  }
}

TEST_CASE("gibbs_log_density reduces to da_log_density and detects violations") {
  const auto p = GTPattern<double>::from_levels({v({0.3}), v({0, 1})});
  CHECK(gibbs_log_density(p, 2.0) == da_log_density<double>(v({0, 1}), v({0.3}), 2.0));
  auto bad = GTPattern<double>::from_levels({v({0.3}), v({0.4, 1.0}), v({0, 1, 3})});
  CHECK(gibbs_log_density(bad, 1.5) == kNegInf);
}

TEST_CASE("da_normalization examples") {
  const auto u = da_normalization(v({0, 2}), Theta(1.0));
  CHECK(u.converged);
  CHECK(std::abs(u.value - 1.0) <= 1e-12);
  const auto b = da_normalization(v({0, 1}), Theta(2.0));
  CHECK(std::abs(b.value - 1.0) <= 1e-8);
  const auto c = da_normalization(v({0, 1, 3}), Theta(1.5));
  CHECK(c.converged);
  CHECK(std::abs(c.value - 1.0) <= 1e-6);
  CHECK_THROWS_AS(da_normalization(v({0, 1, 2, 3, 4}), Theta(1.0)), DomainError);
}

TEST_CASE("weighted Dixon-Anderson densities integrate to one") {
  for (const auto& s : {v({1, 2, 3}), v({0.7, 2.5, 1.0}), v({4, 1, 1.5})}) {
    const auto q = integrate_against_da(v({-1, 0.5, 2}), s, [](const SlotPoint&) { return 1.0; });
    CHECK(q.converged);
    CHECK(std::abs(q.value - 1.0) <= 1e-8);
  }
}

TEST_CASE("sample_da: theta = 1, k = 2 is uniform on the slot") {
  constexpr std::size_t n = 100000;
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    NoiseStream noise = derive_noise_stream(32, 0, i);
    z[i] = sample_da(v({-1, 3}), Theta(1.0), noise)[0];
  }
  CHECK(ks_one_sample(z, [](double x) { return std::clamp((x + 1) / 4, 0.0, 1.0); }).p_value > 0.01);
}

TEST_CASE("sample_da: theta = 2, k = 2 is Beta(2, 2)") {
  constexpr std::size_t n = 100000;
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    NoiseStream noise = derive_noise_stream(33, 0, i);
    z[i] = sample_da(v({0, 1}), Theta(2.0), noise)[0];
  }
  auto cdf = [](double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3 - 2 * x);
  };
  CHECK(ks_one_sample(z, cdf).p_value > 0.01);
}

TEST_CASE("sample_da: rejection and Gibbs agree") {
  constexpr std::size_t n = 10000;
  DaSamplerOptions gibbs;
  gibbs.method = DaMethod::gibbs;
  std::vector<double> r0(n), r1(n), g0(n), g1(n);
  for (std::size_t i = 0; i < n; ++i) {
    NoiseStream a = derive_noise_stream(34, 0, i), b = derive_noise_stream(34, 1, i);
    const auto r = sample_da(v({0, 1, 3}), Theta(1.5), a);
    const auto g = sample_da(v({0, 1, 3}), Theta(1.5), b, gibbs);
    r0[i] = r[0];
    r1[i] = r[1];
    g0[i] = g[0];
    g1[i] = g[1];
  }
  CHECK(ks_two_sample(r0, g0).p_value > 0.01);
  CHECK(ks_two_sample(r1, g1).p_value > 0.01);
}

TEST_CASE("samplers refuse theta below one") {
  NoiseStream noise = derive_noise_stream(35, 0, 0);
  CHECK_THROWS_AS(sample_da(v({0, 1}), Theta(0.8), noise), DomainError);
  CHECK_THROWS_AS(sample_corners(v({0, 1, 2}), Theta(0.8), noise), DomainError);
}

TEST_CASE("sample_corners: N = 2 equals sample_da and output interlaces") {
  NoiseStream a = derive_noise_stream(36, 0, 0), b = derive_noise_stream(36, 0, 0);
  const auto p = sample_corners(v({0, 2}), Theta(1.3), a);
  CHECK(p(1, 0) == sample_da(v({0, 2}), Theta(1.3), b)[0]);
  for (std::size_t i = 0; i < 500; ++i) {
    NoiseStream noise = derive_noise_stream(36, 1, i);
    const auto q = sample_corners(v({-2, -1, 0.5, 0.6, 4}), Theta(1.0 + static_cast<double>(i % 4)), noise);
    CHECK(validate_interlacing(q));
    CHECK(q.top() == v({-2, -1, 0.5, 0.6, 4}));
  }
}

TEST_CASE("sample_corners over a GUE top: bottom corner is N(0, t)") {
  constexpr std::size_t n = 100000;
  std::vector<double> x1(n);
  parallel_for(n, [&](std::size_t i) {
    NoiseStream noise = derive_noise_stream(37, 0, i);
    const auto top = sample_beta_hermite(3, Theta(1.0), 1.0, noise);
    x1[i] = sample_corners(top, Theta(1.0), noise)(1, 0);
  });
  CHECK(ks_one_sample(x1, [](double x) { return normal_cdf(x); }).p_value > 0.01);
}

TEST_CASE("sample_corners_boundary") {
  NoiseStream noise = derive_noise_stream(38, 0, 0);
  const auto zero = sample_corners_boundary(v({0, 0, 0}), Theta(2.0), noise);
  CHECK(zero.values().isZero());
  // Top (0, 0, 2), theta = 2: x^2_1 = 0 and x^2_2 / 2 ~ Beta(2 theta, theta).
  constexpr std::size_t n = 50000;
  std::vector<double> free(n);
  for (std::size_t i = 0; i < n; ++i) {
    NoiseStream s = derive_noise_stream(38, 1, i);
    const auto p = sample_corners_boundary(v({0, 0, 2}), Theta(2.0), s);
    CHECK(p(2, 0) == 0.0);
    CHECK(validate_interlacing(p));
    free[i] = p(2, 1);
  }
  auto cdf = [](double x) { return boost::math::ibeta(4.0, 2.0, std::clamp(x / 2, 0.0, 1.0)); };
  CHECK(ks_one_sample(free, cdf).p_value > 0.01);
}

TEST_CASE("gue_minor_oracle") {
  NoiseStream noise = derive_noise_stream(39, 0, 0);
  CHECK_THROWS_AS(gue_minor_oracle(3, 1.0, 1.5, noise), DomainError);
  for (double theta : {0.5, 1.0, 2.0})
    for (int i = 0; i < 200; ++i) CHECK(validate_interlacing(gue_minor_oracle(4, 1.0, theta, noise)));

  constexpr std::size_t n = 20000;
  std::vector<double> one(n);
  for (std::size_t i = 0; i < n; ++i) {
    NoiseStream s = derive_noise_stream(39, 1, i);
    one[i] = gue_minor_oracle(1, 2.0, 1.0, s)(1, 0);
  }
  CHECK(ks_one_sample(one, [](double x) { return normal_cdf(x, 0.0, 2.0); }).p_value > 0.01);

  // Top level of each matrix model against the tridiagonal sampler.
  for (double theta : {0.5, 1.0, 2.0}) {
    std::vector<double> mat_lo(n), mat_hi(n), tri_lo(n), tri_hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      NoiseStream a = derive_noise_stream(39, 2, i), b = derive_noise_stream(39, 3, i);
      const auto p = gue_minor_oracle(3, 1.0, theta, a);
      const auto x = sample_beta_hermite(3, Theta(theta), 1.0, b);
      mat_lo[i] = p(3, 0);
      mat_hi[i] = p(3, 2);
      tri_lo[i] = x[0];
      tri_hi[i] = x[2];
    }
    CHECK(ks_two_sample(mat_lo, tri_lo).p_value > 0.01);
    CHECK(ks_two_sample(mat_hi, tri_hi).p_value > 0.01);
  }
}

TEST_CASE("spacing bound constants") {
  for (int k = 1; k <= 5; ++k)
    for (double theta : {0.7, 1.0, 2.5}) CHECK(spacing_bound_constant_C1(k, 0.0, theta) == doctest::Approx(theta));
  CHECK(spacing_bound_constant_C1(2, 1.0, 2.0) == doctest::Approx(5.0));
  CHECK(spacing_bound_constant_C2(3, 0.0, 0.0, 1.5) == doctest::Approx(2.25));
  CHECK_THROWS_AS(spacing_bound_constant_C1(2, 2.0, 2.0), DomainError);
  CHECK_THROWS_AS(spacing_bound_constant_C2(2, 0.5, 1.0, 1.0), DomainError);
}

TEST_CASE("verify_spacing_bound examples") {
  const auto eq = verify_spacing_bound(v({0, 1, 3}), 1.5, 0.0, 1);
  CHECK(eq.pass);
  CHECK(eq.details["lhs"].get<double>() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(eq.details["bound"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  const auto closed = verify_spacing_bound(v({0, 1}), 2.0, 1.0, 0);
  CHECK(std::abs(closed.details["lhs"].get<double>() - 3.0) <= 1e-8);
  CHECK(std::abs(closed.details["bound"].get<double>() - 3.0) <= 1e-8);
  CHECK(verify_spacing_bound(v({0, 1, 2.5}), 2.0, 1.5, 0).pass);
  CHECK(verify_spacing_bound_pair(v({0, 1, 2.5, 4}), 2.0, 0.5, 1.0, 0, 2).pass);
}

TEST_CASE("k = 1 spacing bound is an equality") {
  // int (1 - z)^{-a} Beta(theta, theta) dz = B(theta, theta - a) / B(theta, theta).
  for (double theta : {1.0, 1.5, 3.0})
    for (double alpha : {0.2, 0.5, 0.9}) {
      const auto r = verify_spacing_bound(v({0, 1}), theta, alpha, 0);
      const double exact = std::exp(std::lgamma(theta - alpha) + std::lgamma(2 * theta) -
                                    std::lgamma(theta) - std::lgamma(2 * theta - alpha));
      CHECK(r.details["lhs"].get<double>() == doctest::Approx(exact).epsilon(1e-9));
      CHECK(r.details["bound"].get<double>() == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("da_pde_residual") {
  // N = 2, theta = 1: lambda^2 is constant in the lower level and linear
  // after multiplication by the top Vandermonde, so the central differences
  // are exact and only rounding remains.
  const auto p = GTPattern<double>::from_levels({v({1.0}), v({0, 2})});
  const auto r = da_pde_residual(p, 1.0, 1e-4);
  CHECK(r.single_level < 1e-9);
  CHECK(r.full < 1e-9);

  NoiseStream noise = derive_noise_stream(40, 0, 0);
  for (int trial = 0; trial < 3; ++trial) {
    const auto q = random_interior(v({-1, 0.2, 1.5}), noise);
    const auto coarse = da_pde_residual(q, 1.5, 1e-3), fine = da_pde_residual(q, 1.5, 1e-4);
    CHECK(coarse.single_level / fine.single_level == doctest::Approx(100).epsilon(0.5));
    CHECK(coarse.full / fine.full == doctest::Approx(100).epsilon(0.5));
  }
  CHECK_THROWS_AS(da_pde_residual(p, 1.5, 0.2), DomainError);
}
