#include "mdbmlab/core.hpp"
#include "mdbmlab/rng.hpp"

#include <doctest.h>

using namespace mdbmlab;

namespace {

WeylVector v(std::initializer_list<double> xs) {
  WeylVector out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("validate_interlacing examples") {
  CHECK(validate_interlacing(std::vector<WeylVector>{v({0.7}), v({0, 2})}));
  CHECK_FALSE(validate_interlacing(std::vector<WeylVector>{v({2.5}), v({0, 2})}));
  // Weak inequalities: contact with the level above is allowed.
  CHECK(validate_interlacing(std::vector<WeylVector>{v({0}), v({0, 2})}));
}

TEST_CASE("validate_interlacing rejects malformed shapes") {
  CHECK_THROWS_AS(validate_interlacing(std::vector<WeylVector>{v({0, 1}), v({0, 2})}), ShapeError);
  CHECK_THROWS_AS(GTPattern<double>(2, Eigen::VectorXd::Zero(4)), ShapeError);
}

TEST_CASE("interlacing is shift invariant and implies ordered levels") {
  NoiseStream noise = derive_noise_stream(11, 0, 0);
  int valid = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 2 + trial % 4;
    GTPattern<double> p(n);
    for (Eigen::Index j = 0; j < p.values().size(); ++j) p.values()[j] = std::round(4.0 * noise.normal()) / 2;
    // Sort each level so that roughly half the draws interlace.
    for (int k = 1; k <= n; ++k) std::sort(p.level(k).begin(), p.level(k).end());
    const bool ok = validate_interlacing(p);
    valid += ok;
    GTPattern<double> shifted = p;
    const double c = std::round(8.0 * noise.normal()) / 4;
    shifted.values().array() += c;
    CHECK(validate_interlacing(shifted) == ok);
    if (ok)
      for (int k = 1; k <= n; ++k) CHECK(is_weyl(p.level(k)));
  }
  CHECK(valid > 0);
}

TEST_CASE("GTPattern layout") {
  auto p = GTPattern<double>::from_levels({v({1}), v({0, 2}), v({-1, 1, 3})});
  CHECK(p.levels() == 3);
  CHECK(p.values().size() == 6);
  CHECK(p(2, 1) == 2.0);
  CHECK(p(3, 0) == -1.0);
  CHECK(p.top()[2] == 3.0);
  CHECK(GTPattern<double>::offset(3) == 3);
  CHECK(p.cast<long double>()(3, 2) == 3.0L);
  CHECK(is_interior(p));
  p(2, 0) = -1.0;
  CHECK(validate_interlacing(p));
  CHECK_FALSE(is_interior(p));
}

TEST_CASE("min_level_gap examples") {
  CHECK(min_level_gap(v({0, 2, 2.5})) == doctest::Approx(0.5));
  CHECK(min_level_gap(v({1, 1})) == 0.0);
  CHECK(min_level_gap(v({-3, 0, 5})) == 3.0);
  CHECK_THROWS_AS(min_level_gap(v({1})), DomainError);
}

TEST_CASE("min_pattern_gap covers cross-level distances") {
  const auto p = GTPattern<double>::from_levels({v({0.9}), v({0, 1}), v({-1, 0.5, 3})});
  CHECK(min_pattern_gap(p) == doctest::Approx(0.1));
}

TEST_CASE("Theta range") {
  CHECK(Theta(1.5).beta() == 3.0);
  CHECK_THROWS_AS(Theta(0.0), DomainError);
  CHECK_THROWS_AS(Theta(-1.0), DomainError);
  CHECK_THROWS_AS(Theta(std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("SimScheme grid") {
  SimScheme s;
  s.h = 0.3;
  s.T = 1.0;
  CHECK(s.steps() == 4);
  CHECK(s.dt() == doctest::Approx(0.25));
  // The cap uses the actual grid step T / steps().
  CHECK(s.drift_cap() == doctest::Approx(2.0));
  s.h = 0.5;
  CHECK(s.steps() == 2);
  s.h = 1.0;
  CHECK_NOTHROW(s.validate());
  s.h = 2.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.h = 0.1;
  s.taming_cap_exponent = 1.5;
  CHECK_THROWS_AS(s.validate(), DomainError);
}
