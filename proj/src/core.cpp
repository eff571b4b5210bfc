#include "mdbmlab/core.hpp"
#include "mdbmlab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

namespace mdbmlab {

namespace {
std::atomic<unsigned> g_threads{0};
}

unsigned default_threads() {
  const unsigned n = g_threads.load();
  if (n != 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_threads(unsigned n) { g_threads.store(n); }

Theta::Theta(double value) : value_(value) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw DomainError("theta must be a positive finite number, got " + std::to_string(value));
}

void SimScheme::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("time step h must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("horizon T must be positive");
  if (h > T) throw DomainError("time step h exceeds horizon T");
  if (!(taming_cap_exponent > 0.0 && taming_cap_exponent <= 1.0))
    throw DomainError("taming cap exponent must lie in (0, 1]");
  if (!(min_gap_floor >= 0.0)) throw DomainError("gap floor must be non-negative");
}

std::size_t SimScheme::steps() const {
  const double m = std::ceil(T / h - 1e-9);
  return static_cast<std::size_t>(std::max(1.0, m));
}

double SimScheme::drift_cap() const { return std::pow(dt(), -taming_cap_exponent); }

bool validate_interlacing(const std::vector<Vector<double>>& levels) {
  return validate_interlacing(GTPattern<double>::from_levels(levels));
}

double min_level_gap(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() < 2) throw DomainError("min_level_gap needs at least two entries");
  return (v.tail(v.size() - 1) - v.head(v.size() - 1)).minCoeff();
}

double min_pattern_gap(const GTPattern<double>& p) {
  double gap = std::numeric_limits<double>::infinity();
  for (int k = 2; k <= p.levels(); ++k) {
    gap = std::min(gap, min_level_gap(p.level(k)));
    for (int i = 0; i < k - 1; ++i)
      gap = std::min({gap, p(k - 1, i) - p(k, i), p(k, i + 1) - p(k - 1, i)});
  }
  return gap;
}

}  // namespace mdbmlab
