#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdbmlab {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A point of the closed Weyl chamber: an ascending real vector.
using WeylVector = Vector<double>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Level k of a pattern does not have k entries.
struct ShapeError : Error {
  using Error::Error;
};

/// Argument outside the domain of an operation (theta range, moment order, ...).
struct DomainError : Error {
  using Error::Error;
};

/// A singular expression was requested at a coincidence of points.
struct SingularityError : Error {
  using Error::Error;
};

struct NumericalFailure : Error {
  NumericalFailure(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_index(step) {}
  std::size_t step_index;
};

struct BarrierCrossing : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Interaction strength
// ---------------------------------------------------------------------------

/// Interaction strength theta (beta = 2 theta). Operations check their own
/// stricter ranges (theta >= 1/2 for dynamics, theta >= 1 for samplers, ...).
class Theta {
 public:
  explicit Theta(double value);
  double value() const { return value_; }
  double beta() const { return 2.0 * value_; }
  operator double() const { return value_; }

 private:
  double value_;
};

// ---------------------------------------------------------------------------
// Gelfand-Tsetlin patterns
// ---------------------------------------------------------------------------

/// Triangular array (x_i^k), 1 <= i <= k <= N, stored level-major in a flat
/// vector. Level k (1-based) holds k entries and is exposed as an Eigen
/// segment, so whole-pattern updates are plain vector expressions.
template <typename Scalar = double>
class GTPattern {
 public:
  using Vec = Vector<Scalar>;

  GTPattern() = default;

  /// All-zero pattern with n levels.
  explicit GTPattern(int n) : n_(n), values_(Vec::Zero(size_for(n))) {
    if (n < 1) throw ShapeError("pattern needs at least one level");
  }

  GTPattern(int n, Vec values) : n_(n), values_(std::move(values)) {
    if (n < 1) throw ShapeError("pattern needs at least one level");
    if (values_.size() != size_for(n))
      throw ShapeError("flat pattern of " + std::to_string(values_.size()) +
                       " entries does not have " + std::to_string(n) + " levels");
  }

  static GTPattern from_levels(const std::vector<Vec>& levels) {
    const int n = static_cast<int>(levels.size());
    if (n < 1) throw ShapeError("pattern needs at least one level");
    Vec flat(size_for(n));
    for (int k = 1; k <= n; ++k) {
      if (levels[k - 1].size() != k)
        throw ShapeError("level " + std::to_string(k) + " has " +
                         std::to_string(levels[k - 1].size()) + " entries");
      flat.segment(offset(k), k) = levels[k - 1];
    }
    return GTPattern(n, std::move(flat));
  }

  static constexpr int size_for(int n) { return n * (n + 1) / 2; }
  static constexpr int offset(int k) { return k * (k - 1) / 2; }

  int levels() const { return n_; }

  auto level(int k) { return values_.segment(offset(k), k); }
  auto level(int k) const { return values_.segment(offset(k), k); }
  auto top() { return level(n_); }
  auto top() const { return level(n_); }

  /// Entry i (0-based) of level k (1-based).
  Scalar& operator()(int k, int i) { return values_[offset(k) + i]; }
  Scalar operator()(int k, int i) const { return values_[offset(k) + i]; }

  Vec& values() { return values_; }
  const Vec& values() const { return values_; }

  template <typename Other>
  GTPattern<Other> cast() const {
    return GTPattern<Other>(n_, values_.template cast<Other>());
  }

  bool operator==(const GTPattern& o) const { return n_ == o.n_ && values_ == o.values_; }

 private:
  int n_ = 0;
  Vec values_;
};

// ---------------------------------------------------------------------------
// Simulation scheme
// ---------------------------------------------------------------------------

struct SimScheme {
  double h = 1e-3;                    ///< requested time step
  double T = 1.0;                     ///< horizon
  double taming_cap_exponent = 0.5;   ///< |drift_i| <= h^{-kappa}
  double min_gap_floor = 0.0;         ///< post-step same-level gap floor
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  void validate() const;
  /// Number of steps on the uniform grid; the actual step T/steps() is <= h.
  std::size_t steps() const;
  double dt() const { return T / static_cast<double>(steps()); }
  double drift_cap() const;
};

// ---------------------------------------------------------------------------
// Geometry predicates
// ---------------------------------------------------------------------------

template <typename Derived>
bool is_weyl(const Eigen::MatrixBase<Derived>& v) {
  for (Eigen::Index i = 0; i + 1 < v.size(); ++i)
    if (!(v[i] <= v[i + 1])) return false;
  return v.size() >= 1;
}

template <typename Derived>
bool is_strictly_ordered(const Eigen::MatrixBase<Derived>& v) {
  for (Eigen::Index i = 0; i + 1 < v.size(); ++i)
    if (!(v[i] < v[i + 1])) return false;
  return v.size() >= 1;
}

/// x_i^{k+1} <= x_i^k <= x_{i+1}^{k+1} with exact comparisons.
template <typename Scalar>
bool validate_interlacing(const GTPattern<Scalar>& p) {
  for (int k = 1; k < p.levels(); ++k)
    for (int i = 0; i < k; ++i)
      if (!(p(k + 1, i) <= p(k, i) && p(k, i) <= p(k + 1, i + 1))) return false;
  return true;
}

/// Same predicate on a ragged list of levels; throws ShapeError when level k
/// does not have k entries.
bool validate_interlacing(const std::vector<Vector<double>>& levels);

/// Strict interlacing and strictly ordered levels (interior of the cone).
template <typename Scalar>
bool is_interior(const GTPattern<Scalar>& p) {
  for (int k = 1; k < p.levels(); ++k)
    for (int i = 0; i < k; ++i)
      if (!(p(k + 1, i) < p(k, i) && p(k, i) < p(k + 1, i + 1))) return false;
  return true;
}

/// min_i (v[i+1] - v[i]); DomainError when v has a single entry.
double min_level_gap(const Eigen::Ref<const Eigen::VectorXd>& v);

/// Smallest gap over all same-level neighbours and all interlacing pairs.
double min_pattern_gap(const GTPattern<double>& p);

}  // namespace mdbmlab
