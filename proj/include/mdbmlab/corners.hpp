#pragma once

#include "mdbmlab/core.hpp"
#include "mdbmlab/report.hpp"
#include "mdbmlab/rng.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace mdbmlab {

// ---------------------------------------------------------------------------
// Dixon-Anderson densities
// ---------------------------------------------------------------------------

/// Log of the weighted Dixon-Anderson density
///
///   Gamma(sum s) / prod Gamma(s_j) * prod_{j<m} (x_m - x_j)^{1 - s_j - s_m}
///     * prod_{i,j} |z_i - x_j|^{s_j - 1} * prod_{i<n} (z_n - z_i)
///
/// of z (k-1 points) given strictly ordered x (k points) and weights s > 0.
/// Equal weights s_j = theta give lambda^{k,theta}; a cluster of m merged
/// source points with theta each behaves as one point of weight m theta.
///
/// Returns -inf outside the interlacing region. At a contact z_i = x_j the
/// factor |z_i - x_j|^{s_j - 1} is 0 (s_j > 1, -inf), 1 (s_j == 1, interior
/// value kept) or unbounded (s_j < 1, +inf).
template <typename Scalar>
Scalar da_log_density_weighted(const Vector<Scalar>& x, const Vector<Scalar>& s,
                               const Vector<Scalar>& z) {
  using std::lgamma;
  using std::log;
  const Eigen::Index k = x.size();
  if (k < 2) throw DomainError("Dixon-Anderson density needs at least two source points");
  if (s.size() != k) throw ShapeError("weight vector does not match source points");
  if (z.size() != k - 1) throw ShapeError("target level must have one point fewer than the source");
  if (!is_strictly_ordered(x)) throw SingularityError("Dixon-Anderson source has coincident points");

  constexpr Scalar neg_inf = -std::numeric_limits<Scalar>::infinity();
  constexpr Scalar pos_inf = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i + 1 < k; ++i)
    if (!(x[i] <= z[i] && z[i] <= x[i + 1])) return neg_inf;

  Scalar total = 0;
  for (Eigen::Index j = 0; j < k; ++j) total += s[j];
  Scalar out = lgamma(total);
  for (Eigen::Index j = 0; j < k; ++j) out -= lgamma(s[j]);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index m = j + 1; m < k; ++m) out += (Scalar(1) - s[j] - s[m]) * log(x[m] - x[j]);
  for (Eigen::Index i = 0; i + 1 < k; ++i)
    for (Eigen::Index n = i + 1; n + 1 < k; ++n) out += log(z[n] - z[i]);

  bool unbounded = false;
  for (Eigen::Index i = 0; i + 1 < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const Scalar e = s[j] - Scalar(1);
      if (e == Scalar(0)) continue;
      const Scalar d = z[i] > x[j] ? z[i] - x[j] : x[j] - z[i];
      if (d == Scalar(0)) {
        if (e > Scalar(0)) return neg_inf;
        unbounded = true;
        continue;
      }
      out += e * log(d);
    }
  if (unbounded && out != neg_inf) return pos_inf;
  return out;
}

/// log lambda^{k,theta}(x_hi, x_lo).
template <typename Scalar>
Scalar da_log_density(const Vector<Scalar>& x_hi, const Vector<Scalar>& x_lo, Scalar theta) {
  return da_log_density_weighted<Scalar>(x_hi, Vector<Scalar>::Constant(x_hi.size(), theta), x_lo);
}

/// log Lambda^{N,theta}: sum over k = 2..N of log lambda^k(level k, level k-1).
/// The top level must be strictly ordered; -inf as soon as one kernel vanishes.
template <typename Scalar>
Scalar gibbs_log_density(const GTPattern<Scalar>& p, Scalar theta) {
  const int n = p.levels();
  if (n >= 2 && !is_strictly_ordered(p.top()))
    throw SingularityError("Gibbs density needs a strictly ordered top level");
  Scalar out = 0;
  for (int k = n; k >= 2; --k) {
    const Vector<Scalar> hi = p.level(k), lo = p.level(k - 1);
    const Scalar term = da_log_density<Scalar>(hi, lo, theta);
    if (term == -std::numeric_limits<Scalar>::infinity()) return term;
    out += term;
    if (k > 2 && !is_strictly_ordered(lo)) return -std::numeric_limits<Scalar>::infinity();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quadrature over the interlacing region
// ---------------------------------------------------------------------------

struct QuadratureSpec {
  double tolerance = 1e-11;   ///< relative tolerance per nested tanh-sinh call
  std::size_t max_refinements = 15;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

/// A point z of R(x) together with its distances to the slot ends,
/// below_i = z_i - x_i and above_i = x_{i+1} - z_i, carried separately so
/// integrands singular at a slot end keep full relative accuracy there.
struct SlotPoint {
  Eigen::VectorXd z, below, above;
};

/// Integral over R(x) = prod_i [x_i, x_{i+1}] of weight(z) * lambda_s(x, z).
QuadratureResult integrate_against_da(const Eigen::VectorXd& x, const Eigen::VectorXd& s,
                                      const std::function<double(const SlotPoint&)>& weight,
                                      const QuadratureSpec& spec = {});

/// Integral of lambda^{k,theta}(x_hi, .) over R(x_hi); 1 by the Dixon-Anderson
/// identity. Limited to k <= 4 (three nested integrals).
QuadratureResult da_normalization(const WeylVector& x_hi, Theta theta, const QuadratureSpec& spec = {});

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

enum class DaMethod { rejection, gibbs };

struct DaSamplerOptions {
  DaMethod method = DaMethod::rejection;
  int gibbs_sweeps = 20;          ///< burn-in sweeps from slot midpoints
  double envelope_safety = 1.5;   ///< multiplier on the grid-search maximum
  double min_acceptance = 1e-6;   ///< below this rejection falls back to Gibbs
};

/// Sample of level k-1 given level k = x_hi (strictly ordered), theta >= 1.
WeylVector sample_da(const WeylVector& x_hi, Theta theta, NoiseStream& noise,
                     const DaSamplerOptions& options = {});

/// Weighted variant; all weights must be >= 1 so the density is bounded.
WeylVector sample_da_weighted(const Eigen::VectorXd& x, const Eigen::VectorXd& s, NoiseStream& noise,
                              const DaSamplerOptions& options = {});

/// Exact rejection acceptance probability 1 / (envelope * volume of R(x)).
double da_rejection_acceptance(const Eigen::VectorXd& x, const Eigen::VectorXd& s,
                               double envelope_safety = 1.5);

/// Levels N-1 down to 1 by repeated sample_da. Requires theta >= 1 and a
/// strictly ordered top.
GTPattern<double> sample_corners(const WeylVector& top, Theta theta, NoiseStream& noise,
                                 const DaSamplerOptions& options = {});

/// Same as sample_corners but accepts tops with coincident points: collapsed
/// slots take the shared value and the free slots follow the limiting
/// (weighted) Dixon-Anderson law in which a cluster of m equal points acts as
/// one point of weight m theta.
GTPattern<double> sample_corners_boundary(const WeylVector& top, Theta theta, NoiseStream& noise,
                                          const DaSamplerOptions& options = {});

/// Eigenvalues of all top-left minors of a Gaussian matrix at variance t:
/// real symmetric (theta = 1/2), complex Hermitian (theta = 1) or quaternion
/// self-dual (theta = 2). Any other theta is a DomainError.
GTPattern<double> gue_minor_oracle(int n, double t, double theta, NoiseStream& noise);

// ---------------------------------------------------------------------------
// Spacing bounds
// ---------------------------------------------------------------------------

/// Gamma(theta - a + 1) Gamma((k+1) theta) / (Gamma(theta) Gamma((k+1) theta - a)).
double spacing_bound_constant_C1(int k, double alpha, double theta);

/// Gamma(theta - a1 + 1) Gamma(theta - a2 + 1) Gamma((k+1) theta)
///   / (Gamma(theta)^2 Gamma((k+1) theta - a1 - a2)).
double spacing_bound_constant_C2(int k, double alpha1, double alpha2, double theta);

/// Checks  int (x_{a+1} - z_a)^{-alpha} lambda^{k+1}(x, z) dz
///           <= C1(k, alpha, theta) / (theta - alpha) * (x_{a+1} - x_a)^{-alpha}
/// for x = x_hi with k+1 entries and 0-based slot a, by quadrature.
TestReport verify_spacing_bound(const WeylVector& x_hi, double theta, double alpha, int a,
                                const QuadratureSpec& spec = {});

/// Two-slot version with C2 (slots a != b).
TestReport verify_spacing_bound_pair(const WeylVector& x_hi, double theta, double alpha1,
                                     double alpha2, int a, int b, const QuadratureSpec& spec = {});

// ---------------------------------------------------------------------------
// PDE residuals
// ---------------------------------------------------------------------------

struct PdeResidual {
  double single_level = 0.0;  ///< |A*_{N-1} lambda^N - A_N lambda^N| / lambda^N
  double full = 0.0;          ///< |L*_{1..N-1} Lambda^N - A_N Lambda^N| / Lambda^N
};

/// Central finite differences (in extended precision) of the analytic
/// densities. x must be strictly interlacing with every gap >= 10 fd_step,
/// N in {2, 3, 4}.
PdeResidual da_pde_residual(const GTPattern<double>& x, double theta, double fd_step);

}  // namespace mdbmlab
