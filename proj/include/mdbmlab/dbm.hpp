#pragma once

#include "mdbmlab/core.hpp"
#include "mdbmlab/rng.hpp"

#include <Eigen/Core>

#include <vector>

namespace mdbmlab {

/// Sampled theta-DBM trajectory on the uniform grid of its scheme.
struct DBMPath {
  std::vector<double> times;
  std::vector<WeylVector> states;
  double theta = 1.0;
  SimScheme scheme;
};

/// Two paths advanced with identical Gaussian increments.
struct CoupledDBMPaths {
  DBMPath path_x;
  DBMPath path_y;
};

struct PathOptions {
  /// Keep every `save_stride`-th grid point; t = 0 and t = T are always kept.
  std::size_t save_stride = 1;
};

/// theta * sum_{j != i} 1 / (x_i - x_j). Throws SingularityError on a zero gap.
template <typename Derived>
Vector<typename Derived::Scalar> dbm_drift(const Eigen::MatrixBase<Derived>& x, double theta) {
  using S = typename Derived::Scalar;
  const Eigen::Index n = x.size();
  Vector<S> out = Vector<S>::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const S d = x[i] - x[j];
      if (d == S(0)) throw SingularityError("dbm_drift: coincident particles");
      const S w = S(theta) / d;
      out[i] += w;
      out[j] -= w;
    }
  return out;
}

/// One tamed Euler-Maruyama step of the theta-DBM:
///   x <- sort(x + clamp(drift, -cap, cap) dt + sqrt(dt) z), then the gap floor.
/// On the chamber boundary (some gap is zero) the drift is undefined and the
/// step is pure noise.
class DbmStepper {
 public:
  DbmStepper(double theta, const SimScheme& scheme);

  /// Returns true when the drift was applied, false for a noise-only step.
  bool step(Eigen::Ref<Eigen::VectorXd> x, const Eigen::Ref<const Eigen::VectorXd>& z);

  double dt() const { return dt_; }

 private:
  double theta_, dt_, sqrt_dt_, cap_, floor_;
  Eigen::VectorXd drift_;
};

/// L2 projection of an ascending vector onto {x : x[i+1] - x[i] >= floor}
/// (pool-adjacent-violators on x[i] - i * floor). Preserves the mean.
void project_min_gap(Eigen::Ref<Eigen::VectorXd> x, double floor);

/// Drives a tamed DBM from x0 and calls obs(step, t, state) at every grid
/// point, including step 0. Throws NumericalFailure on a non-finite state.
template <typename Observer>
void run_dbm(const WeylVector& x0, double theta, const SimScheme& scheme, NoiseStream& noise,
             Observer&& obs) {
  scheme.validate();
  if (!is_weyl(x0)) throw DomainError("initial condition is not in the Weyl chamber");
  DbmStepper stepper(theta, scheme);
  const std::size_t m = scheme.steps();
  Eigen::VectorXd x = x0, z(x0.size());
  obs(std::size_t{0}, 0.0, static_cast<const Eigen::VectorXd&>(x));
  for (std::size_t s = 1; s <= m; ++s) {
    noise.fill_normal(z);
    stepper.step(x, z);
    if (!x.allFinite()) throw NumericalFailure("non-finite DBM state", s);
    obs(s, s == m ? scheme.T : static_cast<double>(s) * stepper.dt(),
        static_cast<const Eigen::VectorXd&>(x));
  }
}

DBMPath simulate_dbm(const WeylVector& x0, Theta theta, const SimScheme& scheme,
                     NoiseStream& noise, const PathOptions& options = {});

/// State at time T only.
WeylVector simulate_dbm_terminal(const WeylVector& x0, Theta theta, const SimScheme& scheme,
                                 NoiseStream& noise);

CoupledDBMPaths simulate_coupled(const WeylVector& x0, const WeylVector& y0, Theta theta,
                                 const SimScheme& scheme, NoiseStream& noise,
                                 const PathOptions& options = {});

/// Exact sample of the density proportional to
///   prod_{i<j} (x_j - x_i)^{2 theta} prod_i exp(-x_i^2 / (2 t))
/// from the Dumitriu-Edelman tridiagonal model with beta = 2 theta:
/// diagonal N(0, 2), off-diagonal chi_{(n-i) beta}, scaled by sqrt(t / 2).
/// Variance anchor: n = 1 returns N(0, t).
WeylVector sample_beta_hermite(int n, Theta theta, double t, NoiseStream& noise);

struct MomentEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

/// Monte Carlo estimate of E[(X_{i+1}(t) - X_i(t))^{-p}] for the theta-DBM of
/// dimension n started at 0 (gap index i is 0-based), using exact samples
/// from sample_beta_hermite and a bootstrap standard error.
MomentEstimate estimate_inverse_gap_moment(int n, Theta theta, double p, int i, double t,
                                           std::size_t n_paths, std::uint64_t seed,
                                           std::uint64_t stream_id = 0,
                                           std::size_t bootstrap_resamples = 200);

}  // namespace mdbmlab
