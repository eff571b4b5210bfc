#pragma once

#include "mdbmlab/core.hpp"
#include "mdbmlab/corners.hpp"
#include "mdbmlab/rng.hpp"

#include <functional>
#include <vector>

namespace mdbmlab {

/// Counters for the interlacing projection of simulate_mdbm.
struct ProjectionMonitor {
  std::size_t steps = 0;
  std::size_t projected_steps = 0;       ///< steps in which any coordinate was clipped
  std::vector<std::size_t> level_clips;  ///< clipped coordinates per level (index k-1)
  double clipped_total = 0.0;            ///< sum of |clip| over all coordinates and steps
  std::size_t frozen_drift = 0;          ///< coordinates stepped without drift (contact)

  double projected_fraction() const {
    return steps == 0 ? 0.0 : static_cast<double>(projected_steps) / static_cast<double>(steps);
  }
  void merge(const ProjectionMonitor& o);
};

struct MDBMPath {
  std::vector<double> times;
  std::vector<GTPattern<double>> states;
  double theta = 2.0;
  SimScheme scheme;  ///< as run (h may be halved near theta = 1)
  ProjectionMonitor monitor;
};

struct MdbmOptions {
  std::size_t save_stride = 1;
  /// theta in (1, 1.05] runs use h / 2.
  bool halve_step_near_one = true;
};

/// Flat (level-major) drift b_i^k of the multilevel SDE; level 1 is 0.
/// Throws SingularityError on any contact entering the formula.
template <typename Scalar>
Vector<Scalar> mdbm_drift(const GTPattern<Scalar>& p, double theta) {
  const int n = p.levels();
  Vector<Scalar> out = Vector<Scalar>::Zero(p.values().size());
  const Scalar w = Scalar(theta) - Scalar(1);
  for (int k = 2; k <= n; ++k)
    for (int i = 0; i < k; ++i) {
      const Scalar xi = p(k, i);
      Scalar v = 0;
      for (int j = 0; j < k - 1; ++j) {
        const Scalar d = xi - p(k - 1, j);
        if (d == Scalar(0)) throw SingularityError("mdbm_drift: cross-level contact");
        v += Scalar(1) / d;
      }
      for (int j = 0; j < k; ++j) {
        if (j == i) continue;
        const Scalar d = xi - p(k, j);
        if (d == Scalar(0)) throw SingularityError("mdbm_drift: coincident particles on a level");
        v -= Scalar(1) / d;
      }
      out[GTPattern<Scalar>::offset(k) + i] = w * v;
    }
  return out;
}

/// Clips level k into the slots of level k-1, for k = 2..N in that order.
/// One bottom-up pass yields an interlacing pattern whenever each level is
/// sorted on entry; level 1 is never moved. Returns true if anything moved.
bool project_interlacing(GTPattern<double>& p, ProjectionMonitor* monitor = nullptr);

/// One tamed Euler step of the multilevel SDE followed by the projection.
/// A coordinate whose drift formula hits a zero difference is advanced by
/// noise only for this step.
class MdbmStepper {
 public:
  MdbmStepper(int n, double theta, double dt, double drift_cap);
  void step(GTPattern<double>& p, const Eigen::Ref<const Eigen::VectorXd>& z,
            ProjectionMonitor* monitor = nullptr);
  double dt() const { return dt_; }

 private:
  int n_;
  double theta_, dt_, sqrt_dt_, cap_;
  Eigen::VectorXd drift_;
};

/// Scheme actually used for theta (halved h for theta in (1, 1.05] if enabled).
SimScheme effective_mdbm_scheme(double theta, const SimScheme& scheme, const MdbmOptions& options);

/// Drives an MDBM from p0 and calls obs(step, t, pattern) at every grid point.
template <typename Observer>
ProjectionMonitor run_mdbm(const GTPattern<double>& p0, double theta, const SimScheme& scheme,
                           NoiseStream& noise, Observer&& obs) {
  scheme.validate();
  if (!(theta > 1.0)) throw DomainError("simulate_mdbm requires theta > 1");
  if (!validate_interlacing(p0)) throw DomainError("initial pattern does not interlace");
  const int n = p0.levels();
  MdbmStepper stepper(n, theta, scheme.dt(), scheme.drift_cap());
  ProjectionMonitor monitor;
  monitor.level_clips.assign(static_cast<std::size_t>(n), 0);
  const std::size_t m = scheme.steps();
  GTPattern<double> p = p0;
  Eigen::VectorXd z(p.values().size());
  obs(std::size_t{0}, 0.0, static_cast<const GTPattern<double>&>(p));
  for (std::size_t s = 1; s <= m; ++s) {
    noise.fill_normal(z);
    stepper.step(p, z, &monitor);
    if (!p.values().allFinite()) throw NumericalFailure("non-finite MDBM state", s);
    obs(s, s == m ? scheme.T : static_cast<double>(s) * stepper.dt(),
        static_cast<const GTPattern<double>&>(p));
  }
  return monitor;
}

MDBMPath simulate_mdbm(const GTPattern<double>& p0, Theta theta, const SimScheme& scheme,
                       NoiseStream& noise, const MdbmOptions& options = {});

/// State at the horizon only; the monitor is written if given.
GTPattern<double> simulate_mdbm_terminal(const GTPattern<double>& p0, Theta theta,
                                         const SimScheme& scheme, NoiseStream& noise,
                                         const MdbmOptions& options = {},
                                         ProjectionMonitor* monitor = nullptr);

using TopSampler = std::function<WeylVector(NoiseStream&)>;

/// Top ~ mu0 then the corners law below it. Tops with coincident points get
/// collapsed slots filled with the shared value.
GTPattern<double> gibbs_initial(const TopSampler& mu0, Theta theta, NoiseStream& noise,
                                const DaSamplerOptions& options = {});

}  // namespace mdbmlab
