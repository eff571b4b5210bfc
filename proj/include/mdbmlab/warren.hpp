#pragma once

#include "mdbmlab/core.hpp"
#include "mdbmlab/rng.hpp"

#include <vector>

namespace mdbmlab {

struct WarrenPath {
  std::vector<double> times;
  std::vector<GTPattern<double>> states;
  /// Signed reflection accumulated per coordinate (flat, level-major) up to
  /// each saved time; + off the lower barrier, - off the upper one.
  std::vector<Eigen::VectorXd> pushes;
  SimScheme scheme;
  std::size_t barrier_collapses = 0;
};

struct SkorokhodResult {
  double value;
  double push;
};

/// Two-sided one-step Skorokhod map: clamp y + dz into [lower, upper].
inline SkorokhodResult skorokhod_step(double y, double dz, double lower, double upper) {
  if (lower > upper) throw BarrierCrossing("skorokhod_step: lower barrier above upper barrier");
  const double free = y + dz;
  const double v = free < lower ? lower : (free > upper ? upper : free);
  return {v, v - free};
}

struct WarrenOptions {
  std::size_t save_stride = 1;
  /// Barriers from the lower level before (true) or after (false) its update.
  /// Frozen states interlace with the previous step's lower level only, so
  /// the saved patterns may leave the cone by O(sqrt(h)).
  bool frozen_barriers = false;
  /// Adds the reflection missed between grid times: the minimum of the
  /// particle-barrier distance over the step is drawn from its Brownian
  /// bridge law and any excursion below zero is pushed back. Off, the step
  /// is the plain clamp of skorokhod_step.
  bool bridge_correction = true;
};

/// Warren's process: free Brownian level 1, level k >= 2 reflected off the
/// level below. Default h for these runs is 1e-4.
class WarrenStepper {
 public:
  WarrenStepper(int n, double dt, bool frozen_barriers);
  /// z: standard normals, one per coordinate. u: uniforms on (0, 1], two per
  /// coordinate (lower side, upper side), or null for the plain clamp.
  /// Returns the number of barrier collapses resolved in this step.
  std::size_t step(GTPattern<double>& p, const Eigen::Ref<const Eigen::VectorXd>& z,
                   const Eigen::VectorXd* u = nullptr, Eigen::VectorXd* pushes = nullptr);
  double dt() const { return dt_; }

 private:
  int n_;
  double dt_, sqrt_dt_;
  bool frozen_;
  Eigen::VectorXd before_;
};

WarrenPath simulate_warren(const GTPattern<double>& p0, const SimScheme& scheme, NoiseStream& noise,
                           const WarrenOptions& options = {});

GTPattern<double> simulate_warren_terminal(const GTPattern<double>& p0, const SimScheme& scheme,
                                           NoiseStream& noise, const WarrenOptions& options = {});

/// Some level k in 2..N-1 has two equal adjacent entries.
bool is_exceptional(const GTPattern<double>& p);

/// Fraction of saved times in [t_min, t_max] at which some interior level has
/// an adjacent gap below tol (strictly).
double exceptional_occupation(const WarrenPath& path, double tol, double t_min = 0.0,
                              double t_max = std::numeric_limits<double>::infinity());

}  // namespace mdbmlab
