#include "mdbmlab/mdbm.hpp"

#include <algorithm>
#include <cmath>

namespace mdbmlab {

void ProjectionMonitor::merge(const ProjectionMonitor& o) {
  steps += o.steps;
  projected_steps += o.projected_steps;
  if (level_clips.size() < o.level_clips.size()) level_clips.resize(o.level_clips.size(), 0);
  for (std::size_t k = 0; k < o.level_clips.size(); ++k) level_clips[k] += o.level_clips[k];
  clipped_total += o.clipped_total;
  frozen_drift += o.frozen_drift;
}

bool project_interlacing(GTPattern<double>& p, ProjectionMonitor* monitor) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int n = p.levels();
  bool moved = false;
  for (int k = 2; k <= n; ++k)
    for (int i = 0; i < k; ++i) {
      const double lo = i == 0 ? -inf : p(k - 1, i - 1);
      const double hi = i == k - 1 ? inf : p(k - 1, i);
      const double v = p(k, i), c = std::clamp(v, lo, hi);
      if (c != v) {
        p(k, i) = c;
        moved = true;
        if (monitor) {
          ++monitor->level_clips[static_cast<std::size_t>(k - 1)];
          monitor->clipped_total += std::abs(c - v);
        }
      }
    }
  return moved;
}

MdbmStepper::MdbmStepper(int n, double theta, double dt, double drift_cap)
    : n_(n), theta_(theta), dt_(dt), sqrt_dt_(std::sqrt(dt)), cap_(drift_cap),
      drift_(GTPattern<double>::size_for(n)) {}

void MdbmStepper::step(GTPattern<double>& p, const Eigen::Ref<const Eigen::VectorXd>& z,
                       ProjectionMonitor* monitor) {
  const double w = theta_ - 1.0;
  drift_.setZero();
  for (int k = 2; k <= n_; ++k)
    for (int i = 0; i < k; ++i) {
      const double xi = p(k, i);
      double v = 0.0;
      bool contact = false;
      for (int j = 0; j < k - 1 && !contact; ++j) {
        const double d = xi - p(k - 1, j);
        if (d == 0.0) contact = true;
        v += 1.0 / d;
      }
      for (int j = 0; j < k && !contact; ++j) {
        if (j == i) continue;
        const double d = xi - p(k, j);
        if (d == 0.0) contact = true;
        v -= 1.0 / d;
      }
      if (contact) {
        if (monitor) ++monitor->frozen_drift;
        continue;
      }
      drift_[GTPattern<double>::offset(k) + i] = std::clamp(w * v, -cap_, cap_);
    }
  p.values() += dt_ * drift_ + sqrt_dt_ * z;
  // Same-level order first (each level is a Weyl vector), then interlacing.
  for (int k = 2; k <= n_; ++k) {
    auto lv = p.level(k);
    std::sort(lv.data(), lv.data() + k);
  }
  const bool moved = project_interlacing(p, monitor);
  if (monitor) {
    ++monitor->steps;
    if (moved) ++monitor->projected_steps;
  }
}

SimScheme effective_mdbm_scheme(double theta, const SimScheme& scheme, const MdbmOptions& options) {
  SimScheme s = scheme;
  if (options.halve_step_near_one && theta > 1.0 && theta <= 1.05) s.h = scheme.h / 2.0;
  return s;
}

namespace {

void check_valid(const GTPattern<double>& p, std::size_t step) {
  if (!validate_interlacing(p)) throw NumericalFailure("MDBM state left the cone", step);
}

}  // namespace

MDBMPath simulate_mdbm(const GTPattern<double>& p0, Theta theta, const SimScheme& scheme,
                       NoiseStream& noise, const MdbmOptions& options) {
  MDBMPath path;
  path.theta = theta;
  path.scheme = effective_mdbm_scheme(theta, scheme, options);
  const std::size_t last = path.scheme.steps();
  const std::size_t stride = std::max<std::size_t>(1, options.save_stride);
  path.monitor = run_mdbm(p0, theta, path.scheme, noise,
                          [&](std::size_t s, double t, const GTPattern<double>& p) {
                            check_valid(p, s);
                            if (s != 0 && s != last && s % stride != 0) return;
                            path.times.push_back(t);
                            path.states.push_back(p);
                          });
  return path;
}

GTPattern<double> simulate_mdbm_terminal(const GTPattern<double>& p0, Theta theta,
                                         const SimScheme& scheme, NoiseStream& noise,
                                         const MdbmOptions& options, ProjectionMonitor* monitor) {
  const SimScheme eff = effective_mdbm_scheme(theta, scheme, options);
  const std::size_t last = eff.steps();
  GTPattern<double> out(p0.levels());
  const auto mon = run_mdbm(p0, theta, eff, noise, [&](std::size_t s, double, const GTPattern<double>& p) {
    if (s == last) {
      check_valid(p, s);
      out = p;
    }
  });
  if (monitor) *monitor = mon;
  return out;
}

GTPattern<double> gibbs_initial(const TopSampler& mu0, Theta theta, NoiseStream& noise,
                                const DaSamplerOptions& options) {
  if (!(theta >= 1.0)) throw DomainError("gibbs_initial requires theta >= 1");
  const WeylVector top = mu0(noise);
  if (!is_weyl(top)) throw DomainError("mu0 sampler returned a point outside the Weyl chamber");
  return sample_corners_boundary(top, theta, noise, options);
}

}  // namespace mdbmlab
