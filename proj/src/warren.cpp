#include "mdbmlab/warren.hpp"

#include <algorithm>
#include <cmath>

namespace mdbmlab {

WarrenStepper::WarrenStepper(int n, double dt, bool frozen_barriers)
    : n_(n), dt_(dt), sqrt_dt_(std::sqrt(dt)), frozen_(frozen_barriers) {}

namespace {

/// Minimum over [0, h] of a Brownian bridge from a to b with variance var at
/// time h, drawn by inversion from u in (0, 1].
double bridge_minimum(double a, double b, double var, double u) {
  return 0.5 * (a + b - std::sqrt((b - a) * (b - a) - 2.0 * var * std::log(u)));
}

}  // namespace

std::size_t WarrenStepper::step(GTPattern<double>& p, const Eigen::Ref<const Eigen::VectorXd>& z,
                                const Eigen::VectorXd* u, Eigen::VectorXd* pushes) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  before_ = p.values();
  const Eigen::VectorXd& barrier_src = frozen_ ? before_ : p.values();
  // Distance processes move with both the particle and the barrier unless
  // the barrier is frozen over the step.
  const double var = (frozen_ ? 1.0 : 2.0) * dt_;
  std::size_t collapses = 0;
  p(1, 0) += sqrt_dt_ * z[0];
  for (int k = 2; k <= n_; ++k) {
    const int below = GTPattern<double>::offset(k - 1), here = GTPattern<double>::offset(k);
    for (int i = 0; i < k; ++i) {
      const bool has_lo = i > 0, has_hi = i < k - 1;
      double lo = has_lo ? barrier_src[below + i - 1] : -inf;
      double hi = has_hi ? barrier_src[below + i] : inf;
      if (lo > hi) {
        // Lower level crossed within the step: both barriers snap together.
        lo = hi = 0.5 * (lo + hi);
        ++collapses;
      }
      const int c = here + i;
      const double y0 = before_[c], dz = sqrt_dt_ * z[c];
      double extra = 0.0;
      if (u) {
        if (has_lo) {
          const double m = bridge_minimum(y0 - before_[below + i - 1], y0 + dz - lo, var, (*u)[2 * c]);
          extra += std::max(0.0, -m);
        }
        if (has_hi) {
          const double m = bridge_minimum(before_[below + i] - y0, hi - y0 - dz, var, (*u)[2 * c + 1]);
          extra -= std::max(0.0, -m);
        }
      }
      const auto r = skorokhod_step(y0, dz + extra, lo, hi);
      p.values()[c] = r.value;
      if (pushes) (*pushes)[c] += r.value - (y0 + dz);
    }
  }
  return collapses;
}

namespace {

template <typename Observer>
std::size_t run_warren(const GTPattern<double>& p0, const SimScheme& scheme, NoiseStream& noise,
                       const WarrenOptions& options, Eigen::VectorXd* pushes, Observer&& obs) {
  scheme.validate();
  if (!validate_interlacing(p0)) throw DomainError("initial pattern does not interlace");
  const int n = p0.levels();
  WarrenStepper stepper(n, scheme.dt(), options.frozen_barriers);
  const std::size_t m = scheme.steps();
  GTPattern<double> p = p0;
  Eigen::VectorXd z(p.values().size());
  Eigen::VectorXd u(options.bridge_correction ? 2 * p.values().size() : 0);
  std::size_t collapses = 0;
  obs(std::size_t{0}, 0.0, static_cast<const GTPattern<double>&>(p));
  for (std::size_t s = 1; s <= m; ++s) {
    noise.fill_normal(z);
    for (Eigen::Index j = 0; j < u.size(); ++j) u[j] = 1.0 - noise.uniform();
    collapses += stepper.step(p, z, options.bridge_correction ? &u : nullptr, pushes);
    if (!p.values().allFinite()) throw NumericalFailure("non-finite Warren state", s);
    obs(s, s == m ? scheme.T : static_cast<double>(s) * stepper.dt(),
        static_cast<const GTPattern<double>&>(p));
  }
  return collapses;
}

}  // namespace

WarrenPath simulate_warren(const GTPattern<double>& p0, const SimScheme& scheme, NoiseStream& noise,
                           const WarrenOptions& options) {
  WarrenPath path;
  path.scheme = scheme;
  const std::size_t last = scheme.steps();
  const std::size_t stride = std::max<std::size_t>(1, options.save_stride);
  Eigen::VectorXd pushes = Eigen::VectorXd::Zero(p0.values().size());
  path.barrier_collapses =
      run_warren(p0, scheme, noise, options, &pushes, [&](std::size_t s, double t, const GTPattern<double>& p) {
        if (s != 0 && s != last && s % stride != 0) return;
        path.times.push_back(t);
        path.states.push_back(p);
        path.pushes.push_back(pushes);
      });
  return path;
}

GTPattern<double> simulate_warren_terminal(const GTPattern<double>& p0, const SimScheme& scheme,
                                           NoiseStream& noise, const WarrenOptions& options) {
  GTPattern<double> out(p0.levels());
  const std::size_t last = scheme.steps();
  run_warren(p0, scheme, noise, options, nullptr, [&](std::size_t s, double, const GTPattern<double>& p) {
    if (s == last) out = p;
  });
  return out;
}

bool is_exceptional(const GTPattern<double>& p) {
  for (int k = 2; k <= p.levels() - 1; ++k)
    for (int i = 0; i + 1 < k; ++i)
      if (p(k, i) == p(k, i + 1)) return true;
  return false;
}

double exceptional_occupation(const WarrenPath& path, double tol, double t_min, double t_max) {
  std::size_t hit = 0, total = 0;
  for (std::size_t s = 0; s < path.states.size(); ++s) {
    const double t = path.times[s];
    if (t < t_min || t > t_max) continue;
    ++total;
    const auto& p = path.states[s];
    bool close = false;
    for (int k = 2; k <= p.levels() - 1 && !close; ++k)
      for (int i = 0; i + 1 < k && !close; ++i)
        if (p(k, i + 1) - p(k, i) < tol) close = true;
    if (close) ++hit;
  }
  return total == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(total);
}

}  // namespace mdbmlab
