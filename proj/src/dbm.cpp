#include "mdbmlab/dbm.hpp"

#include "mdbmlab/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace mdbmlab {

namespace {

void require_dynamics_theta(double theta) {
  if (!(theta >= 0.5)) throw DomainError("DBM dynamics require theta >= 1/2");
}

bool keep(std::size_t step, std::size_t last, std::size_t stride) {
  return step == 0 || step == last || step % stride == 0;
}

}  // namespace

DbmStepper::DbmStepper(double theta, const SimScheme& scheme)
    : theta_(theta),
      dt_(scheme.dt()),
      sqrt_dt_(std::sqrt(scheme.dt())),
      cap_(scheme.drift_cap()),
      floor_(scheme.min_gap_floor) {}

bool DbmStepper::step(Eigen::Ref<Eigen::VectorXd> x, const Eigen::Ref<const Eigen::VectorXd>& z) {
  const Eigen::Index n = x.size();
  bool with_drift = n > 1;
  for (Eigen::Index i = 0; with_drift && i + 1 < n; ++i)
    if (!(x[i] < x[i + 1])) with_drift = false;

  if (with_drift) {
    drift_.setZero(n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double w = theta_ / (x[i] - x[j]);
        drift_[i] += w;
        drift_[j] -= w;
      }
    x += dt_ * drift_.cwiseMax(-cap_).cwiseMin(cap_);
  }
  x += sqrt_dt_ * z;
  std::sort(x.data(), x.data() + n);
  if (floor_ > 0.0 && n > 1 && min_level_gap(x) < floor_) project_min_gap(x, floor_);
  return with_drift;
}

void project_min_gap(Eigen::Ref<Eigen::VectorXd> x, double floor) {
  const Eigen::Index n = x.size();
  // Pool adjacent violators on y_i = x_i - i * floor.
  std::vector<double> level_sum;
  std::vector<Eigen::Index> level_count;
  for (Eigen::Index i = 0; i < n; ++i) {
    level_sum.push_back(x[i] - static_cast<double>(i) * floor);
    level_count.push_back(1);
    while (level_sum.size() > 1) {
      const std::size_t b = level_sum.size() - 1;
      const double mean_b = level_sum[b] / static_cast<double>(level_count[b]);
      const double mean_a = level_sum[b - 1] / static_cast<double>(level_count[b - 1]);
      if (mean_a <= mean_b) break;
      level_sum[b - 1] += level_sum[b];
      level_count[b - 1] += level_count[b];
      level_sum.pop_back();
      level_count.pop_back();
    }
  }
  Eigen::Index i = 0;
  for (std::size_t b = 0; b < level_sum.size(); ++b) {
    const double mean = level_sum[b] / static_cast<double>(level_count[b]);
    for (Eigen::Index c = 0; c < level_count[b]; ++c, ++i)
      x[i] = mean + static_cast<double>(i) * floor;
  }
}

DBMPath simulate_dbm(const WeylVector& x0, Theta theta, const SimScheme& scheme,
                     NoiseStream& noise, const PathOptions& options) {
  require_dynamics_theta(theta);
  DBMPath path;
  path.theta = theta;
  path.scheme = scheme;
  const std::size_t last = scheme.steps();
  const std::size_t stride = std::max<std::size_t>(1, options.save_stride);
  run_dbm(x0, theta, scheme, noise, [&](std::size_t s, double t, const Eigen::VectorXd& x) {
    if (!keep(s, last, stride)) return;
    path.times.push_back(t);
    path.states.push_back(s == 0 ? x0 : x);
  });
  return path;
}

WeylVector simulate_dbm_terminal(const WeylVector& x0, Theta theta, const SimScheme& scheme,
                                 NoiseStream& noise) {
  require_dynamics_theta(theta);
  WeylVector out;
  const std::size_t last = scheme.steps();
  run_dbm(x0, theta, scheme, noise, [&](std::size_t s, double, const Eigen::VectorXd& x) {
    if (s == last) out = x;
  });
  return out;
}

CoupledDBMPaths simulate_coupled(const WeylVector& x0, const WeylVector& y0, Theta theta,
                                 const SimScheme& scheme, NoiseStream& noise,
                                 const PathOptions& options) {
  require_dynamics_theta(theta);
  scheme.validate();
  if (x0.size() != y0.size()) throw DomainError("coupled paths need equal dimensions");
  if (!is_weyl(x0) || !is_weyl(y0)) throw DomainError("initial condition is not in the Weyl chamber");

  CoupledDBMPaths out;
  for (DBMPath* p : {&out.path_x, &out.path_y}) {
    p->theta = theta;
    p->scheme = scheme;
  }
  DbmStepper sx(theta, scheme), sy(theta, scheme);
  const std::size_t last = scheme.steps();
  const std::size_t stride = std::max<std::size_t>(1, options.save_stride);
  Eigen::VectorXd x = x0, y = y0, z(x0.size());
  auto record = [&](std::size_t s) {
    if (!keep(s, last, stride)) return;
    const double t = s == last ? scheme.T : static_cast<double>(s) * sx.dt();
    out.path_x.times.push_back(t);
    out.path_y.times.push_back(t);
    out.path_x.states.push_back(x);
    out.path_y.states.push_back(y);
  };
  record(0);
  for (std::size_t s = 1; s <= last; ++s) {
    noise.fill_normal(z);
    sx.step(x, z);
    sy.step(y, z);
    if (!x.allFinite() || !y.allFinite()) throw NumericalFailure("non-finite coupled DBM state", s);
    record(s);
  }
  return out;
}

WeylVector sample_beta_hermite(int n, Theta theta, double t, NoiseStream& noise) {
  if (n < 1) throw DomainError("sample_beta_hermite: n must be positive");
  if (!(t > 0.0)) throw DomainError("sample_beta_hermite: t must be positive");
  const double beta = theta.beta();
  const double scale = std::sqrt(t / 2.0);
  Eigen::VectorXd diag(n), sub(std::max(n - 1, 0));
  for (int i = 0; i < n; ++i) diag[i] = std::sqrt(2.0) * noise.normal() * scale;
  for (int i = 0; i + 1 < n; ++i) sub[i] = noise.chi(beta * (n - 1 - i)) * scale;
  if (n == 1) return diag;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("sample_beta_hermite: eigensolver failed");
  return solver.eigenvalues();
}

MomentEstimate estimate_inverse_gap_moment(int n, Theta theta, double p, int i, double t,
                                           std::size_t n_paths, std::uint64_t seed,
                                           std::uint64_t stream_id,
                                           std::size_t bootstrap_resamples) {
  if (n < 2) throw DomainError("inverse gap moment needs n >= 2");
  if (i < 0 || i >= n - 1) throw DomainError("gap index out of range");
  if (!(p >= 0.0)) throw DomainError("moment order p must be non-negative");
  if (!(p < 2.0 * theta + 1.0)) throw DomainError("inverse gap moment is infinite for p >= 2 theta + 1");
  if (n_paths == 0) throw DomainError("inverse gap moment needs at least one path");
  if (p == 0.0) return {1.0, 0.0, n_paths};

  std::vector<double> values(n_paths);
  parallel_for(n_paths, [&](std::size_t k) {
    NoiseStream noise = derive_noise_stream(seed, stream_id, k);
    const WeylVector x = sample_beta_hermite(n, theta, t, noise);
    values[k] = std::pow(x[i + 1] - x[i], -p);
  });
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n_paths);

  std::vector<double> boot(bootstrap_resamples);
  parallel_for(bootstrap_resamples, [&](std::size_t b) {
    NoiseStream noise = derive_noise_stream(seed, stream_id ^ 0xB007'0000'0000'0000ull, b);
    double s = 0.0;
    for (std::size_t k = 0; k < n_paths; ++k) {
      const auto idx = static_cast<std::size_t>(noise.uniform() * static_cast<double>(n_paths));
      s += values[std::min(idx, n_paths - 1)];
    }
    boot[b] = s / static_cast<double>(n_paths);
  });
  double bm = 0.0;
  for (double v : boot) bm += v;
  bm /= static_cast<double>(boot.size());
  double ss = 0.0;
  for (double v : boot) ss += (v - bm) * (v - bm);
  const double se = boot.size() > 1 ? std::sqrt(ss / static_cast<double>(boot.size() - 1)) : 0.0;
  return {mean, se, n_paths};
}

}  // namespace mdbmlab
