#include "mdbmlab/corners.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <iostream>

namespace mdbmlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_sampler_theta(double theta) {
  if (!(theta >= 1.0))
    throw DomainError("Dixon-Anderson sampling requires theta >= 1 (density unbounded below 1)");
}

double log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& s, const Eigen::VectorXd& z) {
  return da_log_density_weighted<double>(x, s, z);
}

/// Maximizes a log-concave function of one variable on [lo, hi]: grid search
/// over 33 points (endpoints included) followed by golden-section refinement
/// around the best grid point.
template <typename F>
std::pair<double, double> maximize_1d(F&& f, double lo, double hi) {
  constexpr int grid = 32;
  double best_u = lo, best_v = kNegInf;
  for (int g = 0; g <= grid; ++g) {
    const double u = lo + (hi - lo) * static_cast<double>(g) / grid;
    const double v = f(u);
    if (v > best_v) {
      best_v = v;
      best_u = u;
    }
  }
  const double cell = (hi - lo) / grid;
  double a = std::max(lo, best_u - cell), b = std::min(hi, best_u + cell);
  constexpr double inv_phi = 0.6180339887498949;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 40; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  for (auto [u, v] : {std::pair{c, fc}, std::pair{d, fd}})
    if (v > best_v) {
      best_v = v;
      best_u = u;
    }
  return {best_u, best_v};
}

/// Coordinate-ascent grid search for max log lambda_s(x, .) over R(x). The
/// log density is concave in z when all weights are >= 1.
double max_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& s) {
  const Eigen::Index m = x.size() - 1;
  Eigen::VectorXd z = 0.5 * (x.head(m) + x.tail(m));
  double best = log_density(x, s, z);
  for (int sweep = 0; sweep < 12; ++sweep) {
    const double before = best;
    for (Eigen::Index i = 0; i < m; ++i) {
      auto f = [&](double u) {
        const double keep = z[i];
        z[i] = u;
        const double v = log_density(x, s, z);
        z[i] = keep;
        return v;
      };
      auto [u, v] = maximize_1d(f, x[i], x[i + 1]);
      if (v > best) {
        best = v;
        z[i] = u;
      }
    }
    if (m == 1 || best - before < 1e-12) break;
  }
  return best;
}

void warn_fallback_once() {
  static std::atomic<bool> warned{false};
  if (!warned.exchange(true))
    std::clog << "warning: Dixon-Anderson rejection acceptance below threshold; "
                 "falling back to Gibbs sampling\n";
}

Eigen::VectorXd sample_da_gibbs(const Eigen::VectorXd& x, const Eigen::VectorXd& s, NoiseStream& noise,
                                int sweeps, double safety) {
  const Eigen::Index m = x.size() - 1;
  Eigen::VectorXd z = 0.5 * (x.head(m) + x.tail(m));
  const double log_safety = std::log(safety);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (Eigen::Index i = 0; i < m; ++i) {
      // Conditional of z_i given the rest, up to a constant.
      auto logf = [&](double u) {
        double v = 0.0;
        for (Eigen::Index j = 0; j < x.size(); ++j) {
          if (s[j] == 1.0) continue;
          const double d = std::abs(u - x[j]);
          if (d == 0.0) return kNegInf;
          v += (s[j] - 1.0) * std::log(d);
        }
        for (Eigen::Index n = 0; n < m; ++n)
          if (n != i) v += std::log(std::abs(u - z[n]));
        return v;
      };
      const double env = maximize_1d(logf, x[i], x[i + 1]).second + log_safety;
      for (;;) {
        const double u = x[i] + (x[i + 1] - x[i]) * noise.uniform();
        if (std::log(noise.uniform()) <= logf(u) - env) {
          z[i] = u;
          break;
        }
      }
    }
  }
  return z;
}

Eigen::VectorXd sample_da_rejection(const Eigen::VectorXd& x, const Eigen::VectorXd& s,
                                    NoiseStream& noise, double log_env) {
  const Eigen::Index m = x.size() - 1;
  Eigen::VectorXd z(m);
  for (;;) {
    for (Eigen::Index i = 0; i < m; ++i) z[i] = x[i] + (x[i + 1] - x[i]) * noise.uniform();
    const double lf = log_density(x, s, z);
    if (lf > log_env) throw Error("Dixon-Anderson rejection envelope violated");
    if (std::log(noise.uniform()) <= lf - log_env) return z;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

QuadratureResult integrate_against_da(const Eigen::VectorXd& x, const Eigen::VectorXd& s,
                                      const std::function<double(const SlotPoint&)>& weight,
                                      const QuadratureSpec& spec) {
  const Eigen::Index dim = x.size() - 1;
  if (dim < 1) throw DomainError("integration region needs at least two source points");
  if (dim > 3) throw DomainError("quadrature over the interlacing region is limited to k <= 4");
  if (s.size() != x.size()) throw ShapeError("weight vector does not match source points");
  if (!is_strictly_ordered(x)) throw SingularityError("quadrature source has coincident points");

  const Eigen::Index k = x.size();
  double constant = 0.0, total = s.sum();
  constant += std::lgamma(total);
  for (Eigen::Index j = 0; j < k; ++j) constant -= std::lgamma(s[j]);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index m = j + 1; m < k; ++m) constant += (1.0 - s[j] - s[m]) * std::log(x[m] - x[j]);

  SlotPoint pt{Eigen::VectorXd(dim), Eigen::VectorXd(dim), Eigen::VectorXd(dim)};

  // Same terms as da_log_density_weighted, with the distances to the own
  // slot ends taken from the quadrature complements.
  auto log_density_at = [&]() {
    double out = constant;
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index n = i + 1; n < dim; ++n)
        out += std::log(n == i + 1 ? pt.above[i] + pt.below[n] : pt.z[n] - pt.z[i]);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index j = 0; j < k; ++j) {
        const double e = s[j] - 1.0;
        if (e == 0.0) continue;
        double d;
        if (j == i) d = pt.below[i];
        else if (j == i + 1) d = pt.above[i];
        else if (j < i) d = pt.below[i] + (x[i] - x[j]);
        else d = pt.above[i] + (x[j] - x[i + 1]);
        if (d <= 0.0) return e > 0.0 ? kNegInf : std::numeric_limits<double>::infinity();
        out += e * std::log(d);
      }
    return out;
  };

  boost::math::quadrature::tanh_sinh<double> ts(spec.max_refinements);
  std::function<double(Eigen::Index)> nested = [&](Eigen::Index d) -> double {
    if (d == dim) {
      const double lf = log_density_at();
      if (lf == kNegInf) return 0.0;
      const double v = weight(pt) * std::exp(lf);
      return std::isfinite(v) ? v : 0.0;
    }
    const double lo = x[d], hi = x[d + 1], w = hi - lo;
    // Two-argument form: uc = lo - u on the left half, hi - u on the right.
    auto f = [&](double u, double uc) {
      pt.z[d] = u;
      if (uc < 0) {
        pt.below[d] = -uc;
        pt.above[d] = w + uc;
      } else {
        pt.above[d] = uc;
        pt.below[d] = w - uc;
      }
      return nested(d + 1);
    };
    return ts.integrate(f, lo, hi, spec.tolerance);
  };

  const double lo = x[0], hi = x[1], w = hi - lo;
  auto f = [&](double u, double uc) {
    pt.z[0] = u;
    if (uc < 0) {
      pt.below[0] = -uc;
      pt.above[0] = w + uc;
    } else {
      pt.above[0] = uc;
      pt.below[0] = w - uc;
    }
    return nested(1);
  };
  QuadratureResult out;
  double err = 0.0, l1 = 0.0;
  out.value = ts.integrate(f, lo, hi, spec.tolerance, &err, &l1);
  out.error_estimate = err;
  out.converged = std::isfinite(out.value) && err <= 1e3 * spec.tolerance * std::max(1.0, std::abs(l1));
  return out;
}

QuadratureResult da_normalization(const WeylVector& x_hi, Theta theta, const QuadratureSpec& spec) {
  if (x_hi.size() > 4) throw DomainError("da_normalization is limited to k <= 4");
  const Eigen::VectorXd s = Eigen::VectorXd::Constant(x_hi.size(), theta.value());
  return integrate_against_da(x_hi, s, [](const SlotPoint&) { return 1.0; }, spec);
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

double da_rejection_acceptance(const Eigen::VectorXd& x, const Eigen::VectorXd& s,
                               double envelope_safety) {
  double log_vol = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) log_vol += std::log(x[i + 1] - x[i]);
  return std::exp(-(max_log_density(x, s) + std::log(envelope_safety) + log_vol));
}

WeylVector sample_da_weighted(const Eigen::VectorXd& x, const Eigen::VectorXd& s, NoiseStream& noise,
                              const DaSamplerOptions& options) {
  if (x.size() < 2) throw DomainError("sample_da needs at least two source points");
  if (s.size() != x.size()) throw ShapeError("weight vector does not match source points");
  if (!is_strictly_ordered(x)) throw SingularityError("Dixon-Anderson source has coincident points");
  if ((s.array() < 1.0).any()) throw DomainError("sample_da requires all weights >= 1");

  if (options.method == DaMethod::gibbs)
    return sample_da_gibbs(x, s, noise, options.gibbs_sweeps, options.envelope_safety);

  const double log_env = max_log_density(x, s) + std::log(options.envelope_safety);
  double log_vol = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) log_vol += std::log(x[i + 1] - x[i]);
  if (-(log_env + log_vol) < std::log(options.min_acceptance)) {
    warn_fallback_once();
    return sample_da_gibbs(x, s, noise, options.gibbs_sweeps, options.envelope_safety);
  }
  return sample_da_rejection(x, s, noise, log_env);
}

WeylVector sample_da(const WeylVector& x_hi, Theta theta, NoiseStream& noise,
                     const DaSamplerOptions& options) {
  require_sampler_theta(theta);
  return sample_da_weighted(x_hi, Eigen::VectorXd::Constant(x_hi.size(), theta.value()), noise,
                            options);
}

GTPattern<double> sample_corners(const WeylVector& top, Theta theta, NoiseStream& noise,
                                 const DaSamplerOptions& options) {
  require_sampler_theta(theta);
  if (!is_strictly_ordered(top)) throw SingularityError("sample_corners needs a strictly ordered top");
  const int n = static_cast<int>(top.size());
  GTPattern<double> p(n);
  p.top() = top;
  for (int k = n; k >= 2; --k) p.level(k - 1) = sample_da(p.level(k), theta, noise, options);
  return p;
}

GTPattern<double> sample_corners_boundary(const WeylVector& top, Theta theta, NoiseStream& noise,
                                          const DaSamplerOptions& options) {
  require_sampler_theta(theta);
  if (!is_weyl(top)) throw DomainError("top level is not in the Weyl chamber");
  const int n = static_cast<int>(top.size());
  GTPattern<double> p(n);
  p.top() = top;
  for (int k = n; k >= 2; --k) {
    const Eigen::VectorXd src = p.level(k);
    // Clusters of equal source points.
    std::vector<double> value;
    std::vector<int> mult;
    for (int i = 0; i < k; ++i) {
      if (!value.empty() && src[i] == value.back()) {
        ++mult.back();
      } else {
        value.push_back(src[i]);
        mult.push_back(1);
      }
    }
    const auto c = static_cast<Eigen::Index>(value.size());
    Eigen::VectorXd free;
    if (c >= 2) {
      Eigen::VectorXd xs(c), ws(c);
      for (Eigen::Index j = 0; j < c; ++j) {
        xs[j] = value[j];
        ws[j] = mult[j] * theta.value();
      }
      free = sample_da_weighted(xs, ws, noise, options);
    }
    // Interleave: (m_j - 1) copies of cluster j, then the free point after it.
    auto lo = p.level(k - 1);
    Eigen::Index out = 0;
    for (Eigen::Index j = 0; j < c; ++j) {
      for (int r = 0; r + 1 < mult[j]; ++r) lo[out++] = value[j];
      if (j + 1 < c) lo[out++] = free[j];
    }
  }
  return p;
}

GTPattern<double> gue_minor_oracle(int n, double t, double theta, NoiseStream& noise) {
  if (n < 1) throw DomainError("gue_minor_oracle: n must be positive");
  if (!(t > 0.0)) throw DomainError("gue_minor_oracle: t must be positive");
  const double sd = std::sqrt(t), sd_off = std::sqrt(t / 2.0);
  GTPattern<double> p(n);

  if (theta == 0.5) {
    Eigen::MatrixXd h(n, n);
    for (int i = 0; i < n; ++i) {
      h(i, i) = sd * noise.normal();
      for (int j = i + 1; j < n; ++j) h(i, j) = h(j, i) = sd_off * noise.normal();
    }
    for (int k = 1; k <= n; ++k) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.topLeftCorner(k, k), Eigen::EigenvaluesOnly);
      p.level(k) = es.eigenvalues();
    }
  } else if (theta == 1.0) {
    Eigen::MatrixXcd h(n, n);
    for (int i = 0; i < n; ++i) {
      h(i, i) = sd * noise.normal();
      for (int j = i + 1; j < n; ++j) {
        const double re = sd_off * noise.normal(), im = sd_off * noise.normal();
        h(i, j) = {re, im};
        h(j, i) = {re, -im};
      }
    }
    for (int k = 1; k <= n; ++k) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.topLeftCorner(k, k), Eigen::EigenvaluesOnly);
      p.level(k) = es.eigenvalues();
    }
  } else if (theta == 2.0) {
    // Quaternion q = a + b i + c j + d k as the 2x2 complex block
    // [[a + b i, c + d i], [-c + d i, a - b i]]; eigenvalues come in pairs.
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
      const double a = sd * noise.normal();
      h(2 * i, 2 * i) = a;
      h(2 * i + 1, 2 * i + 1) = a;
      for (int j = i + 1; j < n; ++j) {
        const double qa = sd_off * noise.normal(), qb = sd_off * noise.normal();
        const double qc = sd_off * noise.normal(), qd = sd_off * noise.normal();
        Eigen::Matrix2cd blk;
        blk << std::complex<double>(qa, qb), std::complex<double>(qc, qd),
            std::complex<double>(-qc, qd), std::complex<double>(qa, -qb);
        h.block<2, 2>(2 * i, 2 * j) = blk;
        h.block<2, 2>(2 * j, 2 * i) = blk.adjoint();
      }
    }
    for (int k = 1; k <= n; ++k) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.topLeftCorner(2 * k, 2 * k),
                                                         Eigen::EigenvaluesOnly);
      const Eigen::VectorXd ev = es.eigenvalues();
      for (int i = 0; i < k; ++i) p(k, i) = 0.5 * (ev[2 * i] + ev[2 * i + 1]);
    }
  } else {
    throw DomainError("gue_minor_oracle: matrix model exists only for theta in {1/2, 1, 2}");
  }

  // Minors are diagonalized independently; clip rounding-level violations of
  // Cauchy interlacing top-down.
  for (int k = n - 1; k >= 1; --k)
    for (int i = 0; i < k; ++i) p(k, i) = std::clamp(p(k, i), p(k + 1, i), p(k + 1, i + 1));
  return p;
}

// ---------------------------------------------------------------------------
// Spacing bounds
// ---------------------------------------------------------------------------

double spacing_bound_constant_C1(int k, double alpha, double theta) {
  if (k < 1) throw DomainError("C1: k must be positive");
  if (!(alpha >= 0.0 && alpha < theta)) throw DomainError("C1 requires 0 <= alpha < theta");
  const double kt = (k + 1) * theta;
  return std::exp(std::lgamma(theta - alpha + 1.0) + std::lgamma(kt) - std::lgamma(theta) -
                  std::lgamma(kt - alpha));
}

double spacing_bound_constant_C2(int k, double alpha1, double alpha2, double theta) {
  if (k < 1) throw DomainError("C2: k must be positive");
  if (!(alpha1 >= 0.0 && alpha1 < theta && alpha2 >= 0.0 && alpha2 < theta))
    throw DomainError("C2 requires 0 <= alpha1, alpha2 < theta");
  const double kt = (k + 1) * theta;
  return std::exp(std::lgamma(theta - alpha1 + 1.0) + std::lgamma(theta - alpha2 + 1.0) +
                  std::lgamma(kt) - 2.0 * std::lgamma(theta) - std::lgamma(kt - alpha1 - alpha2));
}

namespace {

TestReport spacing_report(std::string name, const QuadratureResult& q, double bound,
                          std::chrono::steady_clock::time_point start) {
  TestReport r;
  r.name = std::move(name);
  r.statistic = q.value;
  r.threshold = bound * (1.0 + 1e-6);
  r.pass = q.converged && q.value <= r.threshold;
  r.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.details["lhs"] = q.value;
  r.details["bound"] = bound;
  r.details["quadrature_error"] = q.error_estimate;
  r.details["quadrature_converged"] = q.converged;
  r.details["ratio"] = q.value / bound;
  return r;
}

}  // namespace

TestReport verify_spacing_bound(const WeylVector& x_hi, double theta, double alpha, int a,
                                const QuadratureSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  const int k = static_cast<int>(x_hi.size()) - 1;
  if (k < 1 || k > 3) throw DomainError("verify_spacing_bound supports 1 <= k <= 3");
  if (a < 0 || a >= k) throw DomainError("slot index out of range");
  const double c1 = spacing_bound_constant_C1(k, alpha, theta);
  const double bound = c1 / (theta - alpha) * std::pow(x_hi[a + 1] - x_hi[a], -alpha);
  const Eigen::VectorXd s = Eigen::VectorXd::Constant(x_hi.size(), theta);
  const auto q = integrate_against_da(
      x_hi, s, [&](const SlotPoint& p) { return std::pow(p.above[a], -alpha); }, spec);
  TestReport r = spacing_report("spacing_bound_C1", q, bound, start);
  r.details["k"] = k;
  r.details["alpha"] = alpha;
  r.details["theta"] = theta;
  r.details["slot"] = a;
  r.details["C1"] = c1;
  return r;
}

TestReport verify_spacing_bound_pair(const WeylVector& x_hi, double theta, double alpha1,
                                     double alpha2, int a, int b, const QuadratureSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  const int k = static_cast<int>(x_hi.size()) - 1;
  if (k < 2 || k > 3) throw DomainError("verify_spacing_bound_pair supports 2 <= k <= 3");
  if (a < 0 || a >= k || b < 0 || b >= k || a == b) throw DomainError("slot indices invalid");
  const double c2 = spacing_bound_constant_C2(k, alpha1, alpha2, theta);
  const double bound = c2 / ((theta - alpha1) * (theta - alpha2)) *
                       std::pow(x_hi[a + 1] - x_hi[a], -alpha1) *
                       std::pow(x_hi[b + 1] - x_hi[b], -alpha2);
  const Eigen::VectorXd s = Eigen::VectorXd::Constant(x_hi.size(), theta);
  const auto q = integrate_against_da(
      x_hi, s,
      [&](const SlotPoint& p) { return std::pow(p.above[a], -alpha1) * std::pow(p.above[b], -alpha2); },
      spec);
  TestReport r = spacing_report("spacing_bound_C2", q, bound, start);
  r.details["k"] = k;
  r.details["alpha1"] = alpha1;
  r.details["alpha2"] = alpha2;
  r.details["theta"] = theta;
  r.details["C2"] = c2;
  return r;
}

// ---------------------------------------------------------------------------
// PDE residuals
// ---------------------------------------------------------------------------

namespace {

using Real = long double;
using RVec = Vector<Real>;
using RPattern = GTPattern<Real>;

Real c_coeff(const RPattern& p, int k, int i, Real theta) {
  Real v = 0;
  for (int j = 0; j < k; ++j)
    if (j != i) v += Real(1) / (p(k, i) - p(k, j));
  return theta * v;
}

Real b_coeff(const RPattern& p, int k, int i, Real theta) {
  Real v = 0;
  for (int j = 0; j < k - 1; ++j) v += Real(1) / (p(k, i) - p(k - 1, j));
  for (int j = 0; j < k; ++j)
    if (j != i) v -= Real(1) / (p(k, i) - p(k, j));
  return (theta - Real(1)) * v;
}

Real lambda_top(const RPattern& p, Real theta) {
  const int n = p.levels();
  const RVec hi = p.level(n), lo = p.level(n - 1);
  return std::exp(da_log_density<Real>(hi, lo, theta));
}

Real gibbs(const RPattern& p, Real theta) { return std::exp(gibbs_log_density<Real>(p, theta)); }

/// Central first and second differences of f along flat coordinate idx.
template <typename F>
std::pair<Real, Real> diffs(F&& f, RPattern p, int idx, Real h) {
  const Real x0 = p.values()[idx];
  const Real f0 = f(p);
  p.values()[idx] = x0 + h;
  const Real fp = f(p);
  p.values()[idx] = x0 - h;
  const Real fm = f(p);
  return {(fp - fm) / (2 * h), (fp - 2 * f0 + fm) / (h * h)};
}

}  // namespace

PdeResidual da_pde_residual(const GTPattern<double>& x, double theta, double fd_step) {
  const int n = x.levels();
  if (n < 2 || n > 4) throw DomainError("da_pde_residual supports N in {2, 3, 4}");
  if (!(fd_step > 0.0)) throw DomainError("fd_step must be positive");
  if (!is_interior(x) || min_pattern_gap(x) < 10.0 * fd_step)
    throw DomainError("da_pde_residual needs every gap >= 10 fd_step");

  const RPattern p = x.cast<Real>();
  const Real th = theta, h = fd_step;
  const int top_off = RPattern::offset(n), sub_off = RPattern::offset(n - 1);

  auto lam = [&](const RPattern& q) { return lambda_top(q, th); };
  auto gib = [&](const RPattern& q) { return gibbs(q, th); };

  // A_N f = sum_i c_i^N d_i f + 1/2 sum_i d_ii f over the top level.
  auto generator_top = [&](auto&& f) {
    Real v = 0;
    for (int i = 0; i < n; ++i) {
      auto [d1, d2] = diffs(f, p, top_off + i, h);
      v += c_coeff(p, n, i, th) * d1 + Real(0.5) * d2;
    }
    return v;
  };

  // A*_{N-1} lambda = -sum_j d_j (c_j^{N-1} lambda) + 1/2 sum_j d_jj lambda.
  Real lhs_single = 0;
  for (int j = 0; j < n - 1; ++j) {
    auto c_lam = [&](const RPattern& q) { return c_coeff(q, n - 1, j, th) * lam(q); };
    lhs_single -= diffs(c_lam, p, sub_off + j, h).first;
    lhs_single += Real(0.5) * diffs(lam, p, sub_off + j, h).second;
  }
  const Real rhs_single = generator_top(lam);

  // L*_{1..N-1} Lambda = -sum_{k<N,i} d(b_i^k Lambda) + 1/2 sum_{k<N,i} d_ii Lambda.
  Real lhs_full = 0;
  for (int k = 1; k <= n - 1; ++k)
    for (int i = 0; i < k; ++i) {
      const int idx = RPattern::offset(k) + i;
      auto b_gib = [&](const RPattern& q) { return b_coeff(q, k, i, th) * gib(q); };
      lhs_full -= diffs(b_gib, p, idx, h).first;
      lhs_full += Real(0.5) * diffs(gib, p, idx, h).second;
    }
  const Real rhs_full = generator_top(gib);

  PdeResidual out;
  out.single_level = static_cast<double>(std::abs(lhs_single - rhs_single) / lam(p));
  out.full = static_cast<double>(std::abs(lhs_full - rhs_full) / gib(p));
  return out;
}

}  // namespace mdbmlab
