#pragma once

#include "mdbmlab/core.hpp"
#include "mdbmlab/corners.hpp"
#include "mdbmlab/mdbm.hpp"
#include "mdbmlab/parallel.hpp"
#include "mdbmlab/report.hpp"
#include "mdbmlab/rng.hpp"
#include "mdbmlab/stats.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mdbmlab {

// ---------------------------------------------------------------------------
// Feature batteries
// ---------------------------------------------------------------------------

struct Feature {
  std::string name;
  std::function<double(const GTPattern<double>&)> eval;
};

/// x^k_i for levels k in [min_level, n].
std::vector<Feature> coordinate_features(int n, int min_level = 1);
/// (x^k_i)^2 for levels k in [min_level, n].
std::vector<Feature> square_features(int n, int min_level = 1);
/// x^k_{i+1} - x^k_i for levels k in [max(2, min_level), n].
std::vector<Feature> gap_features(int n, int min_level = 2);
/// x^k_i * x^{k-1}_j for k in [max(2, min_level), n].
std::vector<Feature> cross_product_features(int n, int min_level = 2);

std::vector<Feature> concat(std::vector<std::vector<Feature>> parts);

// ---------------------------------------------------------------------------
// Sample generation
// ---------------------------------------------------------------------------

/// Independent draws gen(noise) with noise = derive_noise_stream(seed, stream, i).
template <typename T, typename Gen>
std::vector<T> draw_samples(std::size_t n, std::uint64_t seed, std::uint64_t stream, Gen&& gen,
                            unsigned threads = 0) {
  std::vector<T> out(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        NoiseStream noise = derive_noise_stream(seed, stream, i);
        out[i] = gen(noise);
      },
      threads);
  return out;
}

// ---------------------------------------------------------------------------
// Generic comparisons
// ---------------------------------------------------------------------------

/// Named scalar columns: columns[f][s] is feature f of sample s.
struct FeatureColumns {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

FeatureColumns feature_columns(const std::vector<Feature>& features,
                               const std::vector<GTPattern<double>>& samples);

/// Coordinates of equal-length vectors as columns "x[i]".
FeatureColumns coordinate_columns(const std::vector<WeylVector>& samples);

/// Two-sample KS on every column. Passes iff every p-value exceeds alpha / m
/// with m columns when bonferroni is set, else alpha.
TestReport compare_ks(std::string name, const FeatureColumns& a, const FeatureColumns& b,
                      double alpha, bool bonferroni);

/// Compares column means; passes iff every |z| <= z_max.
TestReport compare_moments(std::string name, const FeatureColumns& a, const FeatureColumns& b,
                           double z_max = 3.0);

TestReport compare_ks(std::string name, const std::vector<GTPattern<double>>& a,
                      const std::vector<GTPattern<double>>& b, const std::vector<Feature>& features,
                      double alpha, bool bonferroni);

/// Compares feature means; passes iff every |z| <= z_max.
TestReport compare_moments(std::string name, const std::vector<GTPattern<double>>& a,
                           const std::vector<GTPattern<double>>& b,
                           const std::vector<Feature>& features, double z_max = 3.0);

// ---------------------------------------------------------------------------
// Law-level tests
// ---------------------------------------------------------------------------

struct VerifyOptions {
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;  ///< base stream id; tests derive sub-streams from it
  double h = 1e-3;
  unsigned threads = 0;
};

/// Five-function battery on a level-k point: x_1, x_k, x_1^2, x_k^2, x_1 x_k.
FeatureColumns intertwining_battery(const std::vector<WeylVector>& samples);

/// Route A: corners of x_top down to level k, then a k-dimensional theta-DBM
/// for time t. Route B: N-dimensional theta-DBM from x_top for time t, then
/// corners down to level k. Passes iff every battery mean agrees within 3
/// combined standard errors. Routes use independent streams.
TestReport test_intertwining(int N, int k, double theta, double t, const WeylVector& x_top,
                             std::size_t n_paths, const VerifyOptions& opt);

/// MDBM from gibbs_initial(mu0) at time t against the factorized law
/// (theta-DBM of the top from mu0, then corners). Feature battery: all
/// coordinates, same-level gaps and products of adjacent levels; two-sample KS
/// with Bonferroni correction at family level 0.05.
TestReport test_fixed_time_gibbs(int N, double theta, double t, const TopSampler& mu0,
                                 std::size_t n_paths, const VerifyOptions& opt);

struct ConvergenceOptions {
  double warren_h = 1e-4;
  std::size_t bootstrap_resamples = 50;
  bool include_level_one = false;
};

/// d(theta) = max over features of W1(MDBM_theta(t), Warren(t)); Warren starts
/// from the theta = 1 corners law over mu0. Passes iff d is non-increasing
/// toward 1 along the grid (with 2 stderr slack) and d(min) <= d(max) / 2.
TestReport test_warren_convergence(int N, double t, std::vector<double> theta_grid,
                                   const TopSampler& mu0, std::size_t n_paths,
                                   const VerifyOptions& opt, const ConvergenceOptions& copt = {});

/// W1 contraction between theta-DBMs from x0 and y0 under |.|_inf ^ 1. LHS is
/// the common-noise coupling estimate; passes iff LHS <= 2N RHS (1 + 0.05).
TestReport test_wasserstein_contraction(double theta, double t, const WeylVector& x0,
                                        const WeylVector& y0, std::size_t n_paths,
                                        const VerifyOptions& opt);

/// f(t, x) on a flat pattern with analytic derivatives in t and x.
struct SpaceTimeFunction {
  std::function<double(double, const GTPattern<double>&)> value;
  std::function<double(double, const GTPattern<double>&)> dt;
  std::function<Eigen::VectorXd(double, const GTPattern<double>&)> gradient;
  std::function<double(double, const GTPattern<double>&)> laplacian;
};

/// sin^2(pi t / T) * prod over same-level adjacent and adjacent-level pairs
/// of (x_a - x_b)^2 * exp(-|x|^2 / (2 s^2)); vanishes at every contact.
SpaceTimeFunction bump_test_function(int N, double T, double s = 1.5);

/// int_0^T E_{nu_t}[d_t f + L f] dt with nu_t = (theta-DBM_N from x_top at
/// t, then corners), composite Simpson in time on `time_intervals` (even)
/// panels. Passes iff |estimate| <= 3 stderr.
TestReport test_fokker_planck(int N, double theta, const SpaceTimeFunction& f, double T,
                              const WeylVector& x_top, std::size_t n_paths,
                              const VerifyOptions& opt, int time_intervals = 20);

// ---------------------------------------------------------------------------
// Building-block checks shared by the suites and the acceptance run
// ---------------------------------------------------------------------------

TestReport check_da_normalization(int k, double theta, const WeylVector& x_hi, double tol = 1e-6);

/// theta = 1 Gibbs log density at `fillings` random lower-level fillings of
/// a fixed top against log prod Gamma(k) - log Vandermonde(top).
TestReport check_gibbs_flatness(const WeylVector& top, int fillings, std::uint64_t seed,
                                double tol = 1e-12);

/// Residuals at fd 1e-3 and 1e-4 at `points` random interior patterns;
/// passes iff every ratio lies in [50, 200] (single-level and full form).
TestReport check_pde_residual(int N, double theta, int points, std::uint64_t seed);

/// Spacing-bound battery: named (k, alpha, theta, x) cases, alpha = 0
/// equality and the closed-form k = 1, theta = 2, alpha = 1 case.
std::vector<TestReport> check_spacing_bounds();

/// simulate_dbm from x0 = 0 against sample_beta_hermite, per-coordinate KS.
TestReport check_dbm_oracle(int N, double theta, double t, std::size_t n_paths,
                            const VerifyOptions& opt, double alpha = 0.01);

/// Law of X(t)/sqrt(t) at t = 0.25 and t = 1 from 0 (h scaled with t).
TestReport check_dbm_scaling(int N, double theta, std::size_t n_paths, const VerifyOptions& opt);

/// Inverse-gap moment against the closed-form N = 2 gap law.
TestReport check_inverse_moment_oracle(double theta, double p, double t, std::size_t n_paths,
                                       const VerifyOptions& opt);

/// E[g^{-p}] at t and 4t differ by 2^p (N = 2) within 3 stderr.
TestReport check_inverse_moment_scaling(double theta, double p, std::size_t n_paths,
                                        const VerifyOptions& opt);

/// sample_corners with top from the beta-Hermite law vs gue_minor_oracle:
/// moments of coordinates, squares and gaps (3 sigma) and x^1 vs N(0, t).
std::vector<TestReport> check_corners_oracle(int N, double theta, double t, std::size_t n_paths,
                                             const VerifyOptions& opt);

/// Level-N marginal of the MDBM from 0 against simulate_dbm from 0.
TestReport check_mdbm_marginal(int N, double theta, double t, std::size_t n_paths,
                               const VerifyOptions& opt);

/// Projected-step fraction at h and h/10 (must not increase).
TestReport check_projection_activity(int N, double theta, double t, std::size_t n_paths,
                                     const VerifyOptions& opt);

/// Warren from 0: each level vs beta-Hermite(k, 1, t) (KS, level 0.01) and
/// the pattern vs gue_minor_oracle (moments, 3 sigma).
std::vector<TestReport> check_warren_law(int N, double t, std::size_t n_paths,
                                         const VerifyOptions& opt);

/// Exceptional-set occupation and push complementarity on Warren paths.
TestReport check_warren_occupation(int N, std::size_t n_paths, const VerifyOptions& opt,
                                   double tol = 1e-3);

enum class CouplingPart { ordering, gaps, sup_norm };

/// Coupled-path inequalities (a) Y <= X, (b) gaps of Y <= gaps of X, (c)
/// |X - Y|_inf <= 2N |x - y|_inf, each with additive tolerance 10 sqrt(h).
TestReport check_coupling(CouplingPart part, const WeylVector& x0, const WeylVector& y0,
                          double theta, double T, std::size_t n_paths, const VerifyOptions& opt);

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

struct SuiteConfig {
  std::uint64_t seed = 20240917;
  double path_scale = 1.0;  ///< multiplies every default path count
  unsigned threads = 0;
  std::vector<double> theta_grid = {2.0, 1.5, 1.2, 1.05};
};

const std::vector<std::string>& suite_names();

/// Runs a named battery; reports in manifest order. Unknown names throw
/// DomainError listing the available suites.
std::vector<TestReport> run_suite(const std::string& name, const SuiteConfig& config = {});

}  // namespace mdbmlab
