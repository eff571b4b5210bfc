#include "mdbmlab/dbm.hpp"
#include "mdbmlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mdbmlab {

namespace {

WeylVector vec(std::initializer_list<double> v) {
  WeylVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TopSampler dirac(WeylVector x) {
  return [x](NoiseStream&) { return x; };
}

class SuiteRun {
 public:
  explicit SuiteRun(const SuiteConfig& c) : config_(c) {}

  std::size_t paths(std::size_t n, std::size_t min = 20) const {
    const auto scaled = static_cast<std::size_t>(std::llround(static_cast<double>(n) * config_.path_scale));
    return std::max(min, scaled);
  }

  /// Options with a fresh base stream for the next test.
  VerifyOptions next(double h = 1e-3) {
    VerifyOptions o;
    o.seed = config_.seed;
    o.stream = ++stream_;
    o.h = h;
    o.threads = config_.threads;
    return o;
  }

  std::uint64_t seed() const { return config_.seed; }
  const SuiteConfig& config() const { return config_; }

 private:
  SuiteConfig config_;
  std::uint64_t stream_ = 0;
};

void append(std::vector<TestReport>& out, std::vector<TestReport> more) {
  for (auto& r : more) out.push_back(std::move(r));
}

std::vector<TestReport> densities(SuiteRun& run) {
  std::vector<TestReport> out;
  const std::vector<WeylVector> k2 = {vec({0, 1}), vec({-1, 2}), vec({0.3, 0.5})};
  const std::vector<WeylVector> k3 = {vec({0, 1, 3}), vec({-2, 0, 1}), vec({0, 0.2, 5})};
  for (double theta : {1.0, 1.5, 2.0}) {
    for (const auto& x : k2) out.push_back(check_da_normalization(2, theta, x));
    for (const auto& x : k3) out.push_back(check_da_normalization(3, theta, x));
  }
  out.push_back(check_gibbs_flatness(vec({0, 1, 3}), 10, run.seed()));
  out.push_back(check_gibbs_flatness(vec({-1, 0, 2, 5}), 10, run.seed()));
  for (int N : {2, 3})
    for (double theta : {1.0, 1.5, 2.0}) out.push_back(check_pde_residual(N, theta, 5, run.seed()));
  append(out, check_spacing_bounds());
  return out;
}

std::vector<TestReport> dbm(SuiteRun& run) {
  std::vector<TestReport> out;
  out.push_back(check_dbm_oracle(4, 1.0, 1.0, run.paths(100000), run.next()));
  out.push_back(check_dbm_oracle(1, 1.0, 4.0, run.paths(100000), run.next()));
  out.push_back(check_dbm_scaling(3, 1.0, run.paths(100000), run.next()));
  out.push_back(check_inverse_moment_oracle(1.0, 1.0, 1.0, run.paths(100000), run.next()));
  return out;
}

std::vector<TestReport> corners(SuiteRun& run) {
  std::vector<TestReport> out;
  append(out, check_corners_oracle(3, 1.0, 1.0, run.paths(100000), run.next()));
  out.push_back(test_intertwining(3, 1, 1.5, 0.5, vec({0, 1, 3}), run.paths(100000), run.next()));
  return out;
}

std::vector<TestReport> mdbm(SuiteRun& run) {
  std::vector<TestReport> out;
  out.push_back(check_mdbm_marginal(2, 2.0, 1.0, run.paths(100000), run.next()));
  out.push_back(test_fixed_time_gibbs(3, 2.0, 0.5, dirac(vec({0, 1, 3})), run.paths(100000), run.next()));
  out.push_back(check_projection_activity(3, 2.0, 0.5, run.paths(200), run.next()));
  out.push_back(test_fokker_planck(2, 2.0, bump_test_function(2, 1.0), 1.0, vec({-0.5, 0.5}),
                                   run.paths(100000), run.next()));
  return out;
}

std::vector<TestReport> warren(SuiteRun& run) {
  std::vector<TestReport> out;
  append(out, check_warren_law(3, 1.0, run.paths(100000), run.next(1e-4)));
  out.push_back(check_warren_occupation(3, run.paths(20, 2), run.next(1e-4)));
  return out;
}

std::vector<TestReport> convergence(SuiteRun& run) {
  return {test_warren_convergence(3, 1.0, run.config().theta_grid, dirac(vec({0, 1, 3})),
                                  run.paths(10000), run.next())};
}

std::vector<TestReport> appendix(SuiteRun& run) {
  std::vector<TestReport> out;
  const std::size_t n = run.paths(100, 5);
  out.push_back(check_coupling(CouplingPart::ordering, vec({0, 1}), vec({-1, 0}), 1.0, 1.0, n, run.next()));
  out.push_back(check_coupling(CouplingPart::gaps, vec({0, 1}), vec({0.2, 0.7}), 1.0, 1.0, n, run.next()));
  out.push_back(check_coupling(CouplingPart::sup_norm, vec({0, 1}), vec({0.25, 0.75}), 1.0, 1.0, n, run.next()));
  out.push_back(test_wasserstein_contraction(1.0, 1.0, vec({0, 1}), vec({0.1, 1.1}), run.paths(1000), run.next()));
  out.push_back(test_wasserstein_contraction(1.0, 1.0, vec({0, 1}), vec({0, 1}), run.paths(100), run.next()));
  out.push_back(check_inverse_moment_scaling(1.0, 1.0, run.paths(100000), run.next()));
  return out;
}

using SuiteFn = std::vector<TestReport> (*)(SuiteRun&);

const std::vector<std::pair<std::string, SuiteFn>>& manifest() {
  static const std::vector<std::pair<std::string, SuiteFn>> m = {
      {"densities", densities}, {"dbm", dbm},         {"corners", corners},   {"mdbm", mdbm},
      {"warren", warren},       {"convergence", convergence}, {"appendix", appendix},
  };
  return m;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : manifest()) v.push_back(name);
    return v;
  }();
  return names;
}

std::vector<TestReport> run_suite(const std::string& name, const SuiteConfig& config) {
  for (const auto& [suite, fn] : manifest()) {
    if (suite != name) continue;
    SuiteRun run(config);
    return fn(run);
  }
  std::string list;
  for (const auto& s : suite_names()) list += (list.empty() ? "" : ", ") + s;
  throw DomainError("unknown suite '" + name + "'; available: " + list);
}

}  // namespace mdbmlab
