// Runs every suite at full scale and prints one PASS/FAIL line per acceptance
// criterion. MDBMLAB_ACCEPTANCE_SCALE (default 1) shrinks path counts for
// quick local runs; MDBMLAB_SEED overrides the default master seed.

#include "mdbmlab/io.hpp"
#include "mdbmlab/verify.hpp"

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

using namespace mdbmlab;

namespace {

using Reports = std::map<std::string, std::vector<TestReport>>;

struct Criterion {
  int id;
  std::string label;
  std::function<bool(const Reports&, std::string&)> check;
};

/// All reports named `name` in `suite`; a criterion with no evidence fails.
std::vector<const TestReport*> find(const Reports& all, const std::string& suite, const std::string& name) {
  std::vector<const TestReport*> out;
  const auto it = all.find(suite);
  if (it == all.end()) return out;
  for (const auto& r : it->second)
    if (r.name == name) out.push_back(&r);
  return out;
}

bool all_pass(const std::vector<const TestReport*>& rs, std::size_t min_count, std::string& note) {
  std::size_t passed = 0;
  for (const auto* r : rs) {
    if (r->pass) {
      ++passed;
      continue;
    }
    note += (note.empty() ? "" : "; ") + r->name + " statistic=" + format_double(r->statistic) +
            " threshold=" + format_double(r->threshold);
  }
  if (rs.size() < min_count) note += (note.empty() ? "" : "; ") + std::string("missing reports");
  if (note.empty()) note = std::to_string(passed) + " report(s)";
  return rs.size() >= min_count && passed == rs.size();
}

std::vector<const TestReport*> join(std::vector<std::vector<const TestReport*>> parts) {
  std::vector<const TestReport*> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

template <typename Pred>
std::vector<const TestReport*> filter(std::vector<const TestReport*> rs, Pred pred) {
  std::vector<const TestReport*> out;
  for (const auto* r : rs)
    if (pred(*r)) out.push_back(r);
  return out;
}

double env_double(const char* name, double def) {
  const char* v = std::getenv(name);
  return v ? std::stod(v) : def;
}

}  // namespace

int main() {
  SuiteConfig config;
  config.path_scale = env_double("MDBMLAB_ACCEPTANCE_SCALE", 1.0);
  if (const char* s = std::getenv("MDBMLAB_SEED")) config.seed = std::stoull(s);
  std::cout << "seed " << config.seed << ", path scale " << format_double(config.path_scale) << "\n";

  Reports reports;
  for (const auto& suite : suite_names()) {
    const auto start = std::chrono::steady_clock::now();
    reports[suite] = run_suite(suite, config);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "ran suite " << suite << " in " << static_cast<int>(secs) << " s\n" << std::flush;
  }

  const std::vector<Criterion> criteria = {
      {1, "Dixon-Anderson normalization",
       [](const Reports& r, std::string& n) { return all_pass(find(r, "densities", "da_normalization"), 18, n); }},
      {2, "theta = 1 flatness",
       [](const Reports& r, std::string& n) { return all_pass(find(r, "densities", "gibbs_flatness_theta1"), 2, n); }},
      {3, "PDE residual decay",
       [](const Reports& r, std::string& n) { return all_pass(find(r, "densities", "pde_residual"), 6, n); }},
      {4, "spacing bounds",
       [](const Reports& r, std::string& n) {
         return all_pass(join({find(r, "densities", "spacing_bound_C1"), find(r, "densities", "spacing_bound_C2"),
                               find(r, "densities", "spacing_bound_alpha0_equality"),
                               find(r, "densities", "spacing_bound_closed_form")}),
                         13, n);
       }},
      {5, "DBM law vs beta-Hermite (N = 4)",
       [](const Reports& r, std::string& n) {
         return all_pass(filter(find(r, "dbm", "dbm_vs_beta_hermite"),
                                [](const TestReport& t) { return t.details["N"].get<int>() == 4; }),
                         1, n);
       }},
      {6, "corners vs matrix minors",
       [](const Reports& r, std::string& n) {
         return all_pass(join({find(r, "corners", "corners_vs_matrix_minors"),
                               find(r, "corners", "corners_bottom_normal")}),
                         2, n);
       }},
      {7, "intertwining",
       [](const Reports& r, std::string& n) { return all_pass(find(r, "corners", "intertwining"), 1, n); }},
      {8, "MDBM top marginal",
       [](const Reports& r, std::string& n) { return all_pass(find(r, "mdbm", "mdbm_top_marginal"), 1, n); }},
      {9, "fixed-time Gibbs property",
       [](const Reports& r, std::string& n) { return all_pass(find(r, "mdbm", "fixed_time_gibbs"), 1, n); }},
      {10, "convergence to Warren's process",
       [](const Reports& r, std::string& n) { return all_pass(find(r, "convergence", "warren_convergence"), 1, n); }},
      {11, "Warren fixed-time law",
       [](const Reports& r, std::string& n) {
         return all_pass(join({find(r, "warren", "warren_level_vs_beta_hermite"),
                               find(r, "warren", "warren_vs_matrix_minors")}),
                         4, n);
       }},
      {12, "coupling, contraction and scaling",
       [](const Reports& r, std::string& n) {
         return all_pass(join({find(r, "appendix", "coupling_ordering"), find(r, "appendix", "coupling_gaps"),
                               find(r, "appendix", "coupling_sup_norm"),
                               find(r, "appendix", "wasserstein_contraction"),
                               find(r, "appendix", "inverse_gap_moment_scaling")}),
                         6, n);
       }},
  };

  bool ok = true;
  for (const auto& c : criteria) {
    std::string note;
    const bool pass = c.check(reports, note);
    ok = ok && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.label << "): " << note << "\n";
  }

  // 13: every suite, same seed, one thread vs four, at reduced scale.
  {
    SuiteConfig small = config;
    small.path_scale = config.path_scale * 0.05;
    std::string differing;
    for (const auto& suite : suite_names()) {
      small.threads = 1;
      const auto one = to_json(run_suite(suite, small)).dump();
      small.threads = 4;
      const auto four = to_json(run_suite(suite, small)).dump();
      if (one != four) differing += (differing.empty() ? "" : ", ") + suite;
    }
    const bool pass = differing.empty();
    ok = ok && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion 13 (determinism across thread counts): "
              << (pass ? "byte-identical reports for every suite" : "differs in " + differing) << "\n";
  }

  // Every failing report, including checks outside the criteria.
  for (const auto& [suite, rs] : reports)
    for (const auto& r : rs)
      if (!r.pass) std::cout << "note: " << suite << "/" << r.name << " failed\n";

  return ok ? 0 : 1;
}
