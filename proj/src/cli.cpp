#include "mdbmlab/cli.hpp"

#include "mdbmlab/corners.hpp"
#include "mdbmlab/dbm.hpp"
#include "mdbmlab/io.hpp"
#include "mdbmlab/mdbm.hpp"
#include "mdbmlab/parallel.hpp"
#include "mdbmlab/verify.hpp"
#include "mdbmlab/warren.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>

namespace mdbmlab {

namespace {

constexpr std::uint64_t kDefaultSeed = 20240917;

struct UsageError : Error {
  using Error::Error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string k) {
  for (char& c : k)
    if (c == '-') c = '_';
  return k;
}

std::string json_scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ",") + json_scalar_text(e);
    return s;
  }
  return v.dump();
}

// ---------------------------------------------------------------------------
// Typed access to the merged settings
// ---------------------------------------------------------------------------

class Config {
 public:
  explicit Config(Settings s) : s_(std::move(s)) {}

  bool has(const std::string& k) const { return s_.count(k) > 0; }

  std::string str(const std::string& k, const std::string& def) const {
    const auto it = s_.find(k);
    return it == s_.end() ? def : it->second;
  }

  double real(const std::string& k, double def) const {
    const auto it = s_.find(k);
    if (it == s_.end()) return def;
    return to_double(k, it->second);
  }

  std::int64_t integer(const std::string& k, std::int64_t def) const {
    const auto it = s_.find(k);
    if (it == s_.end()) return def;
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(it->second, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || trim(it->second.substr(used)) != "")
      throw UsageError("setting '" + k + "' expects an integer, got '" + it->second + "'");
    return v;
  }

  std::size_t count(const std::string& k, std::size_t def, std::size_t min = 0) const {
    const std::int64_t v = integer(k, static_cast<std::int64_t>(def));
    if (v < static_cast<std::int64_t>(min))
      throw UsageError("setting '" + k + "' must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
  }

  std::vector<double> list(const std::string& k) const {
    try {
      return parse_number_list(str(k, ""));
    } catch (const DomainError& e) {
      throw UsageError("setting '" + k + "': " + e.what());
    }
  }

 private:
  static double to_double(const std::string& k, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || trim(text.substr(used)) != "")
      throw UsageError("setting '" + k + "' expects a number, got '" + text + "'");
    return v;
  }

  Settings s_;
};

std::uint64_t resolve_seed(const Config& c) {
  if (c.has("seed")) return static_cast<std::uint64_t>(c.integer("seed", 0));
  if (const char* env = std::getenv("MDBMLAB_SEED"); env && *env) {
    Settings s{{"seed", env}};
    return static_cast<std::uint64_t>(Config(s).integer("seed", 0));
  }
  return kDefaultSeed;
}

WeylVector to_weyl(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Output sink: a file when a path is given, else the fallback stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw UsageError("cannot open output file '" + path + "'");
    os_ = file_.get();
  }
  std::ostream& stream() { return *os_; }
  void finish(const std::string& what) {
    os_->flush();
    if (!*os_) throw UsageError("failed writing " + what);
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open output file '" + path + "'");
  f << j.dump(2) << '\n';
  if (!f) throw UsageError("failed writing '" + path + "'");
}

std::string summary_path(const std::string& out) {
  const auto slash = out.find_last_of('/');
  const auto dot = out.find_last_of('.');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? out.substr(0, dot) : out) + ".json";
}

/// Default save stride: every 100th step, but at least ten saved intervals.
std::size_t default_stride(std::size_t steps) {
  return std::min<std::size_t>(100, std::max<std::size_t>(1, steps / 10));
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SavedPath {
  std::vector<double> times;
  std::vector<GTPattern<double>> states;  // dbm states are stored as one-level patterns
};

int cmd_simulate(const std::string& kind, const Config& c, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  if (kind != "dbm" && kind != "mdbm" && kind != "warren")
    throw UsageError("unknown simulation kind '" + kind + "' (dbm, mdbm, warren)");

  std::vector<double> init = c.list(kind == "dbm" ? "x0" : "top");
  if (init.empty() && kind == "dbm") init = c.list("top");
  if (init.empty() && kind != "dbm") init = c.list("x0");
  const int n = static_cast<int>(c.integer("n", init.empty() ? 3 : static_cast<std::int64_t>(init.size())));
  if (n < 1) throw UsageError("n must be >= 1");
  if (init.empty()) init.assign(static_cast<std::size_t>(n), 0.0);
  if (static_cast<int>(init.size()) != n)
    throw UsageError("initial vector has " + std::to_string(init.size()) + " entries, n = " + std::to_string(n));
  const WeylVector x0 = to_weyl(init);
  if (!is_weyl(x0)) throw UsageError("initial vector must be non-decreasing");

  const double theta = c.real("theta", kind == "mdbm" ? 2.0 : 1.0);
  if (kind == "mdbm" && !(theta > 1.0))
    throw UsageError("simulate mdbm requires theta > 1 (got " + format_double(theta) + ")");
  if (kind == "warren" && theta != 1.0)
    throw UsageError("simulate warren is the theta = 1 process; drop --theta or set it to 1");
  if (kind == "dbm" && !(theta >= 0.5))
    throw UsageError("simulate dbm requires theta >= 1/2 (got " + format_double(theta) + ")");

  SimScheme scheme;
  scheme.T = c.real("t", 1.0);
  scheme.h = c.real("h", kind == "warren" ? 1e-4 : 1e-3);
  const std::uint64_t seed = resolve_seed(c);
  scheme.master_seed = seed;
  try {
    scheme.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const std::size_t paths = c.count("paths", 1, 1);
  const unsigned threads = static_cast<unsigned>(c.count("threads", 0));
  const std::size_t stride = c.count("save_stride", default_stride(scheme.steps()), 1);

  Json echo = {{"command", "simulate"}, {"kind", kind},     {"n", n},
               {"theta", theta},        {"t", scheme.T},    {"h", scheme.h},
               {"paths", paths},        {"seed", seed},     {"threads", threads},
               {"save_stride", stride}, {kind == "dbm" ? "x0" : "top", init}};
  if (c.has("out")) echo["out"] = c.str("out", "");

  std::vector<SavedPath> saved(paths);
  std::vector<ProjectionMonitor> monitors(paths);
  std::vector<std::size_t> collapses(paths, 0);
  std::vector<Eigen::VectorXd> pushes(paths);
  const Theta th(theta);
  parallel_for(
      paths,
      [&](std::size_t i) {
        NoiseStream noise = derive_noise_stream(seed, 0, i);
        SavedPath& sp = saved[i];
        if (kind == "dbm") {
          PathOptions po;
          po.save_stride = stride;
          const auto p = simulate_dbm(x0, th, scheme, noise, po);
          sp.times = p.times;
          for (const auto& x : p.states) {
            GTPattern<double> one(1);
            one.values() = x;
            sp.states.push_back(std::move(one));
          }
        } else if (kind == "mdbm") {
          MdbmOptions mo;
          mo.save_stride = stride;
          const auto p0 = gibbs_initial([&](NoiseStream&) { return x0; }, th, noise);
          auto p = simulate_mdbm(p0, th, scheme, noise, mo);
          sp.times = std::move(p.times);
          sp.states = std::move(p.states);
          monitors[i] = p.monitor;
        } else {
          WarrenOptions wo;
          wo.save_stride = stride;
          const auto p0 = gibbs_initial([&](NoiseStream&) { return x0; }, Theta(1.0), noise);
          auto p = simulate_warren(p0, scheme, noise, wo);
          sp.times = std::move(p.times);
          sp.states = std::move(p.states);
          collapses[i] = p.barrier_collapses;
          pushes[i] = p.pushes.back();
        }
      },
      threads);

  const std::string out_path = c.str("out", "");
  {
    Sink sink(out_path, out);
    CsvWriter csv(sink.stream());
    csv.header({"path", "t", "level", "index", "value"});
    for (std::size_t i = 0; i < paths; ++i)
      for (std::size_t s = 0; s < saved[i].times.size(); ++s) {
        const auto& p = saved[i].states[s];
        if (kind == "dbm") {
          for (int j = 0; j < n; ++j) csv.row_path(i, saved[i].times[s], n, j + 1, p.values()[j]);
          continue;
        }
        for (int k = 1; k <= p.levels(); ++k)
          for (int j = 0; j < k; ++j) csv.row_path(i, saved[i].times[s], k, j + 1, p(k, j));
      }
    sink.finish("trajectory CSV");
  }

  Json summary = {{"config", echo}, {"steps", scheme.steps()}, {"dt", scheme.dt()}};
  if (kind == "mdbm") {
    ProjectionMonitor total;
    for (const auto& m : monitors) total.merge(m);
    summary["projection"] = {{"steps", total.steps},
                             {"projected_steps", total.projected_steps},
                             {"projected_fraction", total.projected_fraction()},
                             {"level_clips", total.level_clips},
                             {"clipped_total", total.clipped_total},
                             {"frozen_drift", total.frozen_drift},
                             {"effective_h", effective_mdbm_scheme(theta, scheme, {}).h}};
  } else if (kind == "warren") {
    std::size_t total_collapses = 0;
    std::vector<double> level_push(static_cast<std::size_t>(n), 0.0);
    for (std::size_t i = 0; i < paths; ++i) {
      total_collapses += collapses[i];
      for (int k = 1; k <= n; ++k)
        for (int j = 0; j < k; ++j)
          level_push[static_cast<std::size_t>(k - 1)] += std::abs(pushes[i][GTPattern<double>::offset(k) + j]);
    }
    summary["reflection"] = {{"barrier_collapses", total_collapses},
                             {"abs_push_per_level", level_push}};
  }
  summary["runtime_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (out_path.empty())
    err << summary.dump(2) << '\n';
  else
    write_json_file(summary_path(out_path), summary);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

int cmd_sample(const std::string& kind, const Config& c, std::ostream& out, std::ostream& err) {
  if (kind != "corners" && kind != "beta-hermite" && kind != "gue-minors")
    throw UsageError("unknown sample kind '" + kind + "' (corners, beta-hermite, gue-minors)");
  const std::uint64_t seed = resolve_seed(c);
  const std::size_t samples = c.count("paths", 1, 1);
  const unsigned threads = static_cast<unsigned>(c.count("threads", 0));
  const double theta = c.real("theta", 1.0);
  const double t = c.real("t", 1.0);
  Json echo = {{"command", "sample"}, {"kind", kind}, {"theta", theta},
               {"paths", samples},    {"seed", seed}, {"threads", threads}};
  if (c.has("out")) echo["out"] = c.str("out", "");

  std::vector<GTPattern<double>> draws;
  if (kind == "corners") {
    const std::vector<double> top = c.list("top");
    if (top.empty()) throw UsageError("sample corners needs --top");
    const WeylVector x = to_weyl(top);
    if (!is_strictly_ordered(x)) throw UsageError("--top must be strictly increasing");
    if (!(theta >= 1.0)) throw UsageError("sample corners requires theta >= 1");
    echo["top"] = top;
    draws = draw_samples<GTPattern<double>>(
        samples, seed, 0, [&](NoiseStream& ns) { return sample_corners(x, Theta(theta), ns); }, threads);
  } else {
    const int n = static_cast<int>(c.integer("n", 3));
    if (n < 1) throw UsageError("n must be >= 1");
    if (!(t > 0.0)) throw UsageError("t must be positive");
    echo["n"] = n;
    echo["t"] = t;
    if (kind == "beta-hermite") {
      if (!(theta > 0.0)) throw UsageError("beta-hermite requires theta > 0");
      draws = draw_samples<GTPattern<double>>(
          samples, seed, 0,
          [&](NoiseStream& ns) {
            GTPattern<double> one(1);
            one.values() = sample_beta_hermite(n, Theta(theta), t, ns);
            return one;
          },
          threads);
    } else {
      if (theta != 0.5 && theta != 1.0 && theta != 2.0)
        throw UsageError("gue-minors: a matrix model exists only for theta in {0.5, 1, 2}");
      draws = draw_samples<GTPattern<double>>(
          samples, seed, 0, [&](NoiseStream& ns) { return gue_minor_oracle(n, t, theta, ns); }, threads);
    }
  }

  const std::string out_path = c.str("out", "");
  Sink sink(out_path, out);
  CsvWriter csv(sink.stream());
  csv.header({"sample", "level", "index", "value"});
  for (std::size_t s = 0; s < draws.size(); ++s) {
    const auto& p = draws[s];
    if (kind == "beta-hermite") {
      const int n = static_cast<int>(p.values().size());
      for (int j = 0; j < n; ++j) csv.row_sample(s, n, j + 1, p.values()[j]);
      continue;
    }
    for (int k = 1; k <= p.levels(); ++k)
      for (int j = 0; j < k; ++j) csv.row_sample(s, k, j + 1, p(k, j));
  }
  sink.finish("sample CSV");
  if (!out_path.empty()) write_json_file(summary_path(out_path), {{"config", echo}});
  else err << Json{{"config", echo}}.dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int cmd_verify(const Config& c, std::ostream& out, std::ostream& err) {
  const std::string suite = c.str("suite", "");
  if (suite.empty()) throw UsageError("verify needs a suite name (or 'all')");
  SuiteConfig sc;
  sc.seed = resolve_seed(c);
  sc.path_scale = c.real("path_scale", 1.0);
  if (!(sc.path_scale > 0.0)) throw UsageError("path_scale must be positive");
  sc.threads = static_cast<unsigned>(c.count("threads", 0));
  if (c.has("theta_grid")) sc.theta_grid = c.list("theta_grid");
  const bool timing = c.str("timing", "false") == "true";

  std::vector<std::string> names;
  if (suite == "all") {
    names = suite_names();
  } else {
    const auto& known = suite_names();
    if (std::find(known.begin(), known.end(), suite) == known.end()) {
      std::string list;
      for (const auto& s : known) list += (list.empty() ? "" : ", ") + s;
      throw UsageError("unknown suite '" + suite + "'; available: " + list + ", all");
    }
    names = {suite};
  }

  std::vector<TestReport> reports;
  for (const auto& name : names) {
    auto rs = run_suite(name, sc);
    for (auto& r : rs) {
      r.details["suite"] = name;
      err << (r.pass ? "PASS " : "FAIL ") << name << '/' << r.name << " statistic=" << format_double(r.statistic)
          << " threshold=" << format_double(r.threshold) << '\n';
      reports.push_back(std::move(r));
    }
  }

  const Json echo = {{"command", "verify"},          {"suite", suite},
                     {"seed", sc.seed},              {"path_scale", sc.path_scale},
                     {"threads", sc.threads},        {"theta_grid", sc.theta_grid},
                     {"timing", timing}};
  const std::string out_path = c.str("out", "");
  {
    Sink sink(out_path, out);
    sink.stream() << to_json(reports, timing).dump(2) << '\n';
    sink.finish("verification report");
  }
  if (!out_path.empty())
    write_json_file(out_path + ".config.json", {{"config", echo}});
  else
    err << Json{{"config", echo}}.dump() << '\n';

  const bool all_pass = std::all_of(reports.begin(), reports.end(), [](const TestReport& r) { return r.pass; });
  return all_pass ? kExitOk : kExitFailure;
}

}  // namespace

Settings parse_config_text(const std::string& text) {
  Settings s;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    Json j;
    try {
      j = Json::parse(body);
    } catch (const Json::exception& e) {
      throw UsageError(std::string("config JSON: ") + e.what());
    }
    const Json& obj = j.contains("config") ? j["config"] : j;
    for (const auto& [k, v] : obj.items()) {
      if (k == "command" || k == "kind") continue;
      s[normalize_key(k)] = json_scalar_text(v);
    }
    return s;
  }
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = normalize_key(trim(line.substr(0, eq)));
    if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
    s[key] = trim(line.substr(eq + 1));
  }
  return s;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::string body = trim(text);
  if (!body.empty() && body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
  if (trim(body).empty()) return out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw DomainError("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and verification of multilevel Dyson Brownian motions", "mdbmlab"};
  // "-h" is taken by the time step.
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);
  Settings flags;
  std::string config_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value file (or a JSON config echo)");
    const std::vector<std::pair<const char*, const char*>> keyed = {
        {"--n", "dimension (top level size)"},
        {"--theta", "interaction strength"},
        {"--t", "time horizon / sampling time"},
        {"--h", "time step"},
        {"--paths", "number of paths or samples"},
        {"--seed", "master seed (fallback: MDBMLAB_SEED)"},
        {"--out", "output file"},
        {"--threads", "worker threads (0 = hardware)"},
        {"--save-stride", "keep every k-th step"},
        {"--top", "top level, comma-separated"},
        {"--x0", "initial vector, comma-separated"},
        {"--suite", "verification suite"},
        {"--theta-grid", "theta values for the convergence suite"},
        {"--path-scale", "multiplier on suite path counts"},
    };
    for (const auto& [flag, help] : keyed) {
      const std::string key = normalize_key(std::string(flag).substr(2));
      sub->add_option_function<std::string>(flag, [&flags, key](const std::string& v) { flags[key] = v; }, help);
    }
    sub->add_flag_callback("--timing", [&flags] { flags["timing"] = "true"; }, "include runtimes in reports");
  };

  std::string sim_kind, sample_kind, suite_arg;
  auto* sim = app.add_subcommand("simulate", "simulate dbm | mdbm | warren paths to CSV");
  sim->add_option("kind", sim_kind, "dbm, mdbm or warren")->required();
  add_common(sim);
  auto* smp = app.add_subcommand("sample", "draw corners | beta-hermite | gue-minors samples to CSV");
  smp->add_option("kind", sample_kind, "corners, beta-hermite or gue-minors")->required();
  add_common(smp);
  auto* ver = app.add_subcommand("verify", "run a verification suite; JSON report");
  ver->add_option("name", suite_arg, "suite name or 'all' (same as --suite)");
  add_common(ver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help requests are reported by CLI11 with exit code 0.
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    Settings merged;
    if (!config_path.empty()) {
      std::ifstream f(config_path, std::ios::binary);
      if (!f) throw UsageError("cannot read config file '" + config_path + "'");
      std::stringstream ss;
      ss << f.rdbuf();
      merged = parse_config_text(ss.str());
    }
    for (const auto& [k, v] : flags) merged[k] = v;
    if (!suite_arg.empty()) merged["suite"] = suite_arg;
    const Config cfg(merged);
    if (sim->parsed()) return cmd_simulate(sim_kind, cfg, out, err);
    if (smp->parsed()) return cmd_sample(sample_kind, cfg, out, err);
    return cmd_verify(cfg, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace mdbmlab
