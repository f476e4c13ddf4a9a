#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <boost/math/distributions/normal.hpp>
#include <json.hpp>

#include "rwre/config.hpp"
#include "rwre/coupling.hpp"
#include "rwre/kernels.hpp"
#include "rwre/limit.hpp"
#include "rwre/rng.hpp"
#include "rwre/stats.hpp"
#include "rwre/suites.hpp"
#include "rwre/walk.hpp"

namespace rwre::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

constexpr std::uint64_t kSimSalt = 0x51u;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Collects every numeric output so the manifest can hash them; the
// timestamped first line of each CSV is excluded.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void csv(const std::string& name, const std::string& command, const std::string& header,
           const std::string& body) {
    std::ofstream f(dir_ / name);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f << "# rwre " << kVersion << " " << command << " " << timestamp() << "\n" << header << "\n" << body;
    if (!f) throw std::runtime_error("write failed: " + (dir_ / name).string());
    hash_ = fnv1a(name, hash_);
    hash_ = fnv1a(body, hash_);
    files_.push_back(name);
  }

  void json_file(const std::string& name, const json& j) {
    std::ofstream f(dir_ / name);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f << j.dump(2) << "\n";
    if (!f) throw std::runtime_error("write failed: " + (dir_ / name).string());
  }

  void fold(const std::string& s) { hash_ = fnv1a(s, hash_); }
  std::uint64_t hash() const { return hash_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
  std::vector<std::string> files_;
};

json report_json(const Report& r) {
  json d = json::object();
  for (const auto& [k, v] : r.details) d[k] = std::isfinite(v) ? json(v) : json(nullptr);
  auto fin = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"test", r.test},           {"pass", r.pass},     {"skipped", r.skipped},
          {"underpowered", r.underpowered}, {"statistic", fin(r.statistic)},
          {"predicted", fin(r.predicted)}, {"se", fin(r.se)}, {"note", r.note},
          {"details", d}};
}

std::string report_digest(const Report& r) {
  std::string s = r.test + (r.pass ? "1" : "0") + (r.skipped ? "1" : "0") +
                  (r.underpowered ? "1" : "0") + num(r.statistic) + num(r.predicted) + num(r.se);
  for (const auto& [k, v] : r.details) s += k + num(v);
  return s;
}

json pmf_json(const Pmf1D& p) { return {{"lo", p.lo}, {"p", p.p}}; }

json constants_json(const TheoryConstants& c, const LimitFunction& lim) {
  std::vector<double> a;
  for (std::int64_t x = 0; x <= c.aBar.window(); ++x) a.push_back(c.aBar(x));
  return {{"degenerate", false},
          {"c0", c.c0},
          {"c1", c.c1},
          {"sigmaBar2", c.sigmaBar2},
          {"u0", c.u0},
          {"beta", c.beta},
          {"betaTruncationBound", c.betaTruncationBound},
          {"gammaQuadraticForm", c.gammaQF},
          {"truncatedMass", c.truncatedMass},
          {"g(1)", lim.g(1.0)},
          {"kappa(1,0)", lim.kappa(1.0, 0.0)},
          {"aBar", {{"window", c.aBar.window()}, {"residual", c.aBar.residual}, {"values", a}}},
          {"q0", pmf_json(c.q0)},
          {"qBar", pmf_json(c.qBar)},
          {"tolerances",
           {{"segmentTol", c.segmentTol}, {"potentialTol", c.potentialTol},
            {"quadratureTol", kQuadratureTol}}}};
}

json manifest(const ExperimentConfig& cfg, const std::string& command, double seconds,
              const Outputs& out, const std::vector<Report>& reports) {
  const json cj = config_to_json(cfg);
  json modules = json::object();
  for (const char* m : {"environment", "walk", "coupling", "kernels", "cltlab", "cli"})
    modules[m] = kVersion;
  json tests = json::array();
  for (const auto& r : reports) tests.push_back(report_json(r));
  return {{"command", command},
          {"version", kVersion},
          {"modules", modules},
          {"configHash", hex(fnv1a(serialize_config(cfg)))},
          {"seed", cfg.masterSeed},
          {"config", cj},
          {"tolerances", cj["tolerances"]},
          {"wallClockSeconds", seconds},
          {"startedAt", timestamp()},
          {"threads", worker_count()},
          {"outputs", out.files()},
          {"outputsHash", hex(out.hash())},
          {"tests", tests}};
}

struct Options {
  std::string command;
  std::string config;
  std::string suite = "all";
  std::string out = "rwre-out";
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> count;
  std::string what = "walk";
};

ExperimentConfig load(const Options& o) {
  ExperimentConfig cfg;
  if (!o.config.empty()) {
    cfg = load_config(o.config);
  } else {
    cfg.law = reference_law_k1();
  }
  if (o.seed) cfg.masterSeed = *o.seed;
  return cfg;
}

int cmd_constants(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = load(o);
  Outputs out(o.out);
  try {
    const auto c = constants(cfg.law, cfg.tol.segmentTol, 400);
    const LimitFunction lim(c);
    json j = constants_json(c, lim);
    out.fold(j.dump());
    out.json_file("constants.json", j);
  } catch (const DegenerateLaw& e) {
    json j = {{"degenerate", true}, {"reason", e.what()}, {"c0", e.c0}, {"c1", e.c1}, {"u0", e.u0},
              {"sigmaBar2", 0.0}};
    out.json_file("constants.json", j);
    std::cerr << "degenerate law: " << e.what() << "\n";
    return kDegenerate;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.json_file("summary.json", manifest(cfg, "constants", secs, out, {}));
  return kOk;
}

int cmd_simulate(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = load(o);
  const std::int64_t count = o.count.value_or(cfg.replicas);
  if (count < 1) throw ConfigError("--count must be >= 1");
  const std::int64_t nMax = *std::max_element(cfg.nList.begin(), cfg.nList.end());
  const auto N = static_cast<std::size_t>(count);
  Outputs out(o.out);
  std::vector<Report> reports;
  const int workers = worker_count();

  if (o.what == "walk") {
    std::vector<std::string> bodies(N), crossings(N);
#pragma omp parallel for schedule(dynamic, 4) num_threads(workers)
    for (std::int64_t i = 0; i < count; ++i) {
      const Environment env(cfg.law, replica_seed(cfg.masterSeed, i));
      CounterRng rng(stream_key(cfg.masterSeed, static_cast<std::uint64_t>(i), kSimSalt, 1));
      std::vector<Site> path;
      const auto rec = simulate_walk(env, {0, 0}, nMax, rng, &path);
      std::string& b = bodies[static_cast<std::size_t>(i)];
      for (std::size_t k = 0; k < path.size(); ++k)
        b += std::to_string(i) + "," + std::to_string(k) + "," + std::to_string(path[k].x) + "," +
             std::to_string(path[k].y) + "\n";
      std::string& c = crossings[static_cast<std::size_t>(i)];
      for (const auto& r : rec)
        c += std::to_string(i) + "," + std::to_string(r.level) + "," + std::to_string(r.lambda) + "," +
             std::to_string(r.position.x) + "," + std::to_string(r.position.y) + "\n";
    }
    std::string body, cross;
    for (std::size_t i = 0; i < N; ++i) {
      body += bodies[i];
      cross += crossings[i];
    }
    out.csv("walk_traces.csv", "simulate", "trace,step,x,y", body);
    out.csv("walk_crossings.csv", "simulate", "trace,level,lambda,x,y", cross);
  } else if (o.what == "pair") {
    // Full level listings and Q/R samples are written for the first traces
    // only; the per-n summary covers all of them.
    constexpr std::int64_t kLevelTraces = 100;
    constexpr std::int64_t kQRTraces = 1000;
    std::vector<std::string> summary(N), levels(N);
    std::vector<std::vector<std::int64_t>> Q(N), R(N);
    std::vector<double> firstL(N);
#pragma omp parallel for schedule(dynamic, 4) num_threads(workers)
    for (std::int64_t i = 0; i < count; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const Environment env(cfg.law, replica_seed(cfg.masterSeed, i));
      CouplingTrace t;
      for (std::int64_t horizon = 2 * nMax + 16;; horizon *= 2) {
        CounterRng ra(stream_key(cfg.masterSeed, static_cast<std::uint64_t>(i), kSimSalt, 2));
        CounterRng rb(stream_key(cfg.masterSeed, static_cast<std::uint64_t>(i), kSimSalt, 3));
        t = simulate_pair(env, {0, 0}, {1, 0}, horizon, ra, rb);
        if (t.commonLevels.size() > static_cast<std::size_t>(nMax)) break;
      }
      firstL[u] = static_cast<double>(t.commonLevels[1] - t.commonLevels[0]);
      for (std::int64_t n : cfg.nList) {
        const auto j = static_cast<std::size_t>(n);
        summary[u] += std::to_string(i) + "," + std::to_string(n) + "," +
                      std::to_string(t.commonLevels[j]) + "," + std::to_string(t.phi_at(n)) + "," +
                      std::to_string(t.Y[j]) + "\n";
      }
      if (i < kLevelTraces)
        for (std::size_t j = 0; j <= static_cast<std::size_t>(nMax); ++j)
          levels[u] += std::to_string(i) + "," + std::to_string(j) + "," +
                       std::to_string(t.commonLevels[j]) + "," +
                       (j == 0 ? std::string("0") : std::to_string(t.commonLevels[j] - t.commonLevels[j - 1])) +
                       "," + std::to_string(t.Y[j]) + "," + std::to_string(int(t.meetFlags[j])) + "\n";
      if (i < kQRTraces) {
        // Increments entirely within the first nMax common levels.
        std::size_t q = 0, r = 0;
        for (std::size_t j = 0; j < static_cast<std::size_t>(nMax); ++j) {
          if (t.meetFlags[j]) Q[u].push_back(t.Q[q++]);
          else R[u].push_back(t.R[r++]);
        }
      }
    }
    std::string body, lv, qs, rs;
    for (std::size_t i = 0; i < N; ++i) {
      body += summary[i];
      lv += levels[i];
      for (auto v : Q[i]) qs += std::to_string(v) + "\n";
      for (auto v : R[i]) rs += std::to_string(v) + "\n";
    }
    out.csv("pair_summary.csv", "simulate", "replica,n,L_n,phi_n,lastY", body);
    out.csv("pair_levels.csv", "simulate", "replica,j,L,dL,Y,meet", lv);
    out.csv("q_samples.csv", "simulate", "Q", qs);
    out.csv("r_samples.csv", "simulate", "R", rs);

    const auto m = stats::moments(firstL);
    Report rep;
    rep.test = "empirical_c1";
    rep.statistic = m.mean;
    rep.se = m.seMean;
    rep.note = "mean first common level from (0,0), (1,0)";
    try {
      const auto c = constants(cfg.law, cfg.tol.segmentTol, 400);
      rep.predicted = c.c1;
      rep.pass = std::abs(m.mean - c.c1) <= cfg.tol.zMax * m.seMean + 1e-12;
    } catch (const DegenerateLaw& e) {
      rep.predicted = e.c1;
      rep.pass = std::abs(m.mean - e.c1) <= cfg.tol.zMax * m.seMean + 1e-12;
    }
    out.fold(report_digest(rep));
    reports.push_back(rep);
  } else {
    throw ConfigError("--what must be walk or pair");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.json_file("summary.json", manifest(cfg, "simulate " + o.what, secs, out, reports));
  return kOk;
}

void write_verify_artifacts(const ExperimentConfig& cfg, const SuiteOutput& so, Outputs& out) {
  if (so.ensemble) {
    const auto& res = *so.ensemble;
    std::string body;
    for (std::int64_t m = 0; m < res.replicas; ++m)
      for (const auto& c : res.cells)
        body += std::to_string(m) + "," + std::to_string(c.n) + "," + num(c.s) + "," + num(c.r) + "," +
                num(c.xi[static_cast<std::size_t>(m)]) + "\n";
    out.csv("ensemble.csv", "verify", "replica,n,s,r,xi", body);

    std::optional<LimitFunction> lim;
    if (so.constants) lim.emplace(*so.constants);
    std::string vb;
    for (const auto& c : res.cells) {
      const auto mo = stats::moments(c.xi);
      const double pred = lim ? lim->covariance(c.s, c.s, c.r, c.r) : 0.0;
      vb += std::to_string(c.n) + "," + num(c.s) + "," + num(c.r) + "," + num(mo.var) + "," +
            num(mo.var / std::sqrt(double(c.n))) + "," + num(pred) + "\n";
    }
    out.csv("variance_vs_n.csv", "verify", "n,s,r,var,var_over_sqrt_n,predicted", vb);

    const std::int64_t nMax = *std::max_element(cfg.nList.begin(), cfg.nList.end());
    const double sMax = *std::max_element(cfg.sGrid.begin(), cfg.sGrid.end());
    std::string qb;
    for (double r : cfg.rList) {
      const auto& cell = res.cell(nMax, sMax, r);
      std::vector<double> z = cell.xi;
      const double scale = std::pow(double(nMax), 0.25);
      for (double& v : z) v /= scale;
      std::sort(z.begin(), z.end());
      const double var = lim ? lim->covariance(sMax, sMax, r, r) : 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double p = (double(i) + 0.5) / double(z.size());
        const double theo = var > 0.0
                                ? boost::math::quantile(boost::math::normal(0.0, std::sqrt(var)), p)
                                : 0.0;
        qb += num(r) + "," + std::to_string(i) + "," + num(theo) + "," + num(z[i]) + "\n";
      }
    }
    out.csv("qq.csv", "verify", "r,rank,theoretical,empirical", qb);
  }
  if (so.constants) {
    const auto& c = *so.constants;
    const LimitFunction lim(c);
    constexpr std::int64_t n = 1024;
    const auto m = static_cast<std::int64_t>(std::floor(double(n) / c.c1));
    const auto W = static_cast<std::int64_t>(std::ceil(3.0 * std::sqrt(double(n))));
    const auto G = green(c.qBar, c.q0, m, W);
    std::string gb;
    for (std::int64_t x = -W; x <= W; ++x) {
      const double dr = double(x) / std::sqrt(double(n));
      gb += std::to_string(x) + "," + num(G.at(x) / std::sqrt(double(n))) + "," +
            num(lim.kappa(1.0, dr)) + "\n";
    }
    out.csv("green.csv", "verify", "x,G_over_sqrt_n,kappa", gb);
  }
  std::string rb;
  for (const auto& r : so.reports) {
    std::string name = r.test;
    std::replace(name.begin(), name.end(), ',', ';');
    rb += name + "," + (r.pass ? "1" : "0") + "," + (r.skipped ? "1" : "0") + "," +
          (r.underpowered ? "1" : "0") + "," + num(r.statistic) + "," + num(r.predicted) + "," +
          num(r.se) + "\n";
  }
  out.csv("reports.csv", "verify", "test,pass,skipped,underpowered,statistic,predicted,se", rb);
}

int cmd_verify(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = load(o);
  if (o.count) cfg.replicas = *o.count;
  cfg.validate();
  Outputs out(o.out);
  const SuiteOutput so = run_suite(cfg, o.suite);
  write_verify_artifacts(cfg, so, out);
  for (const auto& r : so.reports) out.fold(report_digest(r));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json man = manifest(cfg, "verify " + o.suite, secs, out, so.reports);

  std::vector<std::string> failing;
  bool under = false;
  for (const auto& r : so.reports) {
    if (!r.pass) failing.push_back(r.test);
    if (r.underpowered) under = true;
  }
  man["failing"] = failing;
  man["underpowered"] = under;
  out.json_file("summary.json", man);

  for (const auto& r : so.reports)
    std::cout << (r.skipped ? "SKIP " : r.pass ? "PASS " : "FAIL ") << r.test
              << "  statistic=" << num(r.statistic) << " predicted=" << num(r.predicted)
              << (r.note.empty() ? "" : "  (" + r.note + ")") << "\n";
  if (!failing.empty()) {
    std::cerr << failing.size() << " test(s) failed:\n";
    for (const auto& f : failing) std::cerr << "  " << f << "\n";
    return kTestFailure;
  }
  if (under) {
    std::cerr << "warning: underpowered run (replicas " << cfg.replicas << " < "
              << cfg.tol.minReplicas << "); statistical tests skipped\n";
    return kUnderpowered;
  }
  return kOk;
}

int dispatch(const Options& o) {
  try {
    if (o.command == "constants") return cmd_constants(o);
    if (o.command == "simulate") return cmd_simulate(o);
    return cmd_verify(o);
  } catch (const EllipticityViolation& e) {
    std::cerr << "ellipticity violation: " << e.what() << "\n";
    return kEllipticity;
  } catch (const DegenerateLaw& e) {
    std::cerr << "degenerate law: " << e.what() << "\n";
    return kDegenerate;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return kConvergence;
  } catch (const MassLeak& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kConvergence;
  } catch (const CoverageError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  }
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Random walk in a random environment with a forbidden direction: "
               "theory constants, simulation and verification"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON experiment config (default: the K=1 Dirichlet law)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "master seed (overrides the config)");
  };
  auto* c = app.add_subcommand("constants", "exact theory constants -> constants.json");
  common(c);
  auto* s = app.add_subcommand("simulate", "raw walk or pair traces -> CSV");
  common(s);
  s->add_option("--what", o.what, "walk or pair")->check(CLI::IsMember({"walk", "pair"}))->capture_default_str();
  s->add_option("--count", o.count, "number of traces (default: experiment.replicas)");
  auto* v = app.add_subcommand("verify", "run a test battery -> summary.json and CSV");
  common(v);
  v->add_option("--suite", o.suite, "all, kernels, averaged or quenched")
      ->check(CLI::IsMember({"all", "kernels", "averaged", "quenched"}))
      ->capture_default_str();
  v->add_option("--count", o.count, "replicas (overrides experiment.replicas)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }
  o.command = app.get_subcommands().front()->get_name();
  return dispatch(o);
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace rwre::cli
