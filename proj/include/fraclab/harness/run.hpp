#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "fraclab/extension/diagnostics.hpp"
#include "fraclab/extension/frequency.hpp"
#include "fraclab/extension/height.hpp"
#include "fraclab/harness/scenario.hpp"

namespace fraclab::harness {

namespace fs = std::filesystem;

// Pipeline stages; `solve` always runs because the others consume its solution.
enum Stage : unsigned { kSolve = 1u, kMonteCarlo = 2u, kFrequency = 4u, kAll = 7u };

inline constexpr const char* kModuleSolver = "obstacle-solver";
inline constexpr const char* kModuleStochastic = "stochastic-validator";
inline constexpr const char* kModuleExtension = "extension-lab";

struct Check {
  std::string name;
  std::string module;
  double value = 0.0;
  std::string band;
  bool passed = false;
  std::string note;
};

inline json to_json(const Check& c) {
  return {{"name", c.name}, {"module", c.module}, {"value", c.value},
          {"band", c.band}, {"passed", c.passed}, {"note", c.note}};
}

struct RunOptions {
  fs::path out = "runs";
  int threads = 1;
  bool quiet = false;
  unsigned stages = kAll;
};

struct RunResult {
  fs::path dir;
  json record;
  bool all_passed = true;
};

namespace detail {

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string short_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

class Log {
 public:
  explicit Log(bool quiet) : quiet_(quiet) {}
  void operator()(const std::string& msg) const {
    if (!quiet_) std::cerr << "[fraclab] " << msg << '\n';
  }

 private:
  bool quiet_;
};

// Runs one module step; any exception becomes a failed check named after the module
// instead of aborting the run.
template <class F>
void guarded(std::vector<Check>& checks, const char* module, const std::string& what, F&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    checks.push_back({std::string(module) + "." + what + ".error", module, 0.0, "no error", false,
                      e.what()});
  }
}

}  // namespace detail

// Everything the stages share: the penalized solution and its exact polish.
struct SolvedScenario {
  ProblemSpec spec;
  ObstacleSolution solution;
  std::optional<ObstacleSolution> exact;
};

inline SolvedScenario solve_stage(const Scenario& sc, json& rec, std::vector<Check>& checks,
                                  const fs::path& dir, const detail::Log& log) {
  const auto t0 = std::chrono::steady_clock::now();
  ProblemSpec spec = build_problem(sc);
  const DiscreteOperator op(spec);
  ObstacleSolution sol = obstacle_solve(spec, obstacle_options(sc), &op);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log("solved " + sc.name + " in " + detail::short_num(seconds) + " s, compResidual " +
      detail::short_num(sol.comp_residual));

  const GridSpec& g = spec.grid();
  std::string csv = "x,u,phi,contact\n";
  for (int i = 0; i < g.nodes_per_axis(); ++i)
    csv += detail::num(g.coord(i)) + "," + detail::num(sol.u[i]) + "," +
           detail::num(spec.obstacle()[i]) + "," + (sol.in_contact(i) ? "1" : "0") + "\n";
  detail::write_text(dir / "trace.csv", csv);

  json fb = json::array();
  for (int i : sol.free_boundary) fb.push_back({{"index", i}, {"x", g.coord(i)}});
  rec["solve"] = {{"nodes", g.nodes_per_axis()},
                  {"compResidual", sol.comp_residual},
                  {"compBound", sol.comp_bound},
                  {"lphiPlus", sol.lphi_plus},
                  {"epsUsed", sol.eps_used},
                  {"compTrace", sol.comp_trace},
                  {"iterations", sol.iterations},
                  {"contactNodes", std::count(sol.contact.begin(), sol.contact.end(), 1)},
                  {"freeBoundary", fb},
                  {"uMax", sol.u.max_abs()}};
  checks.push_back({"solve.complementarity", kModuleSolver, sol.comp_residual,
                    "<= " + detail::short_num(sol.comp_bound), sol.converged, ""});

  SolvedScenario out{spec, sol, std::nullopt};
  detail::guarded(checks, kModuleSolver, "polish", [&] {
    out.exact = complementarity_polish(spec, sol, &op);
    const double tol = 1e-9 * std::max(1.0, spec.obstacle().max_abs());
    rec["solve"]["exactCompResidual"] = out.exact->comp_residual;
    rec["solve"]["exactDistance"] = sup_distance(out.exact->u, sol.u);
    checks.push_back({"solve.exact-complementarity", kModuleSolver, out.exact->comp_residual,
                      "<= " + detail::short_num(tol), out.exact->converged, ""});
  });
  return out;
}

inline void monte_carlo_stage(const Scenario& sc, const SolvedScenario& st, json& rec,
                              std::vector<Check>& checks, const fs::path& dir, int threads,
                              const detail::Log& log) {
  const ProblemSpec& spec = st.spec;
  const ObstacleSolution& sol = st.solution;
  const GridSpec& g = spec.grid();
  const PathConfig cfg = path_config(sc, threads);
  const double allowance = 0.02 * spec.obstacle().max_abs();
  std::string csv = "x0,rule,mean,stdErr,nPaths\n";
  auto row = [&](double x0, const MCEstimate& e) {
    csv += detail::num(x0) + "," + e.rule + "," + detail::num(e.mean) + "," + detail::num(e.std_error) +
           "," + std::to_string(e.n_paths) + "\n";
  };
  json probes = json::array();
  for (double xp : sc.mc.probes) {
    const int node = g.nearest_index(xp);
    const double x0 = g.coord(node);
    const double u = sol.u[node];
    json pj = {{"x0", x0}, {"node", node}, {"u", u}};
    const std::string tag = "mc[x0=" + detail::short_num(x0) + "]";
    detail::guarded(checks, kModuleStochastic, tag, [&] {
      if (sol.contact_empty()) {
        pj["contact"] = nullptr;
        checks.push_back({tag + ".contact-set", kModuleStochastic, 0.0, "n/a", true,
                          "contact set empty; only alternative rules are run"});
      } else {
        const MCEstimate e = value_at(node, ContactSetRule{}, spec, sol, cfg);
        row(x0, e);
        const double band = 4.0 * e.std_error + allowance;
        pj["contact"] = {{"mean", e.mean}, {"stdErr", e.std_error}, {"nPaths", e.n_paths}};
        checks.push_back({tag + ".contact-set", kModuleStochastic, std::abs(e.mean - u),
                          "<= " + detail::short_num(band), std::abs(e.mean - u) <= band,
                          "|MC - u(x0)|"});
        log(tag + " contact-set " + detail::short_num(e.mean) + " vs u " + detail::short_num(u));
      }
      if (!sc.mc.alternatives) return;
      json alts = json::array();
      bool dominated = true;
      double worst = -std::numeric_limits<double>::infinity();
      for (const auto& e : suboptimality_check(node, default_alternative_rules(x0), spec, sol, cfg)) {
        row(x0, e);
        alts.push_back({{"rule", e.rule}, {"mean", e.mean}, {"stdErr", e.std_error}, {"nPaths", e.n_paths}});
        dominated = dominated && e.below(u, allowance);
        worst = std::max(worst, e.mean - u - 4.0 * e.std_error);
      }
      pj["alternatives"] = alts;
      checks.push_back({tag + ".alternatives-dominated", kModuleStochastic, worst,
                        "<= " + detail::short_num(allowance), dominated,
                        "max over rules of mean - u - 4 stdErr"});
    });
    probes.push_back(pj);
  }
  detail::write_text(dir / "mc.csv", csv);
  rec["mc"] = {{"probes", probes}, {"killRadius", cfg.kill_radius}, {"dt", cfg.dt},
               {"horizon", cfg.horizon}, {"nPaths", cfg.n_paths}, {"seed", cfg.seed}};
}

inline void frequency_stage(const Scenario& sc, const SolvedScenario& st, json& rec,
                            std::vector<Check>& checks, const fs::path& dir, int threads,
                            const detail::Log& log) {
  const ProblemSpec& spec = st.spec;
  const GridSpec& g = spec.grid();
  const FractionalOrder order = spec.order();
  const double s = order.s();
  json points = json::array();
  if (!st.exact) {
    rec["frequency"] = {{"points", points}, {"note", "no exact solution to analyse"}};
    return;
  }
  const ObstacleSolution& sol = *st.exact;
  const FrequencyParams params = frequency_params(sc);
  const double lower = 1.0 + order.a() + 2.0 * (1.0 + s) - 0.1;
  const double h = g.spacing();
  for (int base : sol.free_boundary) {
    json pj = {{"index", base}, {"x", g.coord(base)}};
    const std::string tag = "fb[" + std::to_string(base) + "]";
    if (sc.frequency.enabled)
      detail::guarded(checks, kModuleExtension, tag + ".frequency", [&] {
        const HalfSpaceGrid hg(g, order, sc.frequency.extent, sc.frequency.rows);
        HeightOptions ho;
        ho.polish = false;
        ho.subgrid_origin = sc.frequency.subgrid_origin;
        ho.corrector = sc.frequency.corrector == "obstacle-flux" ? HeightCorrector::ObstacleFlux
                                                                 : HeightCorrector::BaseFluxCancel;
        ho.extension.threads = threads;
        const HeightFunction hf = height_function(sol, spec, base, hg, ho);
        const double r_max = std::min(sc.frequency.r_max, hf.v.radius_limit());
        const auto radii = geometric_radii(r_max, sc.frequency.r_min_cells * h, sc.frequency.rho);
        const FrequencyCurve curve = frequency_curve(hf.v, radii, params, sc.frequency.panels, threads);
        std::string csv = "r,F,Phi,d_r,truncActive\n";
        for (std::size_t k = 0; k < radii.size(); ++k)
          csv += detail::num(radii[k]) + "," + detail::num(curve.F[k]) + "," + detail::num(curve.Phi[k]) +
                 "," + detail::num(curve.dr[k]) + "," + (curve.trunc_active[k] ? "1" : "0") + "\n";
        detail::write_text(dir / ("frequency-" + std::to_string(base) + ".csv"), csv);

        const MonotonicityReport mono = monotonicity_check(curve, params);
        const FrequencyLimit lim = frequency_limit(curve, order, params);
        const BoundaryMeanReport bm = boundary_mean_check(hf.v, radii, order, params.alpha());
        const char* branch = lim.branch == FrequencyBranch::Degenerate    ? "degenerate"
                             : lim.branch == FrequencyBranch::ContactRate ? "contact-rate"
                                                                          : "growth";
        pj["originShift"] = hf.origin_shift;
        pj["corrector"] = hf.corrector;
        pj["originValue"] = curve.origin_value;
        pj["monotonicityC"] = mono.C;
        pj["monotone"] = mono.passed;
        pj["phi0"] = lim.phi0;
        pj["phi0Expected"] = lim.expected;
        pj["branch"] = branch;
        pj["boundaryMeanSlope"] = bm.slope;
        pj["boundaryMeanBelowFloor"] = bm.below_floor;
        checks.push_back({tag + ".monotonicity", kModuleExtension, mono.C, "C <= 100", mono.passed,
                          mono.passed ? "" : "offending radii " + detail::short_num(mono.bad_r_lo) + ", " +
                                                 detail::short_num(mono.bad_r_hi)});
        const bool degenerate = lim.branch == FrequencyBranch::Degenerate;
        checks.push_back({tag + ".phi0", kModuleExtension, lim.phi0, ">= " + detail::short_num(lower),
                          !degenerate && lim.phi0 >= lower, std::string("branch ") + branch});
        checks.push_back({tag + ".boundary-mean", kModuleExtension, bm.slope,
                          ">= " + detail::short_num(bm.band) + " or below floor", bm.passed,
                          bm.below_floor ? "mean below floor on every radius" : ""});
        log(tag + " Phi(0+) " + detail::short_num(lim.phi0) + ", C " + detail::short_num(mono.C));
      });
    if (sc.growth.enabled)
      detail::guarded(checks, kModuleExtension, tag + ".growth", [&] {
        const GrowthFit fit = growth_exponent_fit(sol, spec, base, cell_radii(h, sc.growth.cells));
        pj["kappa"] = fit.exponent;
        pj["growthRadii"] = fit.radii;
        pj["growthSup"] = fit.sup_gap;
        const bool ok = std::abs(fit.exponent - (1.0 + s)) <= 0.15;
        checks.push_back({tag + ".growth-exponent", kModuleExtension, fit.exponent,
                          "[" + detail::short_num(1.0 + s - 0.15) + ", " + detail::short_num(1.0 + s + 0.15) + "]",
                          ok, ""});
        log(tag + " growth exponent " + detail::short_num(fit.exponent));
      });
    points.push_back(pj);
  }
  rec["frequency"] = {{"points", points},
                      {"p", params.p()},
                      {"alpha", params.alpha()},
                      {"gamma", params.gamma()}};
}

inline json load_record(const fs::path& dir) {
  const fs::path p = dir / "record.json";
  if (!fs::exists(p)) throw std::runtime_error("no record in " + dir.string());
  std::ifstream in(p);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("corrupt record " + p.string() + ": " + e.what());
  }
}

// Runs the requested stages and persists CSVs plus record.json under
// <out>/<name>-<hash8>/. A rerun of a subset replaces only that subset's sections and checks.
inline RunResult run_scenario(const Scenario& sc, const RunOptions& opt = {}) {
  const detail::Log log(opt.quiet);
  RunResult res;
  res.dir = opt.out / run_directory_name(sc);
  fs::create_directories(res.dir);
  detail::write_text(res.dir / "scenario.json", to_json(sc).dump(2) + "\n");

  json rec = fs::exists(res.dir / "record.json") ? load_record(res.dir) : json::object();
  rec["schemaVersion"] = kSchemaVersion;
  rec["scenario"] = sc.name;
  rec["hash"] = scenario_hash(sc);
  rec["seed"] = sc.seed;
  rec["config"] = to_json(sc);
  rec["startedAt"] = detail::utc_now();

  std::vector<std::string> rerun{kModuleSolver};
  if (opt.stages & kMonteCarlo) rerun.push_back(kModuleStochastic);
  if (opt.stages & kFrequency) rerun.push_back(kModuleExtension);
  std::vector<Check> checks;

  const auto t0 = std::chrono::steady_clock::now();
  std::optional<SolvedScenario> st;
  detail::guarded(checks, kModuleSolver, "solve", [&] { st = solve_stage(sc, rec, checks, res.dir, log); });
  if (st && (opt.stages & kMonteCarlo) && sc.mc.enabled)
    monte_carlo_stage(sc, *st, rec, checks, res.dir, opt.threads, log);
  if (st && (opt.stages & kFrequency) && (sc.frequency.enabled || sc.growth.enabled))
    frequency_stage(sc, *st, rec, checks, res.dir, opt.threads, log);
  rec["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rec["finishedAt"] = detail::utc_now();

  json merged = json::array();
  if (rec.contains("checks"))
    for (const auto& c : rec["checks"])
      if (std::find(rerun.begin(), rerun.end(), c.value("module", "")) == rerun.end()) merged.push_back(c);
  for (const auto& c : checks) merged.push_back(to_json(c));
  rec["checks"] = merged;
  for (const auto& c : merged) res.all_passed = res.all_passed && c.value("passed", false);
  rec["allPassed"] = res.all_passed;
  detail::write_text(res.dir / "record.json", rec.dump(2) + "\n");
  res.record = std::move(rec);
  return res;
}

struct ReportRow {
  std::string name, band, note;
  double value = 0.0;
  bool passed = false;
};

struct Report {
  std::string scenario, hash;
  std::vector<ReportRow> rows;
  bool all_passed = true;
  std::string text;   // human-readable table
  json table;         // machine-readable rows
};

inline Report make_report(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("no record: " + dir.string() + " is not a directory");
  const json rec = load_record(dir);
  if (!rec.contains("checks") || !rec["checks"].is_array())
    throw std::runtime_error("corrupt record in " + dir.string() + ": no checks table");
  Report rep;
  rep.scenario = rec.value("scenario", "");
  rep.hash = rec.value("hash", "");
  std::size_t width = 5;
  for (const auto& c : rec["checks"]) {
    ReportRow r{c.value("name", ""), c.value("band", ""), c.value("note", ""), c.value("value", 0.0),
                c.value("passed", false)};
    width = std::max(width, r.name.size());
    rep.all_passed = rep.all_passed && r.passed;
    rep.rows.push_back(r);
  }
  std::ostringstream os;
  os << "scenario " << rep.scenario << " (" << rep.hash << ")\n";
  char line[512];
  std::snprintf(line, sizeof line, "%-*s  %12s  %-28s  %s\n", static_cast<int>(width), "check", "value",
                "band", "verdict");
  os << line;
  int failed = 0;
  rep.table = json::array();
  for (const auto& r : rep.rows) {
    std::snprintf(line, sizeof line, "%-*s  %12.5g  %-28s  %s%s%s\n", static_cast<int>(width), r.name.c_str(),
                  r.value, r.band.c_str(), r.passed ? "PASS" : "FAIL", r.note.empty() ? "" : "  ",
                  r.note.c_str());
    os << line;
    failed += !r.passed;
    rep.table.push_back({{"name", r.name}, {"value", r.value}, {"band", r.band}, {"passed", r.passed}});
  }
  os << rep.rows.size() << " checks, " << failed << " failed\n";
  rep.text = os.str();
  return rep;
}

}  // namespace fraclab::harness
