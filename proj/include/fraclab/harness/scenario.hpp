#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fraclab/core/problem.hpp"
#include "fraclab/extension/frequency.hpp"
#include "fraclab/extension/height.hpp"
#include "fraclab/obstacle/solve.hpp"
#include "fraclab/stochastic/monte_carlo.hpp"

namespace fraclab::harness {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ObstacleConfig {
  std::string kind = "bump";  // bump | shifted-bump | two-bumps | negative
  double center = 0.3;        // shifted-bump only
  double width = 1.0;
  double height = 1.0;
  double separation = 1.4;    // two-bumps only
};

// b(x) = value + amplitude sin(2 pi x / wavelength)
struct DriftConfig {
  double value = 0.0;
  double amplitude = 0.0;
  double wavelength = 4.0;
};

// c(x) = value + amplitude bump(x / width); the floor c0 is `value` when amplitude >= 0.
struct PotentialConfig {
  double value = 1.0;
  double amplitude = 0.0;
  double width = 1.0;
};

struct ProblemConfig {
  double s = 0.75;
  double R = 2.0;
  int n = 1025;
  ObstacleConfig obstacle;
  DriftConfig drift;
  PotentialConfig potential;
};

struct SolverConfig {
  std::vector<double> eps_schedule{1e-1, 1e-2, 1e-3, 1e-4};
  double tol = 1e-10;
  std::string iteration = "policy";  // picard | policy
};

struct McConfig {
  bool enabled = true;
  double dt = 1e-3;
  double horizon = 10.0;
  long n_paths = 100'000;
  // Defaults to the box half-width: paths leaving the box are killed like the discrete problem.
  std::optional<double> kill_radius;
  std::vector<double> probes{-1.2, -0.8, -0.5, 0.5, 0.9};
  bool alternatives = true;
};

struct FrequencyConfig {
  bool enabled = true;
  std::optional<double> p;
  std::optional<double> alpha;
  double r_max = 0.25;
  int r_min_cells = 4;
  double rho = 0.9;
  double extent = 0.5;  // height of the half-space box
  int rows = 64;
  bool subgrid_origin = true;
  std::string corrector = "base-flux";  // base-flux | obstacle-flux
  int panels = 8;
};

struct GrowthConfig {
  bool enabled = true;
  std::vector<int> cells{6, 8, 10, 12, 16, 20, 24};
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 20240901;
  ProblemConfig problem;
  SolverConfig solver;
  McConfig mc;
  FrequencyConfig frequency;
  GrowthConfig growth;
};

namespace detail {

// Reads one JSON object, remembering which keys were consumed so leftovers can be
// reported as typos.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(where() + "must be an object");
  }

  template <class T>
  void get(const char* key, T& out, bool required = false) {
    seen_.insert(key);
    if (!j_.contains(key)) {
      if (required) throw ConfigError(field(key) + "is required");
      return;
    }
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key) + "has the wrong type");
    }
  }

  template <class T>
  void get_optional(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    T v{};
    get(key, v);
    out = v;
  }

  ObjectReader child(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return ObjectReader(j_.contains(key) ? j_.at(key) : empty, path_ + key + ".");
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(field(it.key().c_str()) + "unknown key");
  }

  std::string field(const char* key) const { return path_ + key + ": "; }

 private:
  std::string where() const { return path_.empty() ? "config: " : path_.substr(0, path_.size() - 1) + ": "; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Turns a library precondition failure into a field-level config error.
template <class F>
void check_field(const std::string& field, F&& build) {
  try {
    build();
  } catch (const PreconditionError& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

}  // namespace detail

inline FractionalOrder scenario_order(const Scenario& sc) { return FractionalOrder(sc.problem.s); }
inline GridSpec scenario_grid(const Scenario& sc) { return GridSpec::line(sc.problem.R, sc.problem.n); }

inline ProblemSpec build_problem(const Scenario& sc) {
  const ProblemConfig& p = sc.problem;
  const GridSpec g = scenario_grid(sc);
  const ObstacleConfig& ob = p.obstacle;
  ScalarField phi(g);
  if (ob.kind == "bump") {
    phi = obstacles::bump_field(g, 0.0, ob.width, ob.height);
  } else if (ob.kind == "shifted-bump") {
    phi = obstacles::bump_field(g, ob.center, ob.width, ob.height);
  } else if (ob.kind == "two-bumps") {
    phi = obstacles::two_bumps_field(g, ob.separation, ob.width, ob.height);
  } else if (ob.kind == "negative") {
    phi = obstacles::negative_field(g, ob.width, ob.height);
  } else {
    throw ConfigError("problem.obstacle.kind: unknown obstacle '" + ob.kind +
                      "' (bump, shifted-bump, two-bumps, negative)");
  }
  const DriftConfig& d = p.drift;
  const PotentialConfig& c = p.potential;
  ScalarField b = ScalarField::sample(g, [&](double x) {
    return d.value + d.amplitude * std::sin(2.0 * std::numbers::pi * x / d.wavelength);
  });
  ScalarField pot = ScalarField::sample(g, [&](double x) {
    return c.value + c.amplitude * obstacles::bump(x, 0.0, c.width);
  });
  const double c0 = c.amplitude >= 0.0 ? c.value : c.value + c.amplitude;
  return ProblemSpec(FractionalOrder(p.s), CoefficientSpec(std::move(b), std::move(pot), c0),
                     std::move(phi));
}

inline PathConfig path_config(const Scenario& sc, int threads = 1) {
  PathConfig cfg;
  cfg.dt = sc.mc.dt;
  cfg.horizon = sc.mc.horizon;
  cfg.n_paths = sc.mc.n_paths;
  cfg.seed = sc.seed;
  cfg.kill_radius = sc.mc.kill_radius.value_or(sc.problem.R);
  cfg.threads = threads;
  return cfg;
}

inline FrequencyParams frequency_params(const Scenario& sc) {
  const FractionalOrder order = scenario_order(sc);
  const FrequencyParams d = FrequencyParams::defaults(order, sc.frequency.r_max);
  return FrequencyParams(order, sc.frequency.p.value_or(d.p()), sc.frequency.alpha.value_or(d.alpha()),
                         sc.frequency.r_max);
}

inline ObstacleOptions obstacle_options(const Scenario& sc) {
  ObstacleOptions opt;
  opt.eps_schedule = sc.solver.eps_schedule;
  opt.tol = sc.solver.tol;
  opt.iteration = sc.solver.iteration == "picard" ? PenaltyIteration::Picard : PenaltyIteration::Policy;
  return opt;
}

// Re-runs every constructor precondition so a bad config fails at load time with the field named.
inline void validate(const Scenario& sc) {
  if (sc.name.empty()) throw ConfigError("name: must not be empty");
  for (char ch : sc.name)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_'))
      throw ConfigError("name: only letters, digits, '-' and '_' are allowed");
  detail::check_field("problem.s", [&] { FractionalOrder(sc.problem.s); });
  detail::check_field("problem.R", [&] { GridSpec::line(sc.problem.R, 33); });
  detail::check_field("problem.n", [&] { scenario_grid(sc); });
  detail::check_field("problem", [&] { build_problem(sc); });
  if (sc.solver.iteration != "picard" && sc.solver.iteration != "policy")
    throw ConfigError("solver.iteration: must be 'picard' or 'policy'");
  if (!(sc.solver.tol > 0.0)) throw ConfigError("solver.tol: must be positive");
  detail::check_field("solver.epsSchedule", [&] {
    const auto& e = sc.solver.eps_schedule;
    require(!e.empty(), "epsilon schedule is empty");
    for (std::size_t k = 1; k < e.size(); ++k) require(e[k] < e[k - 1], "must be strictly decreasing");
    require(e.back() <= 1e-4 && e.back() > 0.0, "last epsilon must lie in (0, 1e-4]");
  });
  if (sc.mc.enabled) {
    const ProblemSpec spec = build_problem(sc);
    detail::check_field("mc", [&] { path_config(sc).validate(spec.coeffs().floor()); });
    for (double x : sc.mc.probes)
      if (!(std::abs(x) < sc.problem.R)) throw ConfigError("mc.probes: probe outside the box");
  }
  if (sc.frequency.enabled) {
    detail::check_field("frequency", [&] { frequency_params(sc); });
    const auto& f = sc.frequency;
    if (f.corrector != "base-flux" && f.corrector != "obstacle-flux")
      throw ConfigError("frequency.corrector: must be 'base-flux' or 'obstacle-flux'");
    if (!(f.rho > 0.0 && f.rho < 1.0)) throw ConfigError("frequency.rho: must lie in (0, 1)");
    if (f.r_min_cells < 1) throw ConfigError("frequency.rMinCells: must be at least 1");
    if (f.panels < 1) throw ConfigError("frequency.panels: must be at least 1");
    detail::check_field("frequency", [&] {
      HalfSpaceGrid(scenario_grid(sc), scenario_order(sc), f.extent, f.rows);
      require(f.r_max <= f.extent, "rMax must not exceed the half-space extent");
      require(f.r_max > f.r_min_cells * scenario_grid(sc).spacing(), "rMax must exceed rMinCells h");
    });
  }
  if (sc.growth.enabled) {
    if (sc.growth.cells.size() < 6) throw ConfigError("growth.cells: at least 6 radii are needed");
    for (int k : sc.growth.cells)
      if (k < 1) throw ConfigError("growth.cells: cell counts must be positive");
  }
}

inline Scenario scenario_from_json(const json& j) {
  detail::ObjectReader top(j, "");
  int version = 0;
  top.get("schemaVersion", version, true);
  if (version != kSchemaVersion)
    throw ConfigError("schemaVersion: expected " + std::to_string(kSchemaVersion) + ", got " +
                      std::to_string(version));
  Scenario sc;
  top.get("name", sc.name, true);
  top.get("seed", sc.seed);

  auto pr = top.child("problem");
  pr.get("s", sc.problem.s, true);
  pr.get("R", sc.problem.R);
  pr.get("n", sc.problem.n);
  auto ob = pr.child("obstacle");
  ob.get("kind", sc.problem.obstacle.kind, true);
  ob.get("center", sc.problem.obstacle.center);
  ob.get("width", sc.problem.obstacle.width);
  ob.get("height", sc.problem.obstacle.height);
  ob.get("separation", sc.problem.obstacle.separation);
  ob.finish();
  auto dr = pr.child("drift");
  dr.get("value", sc.problem.drift.value);
  dr.get("amplitude", sc.problem.drift.amplitude);
  dr.get("wavelength", sc.problem.drift.wavelength);
  dr.finish();
  auto po = pr.child("potential");
  po.get("value", sc.problem.potential.value);
  po.get("amplitude", sc.problem.potential.amplitude);
  po.get("width", sc.problem.potential.width);
  po.finish();
  pr.finish();

  auto so = top.child("solver");
  so.get("epsSchedule", sc.solver.eps_schedule);
  so.get("tol", sc.solver.tol);
  so.get("iteration", sc.solver.iteration);
  so.finish();

  auto mc = top.child("mc");
  mc.get("enabled", sc.mc.enabled);
  mc.get("dt", sc.mc.dt);
  mc.get("horizon", sc.mc.horizon);
  mc.get("nPaths", sc.mc.n_paths);
  mc.get_optional("killRadius", sc.mc.kill_radius);
  mc.get("probes", sc.mc.probes);
  mc.get("alternatives", sc.mc.alternatives);
  mc.finish();

  auto fr = top.child("frequency");
  fr.get("enabled", sc.frequency.enabled);
  fr.get_optional("p", sc.frequency.p);
  fr.get_optional("alpha", sc.frequency.alpha);
  fr.get("rMax", sc.frequency.r_max);
  fr.get("rMinCells", sc.frequency.r_min_cells);
  fr.get("rho", sc.frequency.rho);
  fr.get("extent", sc.frequency.extent);
  fr.get("rows", sc.frequency.rows);
  fr.get("subgridOrigin", sc.frequency.subgrid_origin);
  fr.get("corrector", sc.frequency.corrector);
  fr.get("panels", sc.frequency.panels);
  fr.finish();

  auto gr = top.child("growth");
  gr.get("enabled", sc.growth.enabled);
  gr.get("cells", sc.growth.cells);
  gr.finish();

  top.finish();
  validate(sc);
  return sc;
}

// Every field spelled out, defaults included; nlohmann::json keeps keys sorted, so the dump
// is canonical.
inline json to_json(const Scenario& sc) {
  const auto& p = sc.problem;
  json j;
  j["schemaVersion"] = kSchemaVersion;
  j["name"] = sc.name;
  j["seed"] = sc.seed;
  j["problem"] = {{"s", p.s},
                  {"R", p.R},
                  {"n", p.n},
                  {"obstacle",
                   {{"kind", p.obstacle.kind},
                    {"center", p.obstacle.center},
                    {"width", p.obstacle.width},
                    {"height", p.obstacle.height},
                    {"separation", p.obstacle.separation}}},
                  {"drift",
                   {{"value", p.drift.value},
                    {"amplitude", p.drift.amplitude},
                    {"wavelength", p.drift.wavelength}}},
                  {"potential",
                   {{"value", p.potential.value},
                    {"amplitude", p.potential.amplitude},
                    {"width", p.potential.width}}}};
  j["solver"] = {{"epsSchedule", sc.solver.eps_schedule},
                 {"tol", sc.solver.tol},
                 {"iteration", sc.solver.iteration}};
  j["mc"] = {{"enabled", sc.mc.enabled},
             {"dt", sc.mc.dt},
             {"horizon", sc.mc.horizon},
             {"nPaths", sc.mc.n_paths},
             {"killRadius", sc.mc.kill_radius.value_or(p.R)},
             {"probes", sc.mc.probes},
             {"alternatives", sc.mc.alternatives}};
  const FrequencyParams fp = frequency_params(sc);
  const auto& f = sc.frequency;
  j["frequency"] = {{"enabled", f.enabled},   {"p", fp.p()},
                    {"alpha", fp.alpha()},    {"rMax", f.r_max},
                    {"rMinCells", f.r_min_cells}, {"rho", f.rho},
                    {"extent", f.extent},     {"rows", f.rows},
                    {"subgridOrigin", f.subgrid_origin}, {"corrector", f.corrector},
                    {"panels", f.panels}};
  j["growth"] = {{"enabled", sc.growth.enabled}, {"cells", sc.growth.cells}};
  return j;
}

inline std::string canonical_dump(const Scenario& sc) { return to_json(sc).dump(); }

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string scenario_hash(const Scenario& sc) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_dump(sc))));
  return buf;
}

inline std::string run_directory_name(const Scenario& sc) {
  return sc.name + "-" + scenario_hash(sc).substr(0, 8);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace fraclab::harness
