// Command-line front end: solve / validate-mc / frequency / report / selftest.
// Exit status: 0 every check passed, 2 a check failed, 1 usage or config error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "fraclab/harness/run.hpp"
#include "fraclab/harness/selftest.hpp"

namespace fs = std::filesystem;
using namespace fraclab::harness;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFail = 2;

// A run directory carries its own canonical scenario.json.
Scenario resolve_scenario(const std::string& arg) {
  const fs::path p(arg);
  return load_scenario(fs::is_directory(p) ? (p / "scenario.json").string() : arg);
}

int run(const std::string& target, unsigned stages, const RunOptions& opt, std::optional<std::uint64_t> seed) {
  Scenario sc = resolve_scenario(target);
  if (seed) sc.seed = *seed;
  const RunResult res = run_scenario(sc, [&] {
    RunOptions o = opt;
    o.stages = stages;
    return o;
  }());
  const Report rep = make_report(res.dir);
  std::cout << rep.text;
  std::cout << res.dir.string() << '\n';
  return rep.all_passed ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fraclab: fractional obstacle problems, stochastic validation and frequency analysis"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  RunOptions opt;
  std::string out = "runs";
  app.add_option("--seed", seed, "override the scenario seed");
  app.add_option("--out", out, "parent directory for run directories");
  app.add_option("--threads", opt.threads, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", opt.quiet, "suppress progress output");

  std::string target;
  auto* solve = app.add_subcommand("solve", "run every enabled stage of a scenario");
  solve->add_option("config", target, "scenario JSON")->required();
  auto* mc = app.add_subcommand("validate-mc", "solve and run the Monte Carlo validation");
  mc->add_option("config", target, "scenario JSON or run directory")->required();
  auto* freq = app.add_subcommand("frequency", "solve and run the frequency and growth analysis");
  freq->add_option("config", target, "scenario JSON or run directory")->required();
  std::string run_dir;
  auto* report = app.add_subcommand("report", "print the check table of a run directory");
  report->add_option("runDir", run_dir, "run directory")->required();
  auto* selftest = app.add_subcommand("selftest", "run the closed-form self checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }
  opt.out = out;
  if (opt.quiet) fraclab::set_warning_sink([](const std::string&) {});

  try {
    if (*solve) return run(target, kAll, opt, seed);
    if (*mc) return run(target, kSolve | kMonteCarlo, opt, seed);
    if (*freq) return run(target, kSolve | kFrequency, opt, seed);
    if (*report) {
      const Report rep = make_report(run_dir);
      std::cout << rep.text;
      detail::write_text(fs::path(run_dir) / "report.json", rep.table.dump(2) + "\n");
      for (const auto& r : rep.rows)
        if (!r.passed) std::cerr << "failed: " << r.name << '\n';
      return rep.all_passed ? kExitPass : kExitFail;
    }
    if (*selftest) {
      const fs::path scratch = fs::temp_directory_path() / "fraclab-selftest";
      fs::remove_all(scratch);
      fraclab::set_warning_sink([](const std::string&) {});
      int failed = 0;
      for (const auto& c : selftest_cases(scratch)) {
        bool ok = false;
        std::string why;
        try {
          ok = c.run();
        } catch (const std::exception& e) {
          why = std::string("  (") + e.what() + ")";
        }
        failed += !ok;
        std::cout << (ok ? "PASS  " : "FAIL  ") << c.name << why << '\n';
      }
      fs::remove_all(scratch);
      return failed == 0 ? kExitPass : kExitFail;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
