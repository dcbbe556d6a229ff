#include "greedy_opt/acceptance.hpp"
#include "greedy_opt/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace greedy_opt {

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct Overrides {
  std::string config_path;
  std::string variant;
  std::optional<std::uint64_t> seed;
  std::string out;
};

Config resolve(const Overrides& o) {
  Config c = load_config(o.config_path);
  if (!o.variant.empty()) c.variant = parse_variant(o.variant);
  if (o.seed) c.problem.seed = *o.seed;
  if (!o.out.empty()) c.output.dir = o.out;
  return c;
}

void print_checks(const RunReport& r) {
  for (const auto& c : r.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  }
}

int do_run(const Overrides& o, bool run_solver) {
  const Config c = resolve(o);
  const RunReport r = run_experiment(c, run_solver);
  write_outputs(r, c.output.dir, c.output.prefix);
  if (run_solver) {
    std::cout << to_string(r.trace.variant) << ": " << r.trace.iterations() << " iterations, stop "
              << to_string(r.trace.stop);
    if (r.final_gap) std::cout << ", final gap " << *r.final_gap;
    std::cout << '\n';
  }
  print_checks(r);
  if (r.failure) std::cerr << "error: " << *r.failure << " (partial report written)\n";
  std::cout << "wrote " << (c.output.dir / (c.output.prefix + ".csv")).string() << '\n';
  return r.passed() ? kPass : kCheckFailed;
}

int do_verify(const Overrides& o, std::size_t n_seeds) {
  const Config c = resolve(o);
  const AggregateReport agg = verify_bounds(c, n_seeds, thread_budget(), c.output.dir);
  std::filesystem::create_directories(c.output.dir);
  const auto path = c.output.dir / (c.output.prefix + "_verify_bounds.json");
  std::ofstream(path, std::ios::binary) << to_json(agg).dump(2) << '\n';
  std::cout << agg.seeds.size() << " seeds, " << agg.violations.size() << " violations";
  if (agg.min_slack) std::cout << ", min slack " << *agg.min_slack << ", median slack " << *agg.median_slack;
  std::cout << '\n';
  for (const auto& v : agg.violations) {
    std::cout << "violation: seed " << v.seed << " m " << v.m << " gap " << v.gap << " bound " << v.bound << '\n';
  }
  for (const auto& s : agg.seeds) {
    if (s.failure) std::cout << "seed " << s.seed << ": " << *s.failure << '\n';
  }
  return agg.passed() ? kPass : kCheckFailed;
}

int do_selftest(std::uint64_t seed, const std::string& out) {
  AcceptanceOptions options;
  options.seed = seed;
  options.threads = thread_budget();
  const std::filesystem::path dir = out.empty() ? std::filesystem::path("selftest_out") : std::filesystem::path(out);
  options.scratch = dir / "determinism";
  bool ok = true;
  for (const auto& r : run_acceptance(options)) {
    std::cout << format_result(r) << std::endl;
    ok = ok && r.passed;
  }
  write_selftest_outputs(seed, dir, options.threads);
  return ok ? kPass : kCheckFailed;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Greedy sparse minimization over dictionaries (WCGA / EGCA) with convergence diagnostics"};
  app.require_subcommand(1);

  Overrides o;
  std::uint64_t seed = 1;
  std::size_t n_seeds = 100;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "configuration file (key = value)")->required();
    sub->add_option("--variant", o.variant, "wcga or egca")->check(CLI::IsMember({"wcga", "egca"}));
    sub->add_option("--seed", o.seed, "problem seed");
    sub->add_option("--out", o.out, "output directory");
  };
  auto* run = app.add_subcommand("run", "solve one instance and run the configured analyses");
  add_common(run);
  auto* verify = app.add_subcommand("verify-bounds", "check the convergence bound over many seeds");
  add_common(verify);
  verify->add_option("--seeds", n_seeds, "number of seeds");
  auto* diagnose = app.add_subcommand("diagnose", "run the configured analyses without the solver");
  add_common(diagnose);
  auto* selftest = app.add_subcommand("selftest", "run every acceptance criterion");
  selftest->add_option("--seed", seed, "base seed");
  selftest->add_option("--out", o.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*run) return do_run(o, true);
    if (*diagnose) return do_run(o, false);
    if (*verify) return do_verify(o, n_seeds);
    if (*selftest) return do_selftest(seed, o.out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
  return kUsage;
}

}  // namespace greedy_opt
