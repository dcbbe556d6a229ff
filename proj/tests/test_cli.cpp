#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "greedy_opt/experiment.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

using namespace greedy_opt;

namespace {

const std::filesystem::path kConfigs = std::filesystem::path(GREEDY_OPT_SOURCE_DIR) / "configs";

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("greedy_opt_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> split_lines(const std::string& text, const std::string& eol) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto next = text.find(eol, pos);
    if (next == std::string::npos) {
      out.push_back(text.substr(pos));
      break;
    }
    out.push_back(text.substr(pos, next - pos));
    pos = next + eol.size();
  }
  return out;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "greedy_opt");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = run_cli(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

Config planted_k5() { return load_config(kConfigs / "planted_k5.cfg"); }

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

TEST_CASE("config parsing reads dotted keys") {
  const Config c = parse_config(
      "# comment\n"
      "problem.kind = general_quadratic   # trailing\n"
      "problem.dimension=12\n"
      "problem.norm = inf\n"
      "solver.t_list = 1, 0.5, 0.25\n"
      "solver.stop_gap = 1e-8\n"
      "variant = egca\n"
      "analysis.u_grid = 0.01 0.1 1\n"
      "analysis.V = 2\n"
      "output.timing = yes\n");
  CHECK(c.problem.objective == ObjectiveKind::general_quadratic);
  CHECK(c.problem.dimension == 12);
  CHECK(c.problem.norm.is_infinity());
  CHECK(c.solver.weakness.values() == std::vector<double>{1.0, 0.5, 0.25});
  CHECK(*c.solver.stop_gap == 1e-8);
  CHECK(c.variant == Variant::egca);
  CHECK(c.analysis.u_grid.size() == 3);
  CHECK(*c.analysis.V == 2.0);
  CHECK(c.output.timing);
}

TEST_CASE("config errors name the source line and key") {
  CHECK_THROWS_WITH_AS(parse_config("problem.dimension = 4\nproblem.colour = red\n", "x.cfg"),
                       doctest::Contains("x.cfg:2: unknown key 'problem.colour'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("problem.dimension = four\n", "x.cfg"), doctest::Contains("x.cfg:1: problem.dimension"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("\n\njust words\n", "x.cfg"), doctest::Contains("x.cfg:3"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("variant = wcga\nvariant = egca\n", "x.cfg"), doctest::Contains("duplicate"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("solver.t = 0.5\nsolver.t_list = 1, 0.5\n"), doctest::Contains("mutually exclusive"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config("solver.t = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("problem.planted = none\nanalysis.recursion = true\n"), ConfigError);
  CHECK_THROWS_WITH_AS(load_config("/nonexistent/dir/run.cfg"), doctest::Contains("/nonexistent/dir/run.cfg"), ConfigError);
}

TEST_CASE("config text round-trips") {
  std::mt19937_64 rng(5);
  const auto pick = [&](auto... options) {
    std::vector<std::common_type_t<decltype(options)...>> v{options...};
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Config c;
    c.problem.objective = pick(ObjectiveKind::identity_quadratic, ObjectiveKind::general_quadratic,
                               ObjectiveKind::regularized_logistic);
    c.problem.dimension = pick(8, 16, 64);
    c.problem.dictionary = pick(DictionaryKind::canonical, DictionaryKind::gaussian_normalized, DictionaryKind::two_ortho_union);
    c.problem.norm = pick(NormSpec::l1(), NormSpec::l2(), NormSpec{1.7}, NormSpec::infinity());
    c.problem.planted = pick(PlantedKind::sparse, PlantedKind::power_law);
    c.problem.sparsity = pick(1, 3, 5);
    c.problem.magnitude_min = unit(rng);
    c.problem.magnitude_max = c.problem.magnitude_min + unit(rng);
    c.problem.tail_norm = pick(0.0, unit(rng));
    c.problem.decay_exponent = 1.0 + unit(rng);
    c.problem.delta = unit(rng);
    c.problem.seed = rng();
    if (trial % 3 == 0) c.problem.declared_gamma = unit(rng) * 10.0;
    if (trial % 4 == 0) c.problem.declared_beta = unit(rng);
    c.solver.max_iterations = pick(0, 7, 200);
    c.solver.weakness = trial % 2 ? WeaknessSequence::constant(unit(rng))
                                  : WeaknessSequence::explicit_list({unit(rng), unit(rng), unit(rng)});
    c.solver.selection = pick(SelectionMode::argmax, SelectionMode::adversarial);
    c.solver.orth_tol = unit(rng) * 1e-9;
    if (trial % 5 == 0) c.solver.stop_gap = unit(rng) * 1e-6;
    c.variant = pick(Variant::wcga, Variant::egca);
    c.analyses.bounds = trial % 2;
    c.analyses.smoothness = trial % 3;
    c.analysis.u_grid = {unit(rng) * 1e-3, 0.5, 1.0 + unit(rng)};
    c.analysis.r = unit(rng);
    if (trial % 2) c.analysis.V = 1.0 + unit(rng);
    if (trial % 3) c.analysis.seed = rng();
    c.analysis.incoherence_mode = pick(IncoherenceMode::exact, IncoherenceMode::monte_carlo);
    c.output.dir = "out dir/" + std::to_string(trial);
    c.output.prefix = "p" + std::to_string(trial);
    c.output.timing = trial % 7 == 0;

    const std::string text = to_config_text(c);
    const Config back = parse_config(text);
    CHECK(to_config_text(back) == text);
    CHECK(back.problem.seed == c.problem.seed);
    CHECK(back.problem.magnitude_min == c.problem.magnitude_min);
    CHECK(back.solver.weakness.values() == c.solver.weakness.values());
    CHECK(back.output.dir == c.output.dir);
  }
}

// ---------------------------------------------------------------------------
// Experiments and reports

TEST_CASE("planted run writes six rows and recovers exactly") {
  const auto dir = scratch("planted");
  Config c = planted_k5();
  const RunReport r = run_experiment(c);
  CHECK(r.passed());
  CHECK(r.trace.records.size() == r.trace.iterations() + 1);
  CHECK(*r.final_gap <= 1e-10);
  write_outputs(r, dir, "k5");
  const std::string csv = slurp(dir / "k5.csv");
  const auto lines = split_lines(csv, "\r\n");
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "m,atom_index,sign,pairing,sup_pairing,energy,gap,orth_residual,thm21_bound");
  CHECK(lines[1].rfind("0,,,,,", 0) == 0);
  CHECK(csv.find('\n') == csv.find("\r\n") + 1);
  // 17 significant digits round-trip every energy.
  for (std::size_t m = 0; m < 6; ++m) {
    std::istringstream row(lines[m + 1]);
    std::string cell;
    for (int k = 0; k < 6; ++k) std::getline(row, cell, ',');
    CHECK(std::stod(cell) == r.trace.records[m].energy);
  }
  const auto json = nlohmann::json::parse(slurp(dir / "k5.json"));
  CHECK(json["passed"] == true);
  CHECK(json["records"].size() == 6);
  CHECK_FALSE(json.contains("wall_clock_seconds"));
  CHECK(parse_config(json["config"].get<std::string>()).problem.seed == c.problem.seed);
  CHECK(std::filesystem::exists(dir / "k5_solution.txt"));
}

TEST_CASE("egca makes the same selections on the planted config") {
  Config c = planted_k5();
  const RunReport w = run_experiment(c);
  c.variant = Variant::egca;
  const RunReport g = run_experiment(c);
  REQUIRE(w.trace.records.size() == g.trace.records.size());
  for (std::size_t m = 1; m < w.trace.records.size(); ++m) CHECK(w.trace.records[m].atom == g.trace.records[m].atom);
  CHECK(*g.final_gap <= 1e-10);
}

TEST_CASE("outputs are byte identical across repeated runs") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  for (const char* name : {"planted_k5.cfg", "logistic.cfg", "two_ortho.cfg"}) {
    const Config c = load_config(kConfigs / name);
    write_outputs(run_experiment(c), a, c.output.prefix);
    write_outputs(run_experiment(c), b, c.output.prefix);
    CHECK(slurp(a / (c.output.prefix + ".csv")) == slurp(b / (c.output.prefix + ".csv")));
    CHECK(slurp(a / (c.output.prefix + ".json")) == slurp(b / (c.output.prefix + ".json")));
  }
}

TEST_CASE("bound series exists exactly when the constants are complete") {
  const RunReport k5 = run_experiment(planted_k5());
  CHECK(k5.constants.complete_for_bound());
  CHECK(k5.bound_series.size() == k5.trace.records.size());

  Config lg = load_config(kConfigs / "logistic.cfg");
  const RunReport r = run_experiment(lg);
  CHECK_FALSE(r.constants.complete_for_bound());
  CHECK(r.bound_series.empty());
  lg.analyses.bounds = true;
  const RunReport missing = run_experiment(lg);
  CHECK_FALSE(missing.passed());
  lg.analysis.V = 3.0;
  // Without a planted approximant there is no K or epsilon.
  CHECK(run_experiment(lg).constants.missing_for_bound() == std::vector<std::string>{"epsilon", "K"});
}

TEST_CASE("exact incoherence feeds the bound") {
  const RunReport r = run_experiment(load_config(kConfigs / "two_ortho.cfg"));
  REQUIRE(r.incoherence);
  CHECK(r.incoherence->certified_exact);
  CHECK(*r.constants.V == r.incoherence->V);
  CHECK(*r.constants.S == 7);
  // Records past K + m = S carry no bound.
  for (std::size_t m = 0; m < r.bound_series.size(); ++m) CHECK(r.bound_series[m].has_value() == (3 + m <= 7));
  CHECK(r.passed());
}

TEST_CASE("a wrong declared constant fails the certificate check") {
  Config c = planted_k5();
  c.problem.declared_gamma = 0.2;
  c.analyses.bounds = false;
  c.analyses.recursion = false;
  const RunReport r = run_experiment(c);
  CHECK_FALSE(r.passed());
  CHECK(r.certificates->sandwich_violations.size() > 0);
}

TEST_CASE("solver failures produce a partial report") {
  Config c = planted_k5();
  c.solver.span_max_inner = 1;
  c.problem.objective = ObjectiveKind::regularized_logistic;
  c.problem.dimension = 16;
  c.analyses = AnalysisFlags{};
  const RunReport r = run_experiment(c);
  CHECK(r.failure);
  CHECK_FALSE(r.passed());
  CHECK(r.trace.records.size() >= 1);
}

TEST_CASE("diagnose runs analyses without the solver") {
  Config c = load_config(kConfigs / "logistic.cfg");
  const RunReport r = run_experiment(c, false);
  CHECK(r.trace.records.empty());
  CHECK(r.smoothness);
  CHECK(r.rsc);
  CHECK(r.passed());
}

// ---------------------------------------------------------------------------
// Bound verification over seeds

TEST_CASE("verify bounds over 100 planted seeds") {
  const AggregateReport agg = verify_bounds(planted_k5(), 100);
  CHECK(agg.seeds.size() == 100);
  CHECK(agg.violations.empty());
  CHECK(agg.passed());
  REQUIRE(agg.min_slack);
  CHECK(*agg.min_slack >= 0.0);
  CHECK(*agg.median_slack >= *agg.min_slack);
  for (std::size_t i = 0; i < 100; ++i) CHECK(agg.seeds[i].seed == planted_k5().problem.seed + i);
}

TEST_CASE("verify bounds with adversarial weak selection") {
  Config c = load_config(kConfigs / "weak_adversarial.cfg");
  const AggregateReport agg = verify_bounds(c, 1);
  CHECK(agg.passed());
  const RunReport r = run_experiment(c);
  CHECK(*r.constants.t == 0.5);
  CHECK(r.constants.c1() == doctest::Approx(0.25 / 64.0));
}

TEST_CASE("verify bounds with zero seeds is empty and passes") {
  const AggregateReport agg = verify_bounds(planted_k5(), 0);
  CHECK(agg.seeds.empty());
  CHECK_FALSE(agg.min_slack);
  CHECK(agg.passed());
}

TEST_CASE("verify bounds reports violations itemized") {
  Config c = planted_k5();
  c.problem.declared_beta = 1e6;  // shrinks the bound far below the gaps
  c.analyses.certificates = false;
  const AggregateReport agg = verify_bounds(c, 3);
  CHECK_FALSE(agg.passed());
  REQUIRE_FALSE(agg.violations.empty());
  CHECK(agg.violations.front().gap > agg.violations.front().bound);
}

TEST_CASE("parallel fan-out reduces in seed order") {
  const auto one = scratch("vb1");
  const auto four = scratch("vb4");
  const Config c = planted_k5();
  const auto a = to_json(verify_bounds(c, 12, 1, one)).dump();
  const auto b = to_json(verify_bounds(c, 12, 4, four)).dump();
  CHECK(a == b);
  CHECK(slurp(one / "planted_k5_seed7.csv") == slurp(four / "planted_k5_seed7.csv"));
}

// ---------------------------------------------------------------------------
// Command line

TEST_CASE("run subcommand exit codes") {
  const auto dir = scratch("cli");
  const auto cfg = (kConfigs / "planted_k5.cfg").string();
  CHECK(cli({"run", "--config", cfg, "--out", dir.string()}).code == 0);
  CHECK(std::filesystem::exists(dir / "planted_k5.csv"));
  CHECK(cli({"run", "--config", cfg, "--variant", "egca", "--seed", "9", "--out", dir.string()}).code == 0);

  const CliResult missing = cli({"run", "--config", "/no/such/file.cfg"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("/no/such/file.cfg") != std::string::npos);

  CHECK(cli({}).code == 2);
  CHECK(cli({"run"}).code == 2);
  CHECK(cli({"run", "--config", cfg, "--variant", "omp"}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);

  std::ofstream(dir / "bad.cfg") << "problem.dimension = 8\nsolver.t = 2\n";
  const CliResult bad = cli({"run", "--config", (dir / "bad.cfg").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("bad.cfg:2") != std::string::npos);

  std::ofstream(dir / "wrong_gamma.cfg") << slurp(cfg) << "problem.gamma = 0.2\n";
  CHECK(cli({"run", "--config", (dir / "wrong_gamma.cfg").string(), "--out", dir.string()}).code == 1);
}

TEST_CASE("verify-bounds and diagnose subcommands") {
  const auto dir = scratch("cli_vb");
  const auto cfg = (kConfigs / "planted_k5.cfg").string();
  const CliResult ok = cli({"verify-bounds", "--config", cfg, "--seeds", "5", "--out", dir.string()});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("5 seeds, 0 violations") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "planted_k5_verify_bounds.json"));
  CHECK(cli({"verify-bounds", "--config", cfg, "--seeds", "0", "--out", dir.string()}).code == 0);
  CHECK(cli({"diagnose", "--config", (kConfigs / "logistic.cfg").string(), "--out", dir.string()}).code == 0);
}

TEST_CASE("thread budget comes from the environment") {
  setenv("GREEDY_OPT_THREADS", "3", 1);
  CHECK(thread_budget() == 3);
  setenv("GREEDY_OPT_THREADS", "zero", 1);
  CHECK(thread_budget() == 1);
  unsetenv("GREEDY_OPT_THREADS");
  CHECK(thread_budget() == 1);
}
