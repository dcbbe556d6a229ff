#include "greedy_opt/experiment.hpp"
#include "greedy_opt/io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace greedy_opt {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

std::string num(double v) { return format_double(v); }

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

bool RunReport::passed() const {
  if (failure) return false;
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

RunReport run_experiment(const Config& config, bool run_solver) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  RunReport report;
  report.config = config;
  report.seed = config.problem.seed;
  const std::uint64_t analysis_seed = config.analysis.seed.value_or(config.problem.seed);

  const Problem problem = make_problem(config.problem);
  report.constants = problem.constants;
  ConstantsProfile& constants = report.constants;
  report.trace.variant = config.variant;

  if (run_solver) {
    try {
      report.trace = run_greedy(config.variant, problem.objective, problem.dictionary, config.solver, problem.f0);
    } catch (const IterationError& e) {
      report.failure = e.what();
      if (e.partial()) report.trace = *e.partial();
    } catch (const Error& e) {
      report.failure = e.what();
    }
    if (!report.trace.records.empty()) report.final_gap = report.trace.records.back().gap;
    report.checks.push_back({"solver", !report.failure, report.failure.value_or(to_string(report.trace.stop))});
  }

  if (config.variant == Variant::egca) {
    constants.t = 1.0;
  } else {
    const auto& ts = config.solver.weakness.values();
    constants.t = *std::min_element(ts.begin(), ts.end());
  }
  if (config.analysis.S > 0) constants.S = config.analysis.S;

  if (config.analyses.incoherence) {
    const std::size_t K = config.analysis.K > 0 ? config.analysis.K : constants.K.value_or(config.problem.sparsity);
    const std::size_t S = constants.S.value_or(config.problem.dimension);
    try {
      report.incoherence = incoherence_constant(problem.dictionary, K, S, config.analysis.r,
                                                config.analysis.incoherence_mode, config.analysis.incoherence_budget,
                                                analysis_seed);
      const bool finite = std::isfinite(report.incoherence->V);
      if (finite) {
        constants.V = report.incoherence->V;
        constants.r = report.incoherence->r;
      }
      report.checks.push_back({"incoherence", finite, "V = " + num(report.incoherence->V)});
    } catch (const Error& e) {
      report.checks.push_back({"incoherence", false, e.what()});
    }
  }
  if (config.analysis.V) {
    constants.V = *config.analysis.V;
    constants.r = config.analysis.r;
  }

  if (config.analyses.smoothness) {
    report.smoothness = estimate_smoothness(problem.objective, config.problem.norm, config.analysis.u_grid,
                                            config.analysis.samples, analysis_seed);
    // A sampled modulus can only underestimate the declared one.
    const auto& fit = *report.smoothness;
    double worst = 0.0;
    for (const auto& s : fit.samples) {
      worst = std::max(worst, s.rho - *constants.gamma * std::pow(s.u, constants.q.value_or(2.0)));
    }
    report.checks.push_back({"smoothness", worst <= 1e-9 * std::max(1.0, *constants.gamma),
                             "fitted gamma = " + num(fit.fitted_gamma) + ", q = " + num(fit.fitted_q)});
  }

  if (config.analyses.rsc) {
    if (!problem.f0) {
      report.checks.push_back({"rsc", false, "no minimizer f0 to measure against"});
    } else {
      const std::size_t S = constants.S.value_or(config.problem.dimension);
      report.rsc = estimate_rsc(problem.objective, problem.dictionary, *problem.f0, S, config.analysis.samples,
                                analysis_seed);
      bool ok = true;
      std::string detail = "beta estimate = " + num(report.rsc->beta);
      if (constants.beta) {
        ok = report.rsc->beta >= *constants.beta - 1e-9;
        detail += ", declared " + num(*constants.beta);
      } else {
        constants.beta = report.rsc->beta;
      }
      report.checks.push_back({"rsc", ok, detail});
    }
  }

  if (constants.complete_for_bound()) {
    for (const auto& rec : report.trace.records) {
      std::optional<double> b;
      if (constants.bound_applies(rec.m)) b = evaluate_thm21_bound(constants, rec.m);
      report.bound_series.push_back(b);
      if (b && rec.gap && *rec.gap > *b) ++report.bound_violations;
    }
  }
  if (config.analyses.bounds) {
    const auto missing = constants.missing_for_bound();
    if (!missing.empty()) {
      report.checks.push_back({"bounds", false, "missing constants: " + join(missing)});
    } else {
      report.checks.push_back({"bounds", report.bound_violations == 0,
                               std::to_string(report.bound_violations) + " violations"});
    }
  }

  if (config.analyses.certificates) {
    CertificateOptions options;
    options.n_samples = config.analysis.samples;
    options.seed = analysis_seed;
    options.u_grid = config.analysis.u_grid;
    options.orth_tol = config.solver.orth_tol;
    report.certificates = verify_certificates(problem.objective, report.trace, problem.dictionary, options);
    const auto& c = *report.certificates;
    report.checks.push_back({"certificates", c.passed(),
                             std::to_string(c.sandwich_violations.size()) + " sandwich, " +
                                 std::to_string(c.orth_violations.size()) + " orthogonality, " +
                                 std::to_string(c.hull_violations.size()) + " convex hull violations"});
  }

  if (config.analyses.recursion && run_solver) {
    if (!problem.f_eps || !problem.f_eps_point) {
      report.checks.push_back({"recursion", false, "no sparse approximant planted"});
    } else {
      report.recursion = recursion_check(report.trace, *problem.f_eps, problem.objective.value(*problem.f_eps_point),
                                         *constants.gamma);
      report.checks.push_back({"recursion", report.recursion->passed(),
                               std::to_string(report.recursion->violations) + " violations"});
    }
  }

  if (config.analyses.thm11_rate && run_solver) {
    report.rate = evaluate_thm11_rate(report.trace, config.analysis.rate_m_min, config.analysis.rate_m_max,
                                      constants.q.value_or(2.0));
    report.checks.push_back({"thm11_rate", report.rate->passed,
                             "slope " + num(report.rate->slope) + " over " + std::to_string(report.rate->points) +
                                 " points, threshold " + num(report.rate->threshold)});
  }

  report.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

void write_csv(const RunReport& report, std::ostream& out) {
  out << "m,atom_index,sign,pairing,sup_pairing,energy,gap,orth_residual,thm21_bound\r\n";
  const auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (std::size_t i = 0; i < report.trace.records.size(); ++i) {
    const IterateRecord& r = report.trace.records[i];
    out << r.m << ',';
    if (r.atom) out << r.atom->index << ',' << (r.atom->sign > 0 ? "1" : "-1");
    else out << ',';
    out << ',' << cell(r.pairing) << ',' << cell(r.sup_pairing) << ',' << format_double(r.energy) << ','
        << cell(r.gap) << ',' << format_double(r.orth_residual) << ','
        << (i < report.bound_series.size() ? cell(report.bound_series[i]) : std::string()) << "\r\n";
  }
}

nlohmann::json to_json(const RunReport& report) {
  using nlohmann::json;
  json j;
  j["config"] = to_config_text(report.config);
  j["seed"] = report.seed;
  j["variant"] = to_string(report.trace.variant);
  j["iterations"] = report.trace.iterations();
  j["stop_reason"] = to_string(report.trace.stop);
  j["final_gap"] = opt(report.final_gap);
  j["failure"] = report.failure ? json(*report.failure) : json(nullptr);
  j["passed"] = report.passed();

  json records = json::array();
  for (std::size_t i = 0; i < report.trace.records.size(); ++i) {
    const IterateRecord& r = report.trace.records[i];
    json rec;
    rec["m"] = r.m;
    rec["atom_index"] = r.atom ? json(r.atom->index) : json(nullptr);
    rec["sign"] = r.atom ? json(r.atom->sign) : json(nullptr);
    rec["pairing"] = opt(r.pairing);
    rec["sup_pairing"] = opt(r.sup_pairing);
    rec["line_value"] = opt(r.line_value);
    rec["energy"] = r.energy;
    rec["gap"] = opt(r.gap);
    rec["orth_residual"] = r.orth_residual;
    rec["inner_iterations"] = r.inner_iterations;
    rec["weakness"] = r.weakness;
    rec["thm21_bound"] = i < report.bound_series.size() ? opt(report.bound_series[i]) : json(nullptr);
    records.push_back(rec);
  }
  j["records"] = records;

  const ConstantsProfile& c = report.constants;
  json cj;
  cj["gamma"] = opt(c.gamma);
  cj["q"] = opt(c.q);
  cj["beta"] = opt(c.beta);
  cj["V"] = opt(c.V);
  cj["r"] = opt(c.r);
  cj["t"] = opt(c.t);
  cj["epsilon"] = opt(c.epsilon);
  cj["K"] = c.K ? json(*c.K) : json(nullptr);
  cj["S"] = c.S ? json(*c.S) : json(nullptr);
  cj["a0"] = opt(c.a0);
  cj["complete"] = c.complete_for_bound();
  cj["missing"] = c.missing_for_bound();
  if (c.complete_for_bound()) cj["c1"] = c.c1();
  j["constants"] = cj;
  j["bound_violations"] = report.bound_violations;

  if (report.certificates) {
    const auto& cr = *report.certificates;
    j["certificates"] = {{"sandwich_samples", cr.sandwich_samples},
                         {"min_lower_slack", cr.min_lower_slack},
                         {"min_upper_slack", cr.min_upper_slack},
                         {"sandwich_violations", cr.sandwich_violations.size()},
                         {"orth_records", cr.orth_records},
                         {"max_orth_residual", cr.max_orth_residual},
                         {"orth_violations", cr.orth_violations.size()},
                         {"convex_hull_functionals", cr.hull_functionals},
                         {"convex_hull_combinations", cr.hull_combinations},
                         {"max_convex_hull_excess", cr.max_hull_excess},
                         {"convex_hull_violations", cr.hull_violations.size()},
                         {"passed", cr.passed()}};
  }
  if (report.smoothness) {
    const auto& s = *report.smoothness;
    json samples = json::array();
    for (const auto& p : s.samples) samples.push_back({{"u", p.u}, {"rho", p.rho}});
    j["smoothness"] = {{"gamma", s.gamma}, {"q", s.q}, {"fitted_gamma", s.fitted_gamma},
                       {"fitted_q", s.fitted_q}, {"fit_residual", s.fit_residual}, {"analytic", s.analytic},
                       {"samples", samples}};
  }
  if (report.rsc) {
    j["rsc"] = {{"beta", report.rsc->beta}, {"S", report.rsc->S}, {"samples_used", report.rsc->samples_used},
                {"samples_skipped", report.rsc->samples_skipped}};
  }
  if (report.incoherence) {
    const auto& p = *report.incoherence;
    j["incoherence"] = {{"V", p.V},   {"r", p.r},
                        {"K", p.K},   {"S", p.S},
                        {"certified_exact", p.certified_exact},
                        {"witness_A", p.witness_A},
                        {"witness_B", p.witness_B},
                        {"subsets_examined", p.subsets_examined}};
  }
  if (report.recursion) {
    j["recursion"] = {{"steps", report.recursion->steps.size()},
                      {"violations", report.recursion->violations},
                      {"min_slack", report.recursion->min_slack}};
  }
  if (report.rate) {
    j["thm11_rate"] = {{"slope", report.rate->slope}, {"threshold", report.rate->threshold},
                       {"points", report.rate->points}, {"passed", report.rate->passed}};
  }
  json checks = json::array();
  for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = checks;
  if (report.config.output.timing) j["wall_clock_seconds"] = report.wall_clock_seconds;
  return j;
}

void write_outputs(const RunReport& report, const std::filesystem::path& dir, const std::string& prefix) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  const auto open = [&](const std::string& name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write '" + (dir / name).string() + "'");
    return out;
  };
  {
    auto out = open(prefix + ".csv");
    write_csv(report, out);
  }
  {
    auto out = open(prefix + ".json");
    out << to_json(report).dump(2) << '\n';
  }
  if (!report.trace.records.empty()) {
    const Point last = report.trace.records.back().iterate;
    write_points(dir / (prefix + "_solution.txt"), std::span<const Point>(&last, 1));
  }
}

// ---------------------------------------------------------------------------

bool AggregateReport::passed() const {
  return violations.empty() &&
         std::all_of(seeds.begin(), seeds.end(), [](const SeedSummary& s) { return s.passed; });
}

std::size_t thread_budget() {
  const char* env = std::getenv("GREEDY_OPT_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) return 1;
  return static_cast<std::size_t>(v);
}

AggregateReport verify_bounds(const Config& config, std::size_t n_seeds, std::size_t threads,
                              const std::optional<std::filesystem::path>& per_seed_dir) {
  config.validate();
  struct Slot {
    SeedSummary summary;
    std::vector<BoundViolation> violations;
    std::vector<double> slacks;
  };
  std::vector<Slot> slots(n_seeds);
  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  std::optional<std::string> io_error;

  const auto work = [&]() {
    for (std::size_t i = next++; i < n_seeds; i = next++) {
      Config c = config;
      c.problem.seed = config.problem.seed + i;
      if (config.analysis.seed) c.analysis.seed = *config.analysis.seed + i;
      c.analyses.bounds = true;
      Slot& slot = slots[i];
      slot.summary.seed = c.problem.seed;
      try {
        const RunReport r = run_experiment(c);
        slot.summary.iterations = r.trace.iterations();
        slot.summary.failure = r.failure;
        double min_slack = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < r.bound_series.size() && m < r.trace.records.size(); ++m) {
          const auto& b = r.bound_series[m];
          const auto& g = r.trace.records[m].gap;
          if (!b || !g) continue;
          ++slot.summary.checked;
          slot.slacks.push_back(*b - *g);
          min_slack = std::min(min_slack, *b - *g);
          if (*g > *b) slot.violations.push_back({c.problem.seed, m, *g, *b});
        }
        slot.summary.min_slack = min_slack;
        if (r.bound_series.empty() && !slot.summary.failure) {
          slot.summary.failure = "missing constants: " + join(r.constants.missing_for_bound());
        }
        slot.summary.passed = r.passed() && slot.violations.empty();
        if (per_seed_dir) {
          try {
            write_outputs(r, *per_seed_dir, c.output.prefix + "_seed" + std::to_string(c.problem.seed));
          } catch (const Error& e) {
            std::lock_guard<std::mutex> lock(io_mutex);
            if (!io_error) io_error = e.what();
          }
        }
      } catch (const Error& e) {
        slot.summary.failure = e.what();
        slot.summary.passed = false;
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n_seeds));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (io_error) throw Error(*io_error);

  AggregateReport out;
  std::vector<double> slacks;
  for (auto& slot : slots) {
    out.seeds.push_back(slot.summary);
    out.violations.insert(out.violations.end(), slot.violations.begin(), slot.violations.end());
    slacks.insert(slacks.end(), slot.slacks.begin(), slot.slacks.end());
  }
  if (!slacks.empty()) {
    std::sort(slacks.begin(), slacks.end());
    out.min_slack = slacks.front();
    const std::size_t n = slacks.size();
    out.median_slack = n % 2 ? slacks[n / 2] : 0.5 * (slacks[n / 2 - 1] + slacks[n / 2]);
  }
  return out;
}

nlohmann::json to_json(const AggregateReport& report) {
  using nlohmann::json;
  json seeds = json::array();
  for (const auto& s : report.seeds) {
    seeds.push_back({{"seed", s.seed},
                     {"iterations", s.iterations},
                     {"checked", s.checked},
                     {"min_slack", s.checked ? json(s.min_slack) : json(nullptr)},
                     {"passed", s.passed},
                     {"failure", s.failure ? json(*s.failure) : json(nullptr)}});
  }
  json violations = json::array();
  for (const auto& v : report.violations) {
    violations.push_back({{"seed", v.seed}, {"m", v.m}, {"gap", v.gap}, {"bound", v.bound}});
  }
  return {{"seeds", seeds},
          {"violations", violations},
          {"min_slack", opt(report.min_slack)},
          {"median_slack", opt(report.median_slack)},
          {"passed", report.passed()}};
}

}  // namespace greedy_opt
