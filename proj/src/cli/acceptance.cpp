#include "greedy_opt/acceptance.hpp"
#include "greedy_opt/experiment.hpp"
#include "greedy_opt/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

namespace greedy_opt {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

// Per-iteration audits shared by several criteria.
struct Audit {
  std::size_t orth_records = 0;
  std::size_t orth_violations = 0;
  double max_orth = 0.0;
  std::size_t recursion_steps = 0;
  std::size_t recursion_violations = 0;
  double recursion_min_slack = std::numeric_limits<double>::infinity();
  std::size_t runs = 0;

  void orthogonality(const Problem& p, const GreedyTrace& trace) {
    ++runs;
    std::vector<SignedAtom> selected;
    for (const auto& rec : trace.records) {
      if (!rec.atom) continue;
      selected.push_back(*rec.atom);
      const double r = orthogonality_residual(p.objective, rec.iterate, p.dictionary.columns(selected));
      ++orth_records;
      max_orth = std::max(max_orth, r);
      if (r > 1e-10) ++orth_violations;
    }
  }

  void recursion(const Problem& p, const GreedyTrace& trace) {
    const RecursionReport r =
        recursion_check(trace, *p.f_eps, p.objective.value(*p.f_eps_point), *p.constants.gamma);
    for (const auto& s : r.steps) {
      if (!s.skipped) ++recursion_steps;
    }
    recursion_violations += r.violations;
    if (!r.steps.empty()) recursion_min_slack = std::min(recursion_min_slack, r.min_slack);
  }
};

struct BoundTally {
  std::size_t runs = 0;
  std::size_t checked = 0;
  std::size_t violations = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  std::vector<std::string> failures;

  void add(const ConstantsProfile& c, const GreedyTrace& trace) {
    ++runs;
    for (const auto& rec : trace.records) {
      if (!rec.gap || !c.bound_applies(rec.m)) continue;
      const double b = evaluate_thm21_bound(c, rec.m);
      ++checked;
      min_slack = std::min(min_slack, b - *rec.gap);
      if (*rec.gap > b) ++violations;
    }
  }

  std::string summary() const {
    std::string s = std::to_string(runs) + " runs, " + std::to_string(checked) + " (seed, m) pairs, " +
                    std::to_string(violations) + " violations, min slack " + num(min_slack);
    if (!failures.empty()) s += "; " + failures.front();
    return s;
  }
};

ProblemSpec planted_spec(std::uint64_t seed) {
  ProblemSpec s;
  s.objective = ObjectiveKind::identity_quadratic;
  s.dimension = 64;
  s.dictionary = DictionaryKind::canonical;
  s.planted = PlantedKind::sparse;
  s.sparsity = 5;
  s.seed = seed;
  return s;
}

// Identity plus Hadamard in R^16 has spark 8, so every 7 atoms are independent.
ProblemSpec two_ortho_spec(std::uint64_t seed) {
  ProblemSpec s = planted_spec(seed);
  s.dimension = 16;
  s.dictionary = DictionaryKind::two_ortho_union;
  s.sparsity = 3;
  s.rsc_sparsity = 7;
  return s;
}

constexpr std::size_t kTwoOrthoIterations = 4;

SolverConfig solver_with(double t, SelectionMode mode, std::size_t max_iterations) {
  SolverConfig c;
  c.weakness = WeaknessSequence::constant(t);
  c.selection = mode;
  c.max_iterations = max_iterations;
  return c;
}

class Suite {
 public:
  explicit Suite(const AcceptanceOptions& o) : options_(o) {}

  std::vector<CriterionResult> run() {
    std::vector<CriterionResult> out;
    out.push_back(timed(1, "exact sparse recovery (WCGA and EGCA, K = 5, d = 64)", [&] { return exact_recovery(); }));
    out.push_back(timed(2, "WCGA bound, eps = 0 (t = 1 and adversarial t = 0.5)", [&] { return bound(Variant::wcga); }));
    out.push_back(timed(3, "EGCA bound, eps = 0", [&] { return bound(Variant::egca); }));
    out.push_back(timed(4, "eps > 0 branch (tail norm 0.01)", [&] { return eps_branch(); }));
    out.push_back(timed(5, "smoothness sandwich on shipped objectives", [&] { return sandwich(); }));
    out.push_back(timed(8, "qualitative rate, 1/i^2 profile, d = 256", [&] { return rate(); }));
    out.push_back(timed(9, "EGCA single-step dominance, coherent dictionary", [&] { return dominance(); }));
    out.push_back(timed(10, "estimator sanity", [&] { return estimators(); }));
    out.push_back(timed(11, "determinism of selftest outputs", [&] { return determinism(); }));

    CriterionResult orth{6, "orthogonality certificate on every recorded iteration", false, "", 0.0};
    orth.passed = audit_.orth_records > 0 && audit_.orth_violations == 0;
    orth.detail = std::to_string(audit_.runs) + " runs, " + std::to_string(audit_.orth_records) + " records, max residual " +
                  num(audit_.max_orth) + ", " + std::to_string(audit_.orth_violations) + " above 1e-10";
    CriterionResult rec{7, "per-iteration recursion on criteria 1-4 runs", false, "", 0.0};
    rec.passed = audit_.recursion_steps > 0 && audit_.recursion_violations == 0;
    rec.detail = std::to_string(audit_.recursion_steps) + " steps, " + std::to_string(audit_.recursion_violations) +
                 " violations, min slack " + num(audit_.recursion_min_slack);
    out.push_back(orth);
    out.push_back(rec);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return out;
  }

 private:
  struct Outcome {
    bool passed = false;
    std::string detail;
    std::optional<double> time_limit;
  };

  CriterionResult timed(int id, const std::string& name, const std::function<Outcome()>& body) {
    CriterionResult r{id, name, false, "", 0.0};
    const auto t0 = Clock::now();
    try {
      const Outcome o = body();
      r.seconds = seconds_since(t0);
      r.passed = o.passed;
      r.detail = o.detail;
      if (o.time_limit) {
        r.detail += ", " + num(r.seconds) + " s (limit " + num(*o.time_limit) + " s)";
        if (r.seconds >= *o.time_limit) r.passed = false;
      }
    } catch (const std::exception& e) {
      r.seconds = seconds_since(t0);
      r.detail = std::string("error: ") + e.what();
    }
    return r;
  }

  std::uint64_t seed(std::size_t i) const { return options_.seed + i; }

  double two_ortho_V() {
    if (!two_ortho_V_) {
      const Problem p = make_problem(two_ortho_spec(options_.seed));
      const IncoherenceProfile prof = incoherence_constant(p.dictionary, 3, 7, 0.5, IncoherenceMode::exact);
      if (!std::isfinite(prof.V)) throw Error("two-ortho incoherence is infinite");
      two_ortho_V_ = prof.V;
    }
    return *two_ortho_V_;
  }

  Outcome exact_recovery() {
    std::size_t ok = 0;
    std::size_t runs = 0;
    std::string first_failure;
    for (Variant v : {Variant::wcga, Variant::egca}) {
      for (std::size_t i = 0; i < 100; ++i) {
        const Problem p = make_problem(planted_spec(seed(i)));
        const GreedyTrace trace = run_greedy(v, p.objective, p.dictionary, solver_with(1.0, SelectionMode::argmax, 100), p.f0);
        audit_.orthogonality(p, trace);
        audit_.recursion(p, trace);
        ++runs;
        const auto gaps = trace.gaps();
        const bool exact = trace.iterations() == 5 && gaps[5] <= 1e-10 && gaps[4] > 1e-10;
        if (exact) {
          ++ok;
        } else if (first_failure.empty()) {
          first_failure = "; " + to_string(v) + " seed " + std::to_string(seed(i)) + " took " +
                          std::to_string(trace.iterations()) + " iterations, final gap " + num(gaps.back());
        }
      }
    }
    return {ok == runs, std::to_string(ok) + "/" + std::to_string(runs) + " runs exact in K iterations" + first_failure,
            5.0};
  }

  Outcome bound(Variant variant) {
    BoundTally tally;
    std::vector<std::pair<double, SelectionMode>> modes{{1.0, SelectionMode::argmax}};
    if (variant == Variant::wcga) modes.emplace_back(0.5, SelectionMode::adversarial);
    const double V2 = two_ortho_V();
    for (const auto& [t, mode] : modes) {
      for (std::size_t i = 0; i < 100; ++i) {
        const Problem p = make_problem(planted_spec(seed(i)));
        const GreedyTrace trace = run_greedy(variant, p.objective, p.dictionary, solver_with(t, mode, 100), p.f0);
        ConstantsProfile c = p.constants;
        c.t = t;
        tally.add(c, trace);
        audit_.orthogonality(p, trace);
        audit_.recursion(p, trace);
      }
      for (std::size_t i = 0; i < 100; ++i) {
        const Problem p = make_problem(two_ortho_spec(seed(i)));
        const GreedyTrace trace =
            run_greedy(variant, p.objective, p.dictionary, solver_with(t, mode, kTwoOrthoIterations), p.f0);
        ConstantsProfile c = p.constants;
        c.t = t;
        c.V = V2;
        c.r = 0.5;
        tally.add(c, trace);
        audit_.orthogonality(p, trace);
        audit_.recursion(p, trace);
      }
    }
    return {tally.violations == 0 && tally.checked > 0,
            tally.summary() + ", two-ortho V = " + num(V2) + " (K = 3, S = 7)", 60.0};
  }

  Outcome eps_branch() {
    BoundTally tally;
    std::size_t floor_checked = 0;
    std::size_t floor_violations = 0;
    double worst = 0.0;
    for (Variant v : {Variant::wcga, Variant::egca}) {
      for (std::size_t i = 0; i < 50; ++i) {
        ProblemSpec spec = planted_spec(seed(i));
        spec.tail_norm = 0.01;
        const Problem p = make_problem(spec);
        const GreedyTrace trace = run_greedy(v, p.objective, p.dictionary, solver_with(1.0, SelectionMode::argmax, 10), p.f0);
        ConstantsProfile c = p.constants;
        c.t = 1.0;
        tally.add(c, trace);
        audit_.orthogonality(p, trace);
        audit_.recursion(p, trace);
        const double eps = *c.epsilon;
        const double gamma = *c.gamma;
        const double floor = 8.0 * gamma * gamma / *c.beta * eps * eps + 2.0 * gamma * eps * eps;
        for (const auto& rec : trace.records) {
          if (rec.m < 5) continue;
          ++floor_checked;
          worst = std::max(worst, *rec.gap);
          if (*rec.gap > floor) ++floor_violations;
        }
      }
    }
    return {tally.violations == 0 && floor_violations == 0 && floor_checked > 0,
            tally.summary() + "; m in [5, 10]: " + std::to_string(floor_checked) + " gaps, largest " + num(worst) +
                " against 1e-3, " + std::to_string(floor_violations) + " above"};
  }

  Outcome sandwich() {
    std::vector<ProblemSpec> specs;
    specs.push_back(planted_spec(options_.seed));
    ProblemSpec general = planted_spec(options_.seed);
    general.objective = ObjectiveKind::general_quadratic;
    general.dimension = 16;
    general.sparsity = 3;
    general.rsc_sparsity = 4;
    specs.push_back(general);
    ProblemSpec logistic = planted_spec(options_.seed);
    logistic.objective = ObjectiveKind::regularized_logistic;
    logistic.dimension = 16;
    logistic.sparsity = 3;
    specs.push_back(logistic);

    bool ok = true;
    std::string detail;
    for (const auto& spec : specs) {
      const Problem p = make_problem(spec);
      CertificateOptions o;
      o.n_samples = 10000;
      o.seed = options_.seed;
      o.hull_functionals = 0;
      const CertificateReport r = verify_certificates(p.objective, GreedyTrace{}, p.dictionary, o);
      ok = ok && r.sandwich_violations.empty() && r.sandwich_samples == 10000;
      detail += to_string(spec.objective) + ": " + std::to_string(r.sandwich_violations.size()) +
                " violations (min lower slack " + num(r.min_lower_slack) + ", min upper slack " +
                num(r.min_upper_slack) + "); ";
    }

    // Closed form for ||x - b||^2: the middle term is u^2 ||y||^2.
    const Problem p = make_problem(specs.front());
    LevelSetSampler sampler(p.objective, options_.seed + 7);
    std::mt19937_64 rng(options_.seed + 11);
    const std::vector<double> us{1e-3, 1e-2, 0.1, 0.5, 1.0};
    double worst = 0.0;
    for (std::size_t i = 0; i < 10000; ++i) {
      const Point x = sampler.next();
      const Point y = random_unit_direction(p.objective.dimension(), NormSpec::l2(), rng);
      const double u = us[i % us.size()];
      const double middle = p.objective.value(x + u * y) - p.objective.value(x) - u * p.objective.gradient(x).dot(y);
      worst = std::max(worst, std::abs(middle - u * u * y.squaredNorm()));
    }
    ok = ok && worst <= 1e-9;
    detail += "identity closed form max deviation " + num(worst);
    return {ok, detail};
  }

  Outcome rate() {
    std::string detail;
    bool ok = true;
    for (std::size_t i = 0; i < 3; ++i) {
      ProblemSpec spec = planted_spec(seed(i));
      spec.dimension = 256;
      spec.planted = PlantedKind::power_law;
      spec.decay_exponent = 2.0;
      const Problem p = make_problem(spec);
      const GreedyTrace trace =
          run_greedy(Variant::wcga, p.objective, p.dictionary, solver_with(1.0, SelectionMode::argmax, 200), p.f0);
      audit_.orthogonality(p, trace);
      const RateFit fit = evaluate_thm11_rate(trace, 10, 200, 2.0);
      ok = ok && fit.passed;
      detail += (i ? ", " : "") + std::string("slope ") + num(fit.slope) + " (" + std::to_string(fit.points) + " pts)";
    }
    return {ok, detail + " against -0.8", 30.0};
  }

  Outcome dominance() {
    std::size_t steps = 0;
    std::size_t violations = 0;
    for (std::size_t i = 0; i < 20; ++i) {
      ProblemSpec spec = planted_spec(seed(i));
      spec.dimension = 16;
      spec.dictionary = DictionaryKind::gaussian_normalized;
      spec.n_atoms = 40;
      spec.sparsity = 4;
      const Problem p = make_problem(spec);
      const SolverConfig cfg = solver_with(1.0, SelectionMode::argmax, 8);
      const GreedyTrace trace = run_greedy(Variant::egca, p.objective, p.dictionary, cfg, p.f0);
      audit_.orthogonality(p, trace);
      const DominanceReport r = dominance_check(p.objective, p.dictionary, trace, cfg.line_tol);
      steps += r.steps.size();
      violations += r.violations;
    }
    return {steps > 0 && violations == 0,
            "20 seeds, " + std::to_string(steps) + " steps, " + std::to_string(violations) + " violations"};
  }

  Outcome estimators() {
    std::mt19937_64 rng(options_.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto gaussian = [&](Eigen::Index r, Eigen::Index c) {
      Matrix m(r, c);
      for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = normal(rng);
      }
      return m;
    };
    const Eigen::Index d = 8;
    std::string detail;
    bool ok = true;

    // Smoothness: E = x'Qx + l'x has rho(u) = lambda_max(Q) u^2.
    struct Case {
      std::string name;
      QuadraticForm form;
      double gamma;
    };
    std::vector<Case> cases;
    const Point b = gaussian(d, 1).col(0);
    cases.push_back({"identity", {Matrix::Identity(d, d), -2.0 * b, b.squaredNorm()}, 1.0});
    const Matrix B = gaussian(d, d) / std::sqrt(static_cast<double>(d)) + Matrix::Identity(d, d);
    const Matrix Q = B.transpose() * B;
    cases.push_back({"general", {Q, -2.0 * (Q * b), 0.0},
                     Eigen::SelfAdjointEigenSolver<Matrix>(Q, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff()});
    const double delta = 0.5;
    cases.push_back({"linear+ridge", {delta * Matrix::Identity(d, d), gaussian(d, 1).col(0), 0.0}, delta});
    for (const auto& c : cases) {
      const Objective obj = Objective::quadratic(c.form, c.name);
      const SmoothnessFit fit = estimate_smoothness(obj, NormSpec::l2(), {1e-3, 1e-2, 0.1, 0.5, 1.0}, 2000, options_.seed);
      const bool good = std::abs(fit.fitted_gamma / c.gamma - 1.0) <= 0.01 && std::abs(fit.fitted_q - 2.0) <= 1e-3;
      ok = ok && good;
      detail += c.name + " gamma " + num(fit.fitted_gamma) + "/" + num(c.gamma) + " q " + num(fit.fitted_q) + "; ";
    }

    // Orthonormal dictionaries have V = 1 at r = 1/2.
    std::vector<Point> atoms;
    const Matrix ortho = Eigen::HouseholderQR<Matrix>(gaussian(d, d)).householderQ();
    for (Eigen::Index j = 0; j < d; ++j) atoms.push_back(ortho.col(j));
    const Dictionary rotated(atoms, NormSpec::l2());
    const Dictionary canonical = canonical_dictionary(8);
    for (const Dictionary* dict : {&canonical, &rotated}) {
      const IncoherenceProfile prof = incoherence_constant(*dict, 3, 6, 0.5, IncoherenceMode::exact);
      ok = ok && std::abs(prof.V - 1.0) <= 1e-9;
      detail += "orthonormal V " + num(prof.V) + "; ";
    }

    // Sampling never exceeds the exact maximum.
    std::size_t below = 0;
    double worst_ratio = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
      const Dictionary dict = gaussian_dictionary(8, 10, seed(i));
      const IncoherenceProfile exact = incoherence_constant(dict, 3, 6, 0.5, IncoherenceMode::exact);
      const IncoherenceProfile mc = incoherence_constant(dict, 3, 6, 0.5, IncoherenceMode::monte_carlo, 20000, seed(i));
      worst_ratio = std::max(worst_ratio, mc.V / exact.V);
      if (std::isfinite(exact.V) && mc.V <= exact.V * (1.0 + 1e-9)) ++below;
    }
    ok = ok && below == 20;
    detail += std::to_string(below) + "/20 sampled V <= exact (largest ratio " + num(worst_ratio) + ")";
    return {ok, detail};
  }

  Outcome determinism() {
    const auto a = options_.scratch / "first";
    const auto b = options_.scratch / "second";
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
    write_selftest_outputs(options_.seed, a, options_.threads);
    write_selftest_outputs(options_.seed, b, options_.threads);
    const auto slurp = [](const std::filesystem::path& f) {
      std::ifstream in(f, std::ios::binary);
      std::ostringstream s;
      s << in.rdbuf();
      return s.str();
    };
    std::size_t files = 0;
    std::vector<std::string> differing;
    for (const auto& entry : std::filesystem::directory_iterator(a)) {
      const auto ext = entry.path().extension();
      if (ext != ".csv" && ext != ".json") continue;
      ++files;
      const auto other = b / entry.path().filename();
      if (!std::filesystem::exists(other) || slurp(entry.path()) != slurp(other)) {
        differing.push_back(entry.path().filename().string());
      }
    }
    std::string detail = std::to_string(files) + " CSV/JSON files compared, " + std::to_string(differing.size()) + " differ";
    if (!differing.empty()) detail += " (first: " + differing.front() + ")";
    return {files > 0 && differing.empty(), detail};
  }

  AcceptanceOptions options_;
  Audit audit_;
  std::optional<double> two_ortho_V_;
};

Config base_config(std::uint64_t seed) {
  Config c;
  c.problem = planted_spec(seed);
  c.analysis.samples = 1000;
  return c;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) { return Suite(options).run(); }

void write_selftest_outputs(std::uint64_t seed, const std::filesystem::path& dir, std::size_t threads) {
  std::vector<std::pair<std::string, Config>> runs;

  Config k5 = base_config(seed);
  k5.analyses.bounds = true;
  k5.analyses.certificates = true;
  k5.analyses.recursion = true;
  runs.emplace_back("planted_k5_wcga", k5);
  Config k5e = k5;
  k5e.variant = Variant::egca;
  runs.emplace_back("planted_k5_egca", k5e);
  Config weak = k5;
  weak.solver.weakness = WeaknessSequence::constant(0.5);
  weak.solver.selection = SelectionMode::adversarial;
  runs.emplace_back("planted_k5_weak", weak);

  Config two = base_config(seed);
  two.problem = two_ortho_spec(seed);
  two.solver.max_iterations = kTwoOrthoIterations;
  two.analyses.bounds = true;
  two.analyses.incoherence = true;
  two.analyses.recursion = true;
  runs.emplace_back("two_ortho_wcga", two);

  Config tail = k5;
  tail.problem.tail_norm = 0.01;
  tail.solver.max_iterations = 10;
  runs.emplace_back("tail_eps", tail);

  Config logistic = base_config(seed);
  logistic.problem.objective = ObjectiveKind::regularized_logistic;
  logistic.problem.dimension = 16;
  logistic.problem.sparsity = 3;
  logistic.solver.max_iterations = 8;
  logistic.analyses.smoothness = true;
  logistic.analyses.rsc = true;
  logistic.analyses.certificates = true;
  runs.emplace_back("logistic", logistic);

  Config power = base_config(seed);
  power.problem.dimension = 256;
  power.problem.planted = PlantedKind::power_law;
  power.solver.max_iterations = 200;
  power.analyses.thm11_rate = true;
  runs.emplace_back("power_law_rate", power);

  for (const auto& [name, cfg] : runs) {
    const RunReport r = run_experiment(cfg);
    write_outputs(r, dir, name);
  }

  const AggregateReport agg = verify_bounds(k5, 10, threads, dir);
  std::ofstream out(dir / "verify_bounds.json", std::ios::binary);
  out << to_json(agg).dump(2) << '\n';
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream out;
  out << "criterion " << r.id << ": " << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.detail << ")";
  return out.str();
}

}  // namespace greedy_opt
