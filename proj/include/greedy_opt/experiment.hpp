#pragma once

#include "greedy_opt/algorithms.hpp"
#include "greedy_opt/analysis.hpp"
#include "greedy_opt/problems.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace greedy_opt {

// ---------------------------------------------------------------------------
// Configuration

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct AnalysisFlags {
  bool smoothness = false;
  bool rsc = false;
  bool incoherence = false;
  bool bounds = false;
  bool certificates = false;
  bool recursion = false;
  bool thm11_rate = false;
};

struct AnalysisSettings {
  std::size_t samples = 2000;
  std::vector<double> u_grid{1e-3, 1e-2, 1e-1, 0.5, 1.0};
  double r = 0.5;
  std::optional<double> V;  // declared incoherence constant
  std::size_t K = 0;        // incoherence K; 0 means the planted sparsity
  std::size_t S = 0;        // incoherence / bound S; 0 means the problem's S
  IncoherenceMode incoherence_mode = IncoherenceMode::exact;
  std::uint64_t incoherence_budget = 100000;
  std::size_t rate_m_min = 10;
  std::size_t rate_m_max = 200;
  std::optional<std::uint64_t> seed;  // defaults to problem.seed
};

struct OutputSettings {
  std::filesystem::path dir = "out";
  std::string prefix = "run";
  bool timing = false;  // wall-clock in the JSON summary (breaks byte-identity)
};

struct Config {
  ProblemSpec problem;
  SolverConfig solver;
  Variant variant = Variant::wcga;
  AnalysisFlags analyses;
  AnalysisSettings analysis;
  OutputSettings output;

  void validate() const;
};

/// Flat `key = value` text with dotted keys; '#' starts a comment. Errors
/// carry `source:line`.
Config parse_config(const std::string& text, const std::string& source = "<config>");
Config load_config(const std::filesystem::path& path);
/// Every key with its current value; parse_config of the result gives back
/// the same configuration.
std::string to_config_text(const Config& config);

// ---------------------------------------------------------------------------
// Reports

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunReport {
  Config config;
  std::uint64_t seed = 0;
  GreedyTrace trace;
  std::optional<double> final_gap;
  ConstantsProfile constants;
  std::vector<std::optional<double>> bound_series;  // indexed by m
  std::size_t bound_violations = 0;
  std::optional<CertificateReport> certificates;
  std::optional<SmoothnessFit> smoothness;
  std::optional<RscEstimate> rsc;
  std::optional<IncoherenceProfile> incoherence;
  std::optional<RecursionReport> recursion;
  std::optional<RateFit> rate;
  std::vector<CheckResult> checks;
  std::optional<std::string> failure;  // solver error; the trace is partial
  double wall_clock_seconds = 0.0;

  bool passed() const;
};

/// make_problem, run_greedy and the requested analyses. Solver failures are
/// caught and reported through `failure` with the partial trace. With
/// run_solver = false only the analyses run (against an empty trace).
RunReport run_experiment(const Config& config, bool run_solver = true);

/// Columns m, atom_index, sign, pairing, sup_pairing, energy, gap,
/// orth_residual, thm21_bound; CRLF line ends; %.17g numbers; empty cells for
/// values that do not exist.
void write_csv(const RunReport& report, std::ostream& out);
nlohmann::json to_json(const RunReport& report);
/// Writes <prefix>.csv, <prefix>.json and <prefix>_solution.txt under `dir`.
void write_outputs(const RunReport& report, const std::filesystem::path& dir, const std::string& prefix);

struct BoundViolation {
  std::uint64_t seed = 0;
  std::size_t m = 0;
  double gap = 0.0;
  double bound = 0.0;
};

struct SeedSummary {
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  std::size_t checked = 0;  // iterations with K + m <= S
  double min_slack = 0.0;   // min of bound - gap
  bool passed = false;
  std::optional<std::string> failure;
};

struct AggregateReport {
  std::vector<SeedSummary> seeds;
  std::vector<BoundViolation> violations;
  std::optional<double> min_slack;
  std::optional<double> median_slack;
  bool passed() const;
};

/// Runs n_seeds instances with problem seeds problem.seed, problem.seed+1, ...
/// and compares every gap against the bound. Fans out over at most
/// `threads` workers; results are reduced in seed order.
AggregateReport verify_bounds(const Config& config, std::size_t n_seeds, std::size_t threads = 1,
                              const std::optional<std::filesystem::path>& per_seed_dir = std::nullopt);
nlohmann::json to_json(const AggregateReport& report);

/// Worker count from GREEDY_OPT_THREADS (default 1).
std::size_t thread_budget();

/// Entry point behind the greedy_opt executable. Exit status: 0 all checks
/// pass, 1 a check or the solver failed, 2 usage or configuration error.
int run_cli(int argc, char** argv);

}  // namespace greedy_opt
