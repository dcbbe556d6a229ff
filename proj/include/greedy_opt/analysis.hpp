#pragma once

#include "greedy_opt/algorithms.hpp"
#include "greedy_opt/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace greedy_opt {

// ---------------------------------------------------------------------------
// Modulus of smoothness

struct SmoothnessSample {
  double u = 0.0;
  double rho = 0.0;  // max over sampled (x, y) of |E(x+uy)+E(x-uy)-2E(x)| / 2
};

struct SmoothnessFit {
  std::vector<SmoothnessSample> samples;
  double gamma = 0.0;         // reported gamma (analytic when declared)
  double q = 2.0;             // reported exponent
  double fitted_gamma = 0.0;  // least-squares fit of log rho against log u
  double fitted_q = 2.0;
  double fit_residual = 0.0;  // rms of the log-log fit
  bool analytic = false;
};

/// Sampling lower estimate of rho(E, u) on the level set {E <= E(0)}: random
/// base points from the hit-and-run sampler and random unit directions, plus
/// a few ascent passes on the best directions that move y along
/// E'(x+uy) - E'(x-uy). Every candidate pair is evaluated on the whole grid so
/// the estimate is nondecreasing in u for convex E.
SmoothnessFit estimate_smoothness(const Objective& objective, NormSpec norm, const std::vector<double>& u_grid,
                                  std::size_t n_samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Restricted strong convexity

struct RscEstimate {
  double beta = 0.0;
  std::size_t S = 0;
  std::size_t samples_used = 0;
  std::size_t samples_skipped = 0;
};

/// Monte Carlo upper estimate of beta: min over sampled S-sparse f of
/// (E(f) - E(f0)) / ||f - f0||^2, floored at 0. Supports are drawn from the
/// dictionary, coefficients are Gaussian at radii spread over four decades.
RscEstimate estimate_rsc(const Objective& objective, const Dictionary& dictionary, const Point& f0, std::size_t S,
                         std::size_t n_samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// ell_1 incoherence

enum class IncoherenceMode { exact, monte_carlo };
std::string to_string(IncoherenceMode mode);
IncoherenceMode parse_incoherence_mode(const std::string& text);

struct IncoherenceProfile {
  double V = 0.0;  // +inf when an admissible B has a singular Gram matrix
  double r = 0.5;
  std::size_t K = 0;
  std::size_t S = 0;
  bool certified_exact = false;
  std::vector<std::size_t> witness_A;
  std::vector<std::size_t> witness_B;  // offending B when V is infinite
  std::uint64_t subsets_examined = 0;
};

/// V = max over A subset of B, |A| <= K, |B| <= S of
///   sup_c sum_{i in A} |c_i| / (|A|^r ||sum_{i in B} c_i g_i||).
/// Exact mode (ell_2 dictionaries, S <= 12) enumerates every B of size
/// min(S, n) and evaluates the inner supremum per sign pattern s on A as
/// sqrt(s' G_B^{-1} s). Monte Carlo mode samples (A, B, c) within `budget`
/// draws and returns a lower bound.
IncoherenceProfile incoherence_constant(const Dictionary& dictionary, std::size_t K, std::size_t S, double r,
                                        IncoherenceMode mode, std::uint64_t budget = 100000,
                                        std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Error bounds

/// Measured or analytic constants feeding the convergence bounds. Missing
/// entries stay empty until a generator or estimator fills them.
struct ConstantsProfile {
  std::optional<double> gamma;
  std::optional<double> q;
  std::optional<double> beta;
  std::optional<double> V;
  std::optional<double> r;
  std::optional<double> t;
  std::optional<double> epsilon;
  std::optional<std::size_t> K;
  std::optional<std::size_t> S;
  std::optional<double> a0;  // E(0) - E(f0)
  std::optional<Point> f_eps;
  std::optional<double> B;

  /// Names of the constants the exponential bound needs but lacks.
  std::vector<std::string> missing_for_bound() const;
  bool complete_for_bound() const { return missing_for_bound().empty(); }
  /// c_1 = beta t^2 / (64 gamma V^2).
  double c1() const;
  /// True when K + m <= S (or S unknown).
  bool bound_applies(std::size_t m) const;
  /// beta <= 2 gamma, the elementary consistency relation between E1 and E2.
  bool beta_gamma_consistent() const;
};

class MissingConstant : public Error {
 public:
  using Error::Error;
};

/// max(a0 exp(-c1 m / K^{2r}), 8 (gamma^2/beta) eps^2) + 2 gamma eps^2.
/// The EGCA bound is the same expression evaluated with t = 1.
double evaluate_thm21_bound(const ConstantsProfile& profile, std::size_t m);

struct RateFit {
  double slope = 0.0;
  double threshold = 0.0;  // (1 - q) + 0.2
  std::size_t points = 0;
  bool passed = false;
};

/// Least-squares slope of log gap against log m over m in [m_min, m_max];
/// gaps below 1e-14 are dropped and at least five points are required.
RateFit evaluate_rate(const std::vector<double>& gaps_by_m, std::size_t m_min, std::size_t m_max, double q);
RateFit evaluate_thm11_rate(const GreedyTrace& trace, std::size_t m_min, std::size_t m_max, double q);

// ---------------------------------------------------------------------------
// Certificates

struct CertificateOptions {
  std::size_t n_samples = 10000;
  std::uint64_t seed = 0;
  std::vector<double> u_grid{1e-3, 1e-2, 0.1, 0.5, 1.0};
  double orth_tol = 1e-10;
  std::size_t hull_functionals = 100;
  std::size_t hull_combinations = 50;
};

struct SandwichWitness {
  Point x;
  Point y;
  double u = 0.0;
  double middle = 0.0;  // E(x+uy) - E(x) - u <E'(x), y>
  double upper = 0.0;   // 2 rho(E, u ||y||) from the declared constants
};

struct CertificateReport {
  std::size_t sandwich_samples = 0;
  double min_lower_slack = 0.0;  // min of middle
  double min_upper_slack = 0.0;  // min of upper - middle
  std::vector<SandwichWitness> sandwich_violations;

  std::size_t orth_records = 0;
  double max_orth_residual = 0.0;
  std::vector<std::pair<std::size_t, double>> orth_violations;  // (m, residual)

  std::size_t hull_functionals = 0;
  std::size_t hull_combinations = 0;
  double max_hull_excess = 0.0;  // combination pairing minus atom maximum
  std::vector<Point> hull_violations;

  bool passed() const {
    return sandwich_violations.empty() && orth_violations.empty() && hull_violations.empty();
  }
};

/// Needs declared smoothness constants on the objective for the upper side of
/// the sandwich. `trace` may be empty (no records) to skip the refit check.
CertificateReport verify_certificates(const Objective& objective, const GreedyTrace& trace,
                                      const Dictionary& dictionary, const CertificateOptions& options);

// ---------------------------------------------------------------------------
// Per-iteration recursion

struct RecursionStep {
  std::size_t n = 0;
  double a_prev = 0.0;
  double a_n = 0.0;
  double l1_remaining = 0.0;  // ||f_{A_n}||_1 over the support not yet selected
  double required = 0.0;      // a_prev - (t a_prev)^2 / (8 gamma l1^2)
  double slack = 0.0;         // required - a_n
  bool skipped = false;
};

struct RecursionReport {
  std::vector<RecursionStep> steps;
  std::size_t violations = 0;
  double min_slack = 0.0;
  bool passed() const { return violations == 0; }
};

/// a_n <= a_{n-1} - (t a_{n-1})^2 / (8 gamma ||f_{A_n}||_1^2) + 1e-9 for every n
/// with a_{n-1} > 0. `gaps[n]` is a_n, `l1_remaining[n-1]` the norm for step n.
RecursionReport recursion_check(std::span<const double> gaps, std::span<const double> l1_remaining, double t,
                                double gamma);

/// Builds a_n = E(G_n) - E(f_eps) and ||f_{A_n}||_1 from a trace and the planted
/// K-sparse approximant. t is taken per iteration from the trace (1 for EGCA).
RecursionReport recursion_check(const GreedyTrace& trace, const SparseElement& f_eps, double energy_at_f_eps,
                                double gamma);

// ---------------------------------------------------------------------------
// EGCA single-step dominance

struct DominanceStep {
  std::size_t n = 0;
  double egca_value = 0.0;  // line-min along the EGCA atom at G_{n-1}
  double wcga_value = 0.0;  // line-min along the WCGA(t=1) atom at G_{n-1}
};

struct DominanceReport {
  std::vector<DominanceStep> steps;
  std::size_t violations = 0;
  bool passed() const { return violations == 0; }
};

/// Replays an EGCA trace and compares its line-minimized values against the
/// exact WCGA atom at the same state.
DominanceReport dominance_check(const Objective& objective, const Dictionary& dictionary, const GreedyTrace& trace,
                                double line_tol);

}  // namespace greedy_opt
