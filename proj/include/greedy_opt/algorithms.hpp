#pragma once

#include "greedy_opt/core.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace greedy_opt {

enum class Variant { wcga, egca };

/// How WCGA resolves the weak selection inequality when t < 1.
enum class SelectionMode {
  argmax,       // exact maximizer, admissible for every t
  adversarial,  // the admissible signed atom with the smallest pairing
};

std::string to_string(Variant v);
Variant parse_variant(const std::string& text);
std::string to_string(SelectionMode mode);
SelectionMode parse_selection_mode(const std::string& text);

class UnboundedBelow : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct GreedyTrace;

/// Error raised inside run_greedy, annotated with the iteration it came from.
/// Carries the trace up to the last completed iteration.
class IterationError : public Error {
 public:
  IterationError(std::size_t iteration, const std::string& what, std::shared_ptr<const GreedyTrace> partial = {})
      : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration),
        partial_(std::move(partial)) {}
  std::size_t iteration() const { return iteration_; }
  const std::shared_ptr<const GreedyTrace>& partial() const { return partial_; }

 private:
  std::size_t iteration_;
  std::shared_ptr<const GreedyTrace> partial_;
};

struct SolverConfig {
  std::size_t max_iterations = 100;
  WeaknessSequence weakness = WeaknessSequence::constant(1.0);
  SelectionMode selection = SelectionMode::argmax;
  double orth_tol = 1e-10;
  double line_tol = 1e-12;
  std::size_t span_max_inner = 10000;
  std::optional<double> stop_gap;

  void validate() const;
};

struct GreedyState {
  Point iterate;
  std::vector<SignedAtom> selected;
  std::vector<double> coefficients;
  std::size_t m = 0;
  double energy = 0.0;

  /// G_0 = 0.
  static GreedyState initial(const Objective& objective);
};

// ---------------------------------------------------------------------------
// Selection

struct WcgaSelection {
  SignedAtom atom;
  double pairing = 0.0;      // <-E'(G), phi>
  double sup_pairing = 0.0;  // max over signed atoms
};

/// All pairings <-E'(G), g_i> for the stored (unsigned) atoms.
Eigen::VectorXd atom_pairings(const Objective& objective, const Point& at, const Dictionary& dictionary);

/// Weak Chebyshev selection. Returns nullopt when the supremum of the pairing
/// is <= stationarity_tol, i.e. G is already stationary on the whole
/// dictionary span. Ties go to the lowest index, then the positive sign.
std::optional<WcgaSelection> select_atom_wcga(const Objective& objective, const GreedyState& state,
                                              const Dictionary& dictionary, double t,
                                              SelectionMode mode = SelectionMode::argmax,
                                              double stationarity_tol = 0.0);

struct LineMinimum {
  double c = 0.0;
  double value = 0.0;
};

/// Minimizes c -> E(base + c * direction) for convex E: the bracket is
/// expanded geometrically in both directions and then shrunk by golden
/// section until its width is <= line_tol. When the two probe values cannot
/// be told apart in floating point the directional derivative at their
/// midpoint decides which side to drop.
LineMinimum line_minimize(const Objective& objective, const Point& base, const Point& direction, double line_tol);

struct EgcaSelection {
  SignedAtom atom;
  double c = 0.0;  // >= 0, the sign lives in `atom`
  double value = 0.0;
};

/// E-greedy selection: line search along every atom, smallest minimized value
/// wins, ties to the lowest index.
EgcaSelection select_atom_egca(const Objective& objective, const GreedyState& state, const Dictionary& dictionary,
                               double line_tol);

// ---------------------------------------------------------------------------
// Span refit

struct SpanFit {
  std::vector<double> coefficients;
  Point iterate;
  double energy = 0.0;
  double residual = 0.0;  // max_j |<E'(iterate), phi_j>|
  std::size_t inner_iterations = 0;
};

/// max_j |<E'(x), phi_j>| over the columns of `atoms`.
double orthogonality_residual(const Objective& objective, const Point& x, const Matrix& atoms);

/// Minimizes E over span(atoms) (columns of a d x k matrix) until the
/// orthogonality certificate max_j |<E'(x), phi_j>| <= orth_tol holds.
/// Quadratic objectives are solved directly from the normal equations with
/// iterative refinement; everything else runs gradient descent in coefficient
/// space with Barzilai-Borwein steps and Armijo backtracking.
SpanFit minimize_over_span(const Objective& objective, const Matrix& atoms, std::span<const double> warm_start,
                           double orth_tol, std::size_t max_inner = 10000);

// ---------------------------------------------------------------------------
// Driver

enum class StopReason { max_iterations, stationary, stop_gap, rank_deficient };
std::string to_string(StopReason r);

struct IterateRecord {
  std::size_t m = 0;
  std::optional<SignedAtom> atom;          // empty for m = 0
  std::optional<double> pairing;           // <-E'(G_{m-1}), phi_m>
  std::optional<double> sup_pairing;       // sup over signed atoms at G_{m-1}
  std::optional<double> line_value;        // EGCA: inf_c E(G_{m-1} + c phi_m)
  double energy = 0.0;
  std::optional<double> gap;               // E(G_m) - E(f0)
  double orth_residual = 0.0;
  std::size_t inner_iterations = 0;
  double weakness = 1.0;                   // t_m used (1 for EGCA and m = 0)
  Point iterate;
};

struct GreedyTrace {
  Variant variant = Variant::wcga;
  std::vector<IterateRecord> records;  // records[m] describes G_m
  GreedyState final_state;
  StopReason stop = StopReason::max_iterations;
  std::optional<double> reference_energy;

  std::size_t iterations() const { return records.empty() ? 0 : records.size() - 1; }
  std::vector<double> gaps() const;
};

/// Runs WCGA(co) or EGCA(co) from G_0 = 0. `reference` is a known minimizer
/// f0; when given each record carries the gap E(G_m) - E(f0).
GreedyTrace run_greedy(Variant variant, const Objective& objective, const Dictionary& dictionary,
                       const SolverConfig& config, const std::optional<Point>& reference = std::nullopt);

/// True when `candidate` lies in span(atoms) to relative ell_2 precision `tol`.
bool in_span(const Matrix& atoms, const Point& candidate, double tol = 1e-10);

}  // namespace greedy_opt
