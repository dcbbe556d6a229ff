#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace greedy_opt {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got, const std::string& where);
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Norms and pairings

/// lp norm selector on R^d. p = infinity is spelled NormSpec::infinity().
struct NormSpec {
  double p = 2.0;

  static NormSpec l1() { return {1.0}; }
  static NormSpec l2() { return {2.0}; }
  static NormSpec infinity();

  bool is_l2() const { return p == 2.0; }
  bool is_infinity() const;
  void validate() const;
  std::string to_string() const;
  static NormSpec parse(const std::string& text);
};

double norm_of(const Point& point, NormSpec norm);

/// Action of a functional on an atom: the coordinate dot product.
double dual_pairing(const Point& functional, const Point& atom);

/// Throws InvalidArgument when any coordinate is NaN or infinite.
void require_finite(const Point& point, const std::string& what);

/// Random direction with norm_of(y, norm) == 1.
Point random_unit_direction(std::size_t dim, NormSpec norm, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Dictionary

/// Atom index with the sign chosen at selection time. The dictionary is
/// symmetric: every stored atom g stands for the pair {g, -g}.
struct SignedAtom {
  std::size_t index = 0;
  int sign = 1;

  bool operator==(const SignedAtom&) const = default;
};

class Dictionary {
 public:
  static constexpr double kNormTolerance = 1e-12;

  /// Validates ||g|| <= 1 under `norm` for every atom. With normalize = true
  /// each atom is rescaled to unit norm first (zero atoms are rejected).
  Dictionary(std::vector<Point> atoms, NormSpec norm, bool normalize = false,
             std::vector<std::string> labels = {});

  std::size_t size() const { return atoms_.size(); }
  std::size_t dimension() const { return dim_; }
  const Point& atom(std::size_t i) const { return atoms_.at(i); }
  Point signed_atom(SignedAtom a) const;
  NormSpec norm() const { return norm_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::string label(std::size_t i) const;

  /// d x n matrix with the atoms as columns.
  const Matrix& matrix() const { return matrix_; }
  /// d x k matrix of the given signed atoms.
  Matrix columns(std::span<const SignedAtom> atoms) const;

 private:
  std::vector<Point> atoms_;
  Matrix matrix_;
  NormSpec norm_;
  std::vector<std::string> labels_;
  std::size_t dim_ = 0;
};

/// Element sum_i coefficients[i] * g_{support[i]} of the dictionary span.
struct SparseElement {
  std::vector<std::size_t> support;
  std::vector<double> coefficients;

  std::size_t sparsity() const { return support.size(); }
  Point synthesize(const Dictionary& dictionary) const;
  /// Sum of |coefficients| over entries whose index is not in `exclude`.
  double l1_norm_excluding(std::span<const std::size_t> exclude = {}) const;
};

// ---------------------------------------------------------------------------
// Objective

/// E(x) = x'Qx + l'x + c. Declared by objectives that are exactly quadratic so
/// the span solver can take the linear-solve fast path.
struct QuadraticForm {
  Matrix Q;
  Point linear;
  double constant = 0.0;

  double value(const Point& x) const;
  Point gradient(const Point& x) const;
};

/// Analytic modulus-of-smoothness constants: rho(E, u) <= gamma * u^q.
struct SmoothnessConstants {
  double gamma = 0.0;
  double q = 2.0;
};

class Objective {
 public:
  using ValueFn = std::function<double(const Point&)>;
  using GradientFn = std::function<Point(const Point&)>;

  Objective(ValueFn value, GradientFn gradient, std::size_t dimension, std::string description);

  static Objective quadratic(QuadraticForm form, std::string description);

  double value(const Point& x) const;
  Point gradient(const Point& x) const;
  std::size_t dimension() const { return dim_; }
  const std::string& description() const { return description_; }

  const std::optional<QuadraticForm>& quadratic_form() const { return quadratic_; }
  const std::optional<SmoothnessConstants>& smoothness() const { return smoothness_; }
  Objective& declare_smoothness(SmoothnessConstants c);

 private:
  ValueFn value_;
  GradientFn gradient_;
  std::size_t dim_;
  std::string description_;
  std::optional<QuadraticForm> quadratic_;
  std::optional<SmoothnessConstants> smoothness_;
};

/// Outcome of the convexity and finite-difference spot checks.
struct ObjectiveCheck {
  std::size_t convexity_pairs = 0;
  std::size_t convexity_violations = 0;
  double worst_midpoint_excess = 0.0;  // max of E(mid) - (E(x)+E(y))/2
  std::size_t gradient_probes = 0;
  std::size_t gradient_violations = 0;
  double worst_gradient_rel_error = 0.0;

  bool passed() const { return convexity_violations == 0 && gradient_violations == 0; }
};

/// Midpoint convexity on consecutive pairs of `probes` (tolerance 1e-9) and
/// central differences at step 1e-5 on every probe (relative error 1e-6).
ObjectiveCheck check_objective(const Objective& objective, std::span<const Point> probes);

// ---------------------------------------------------------------------------
// Weakness sequence

class WeaknessSequence {
 public:
  static WeaknessSequence constant(double t);
  /// t_k for k = 1..n; iterations past the list reuse its last entry.
  static WeaknessSequence explicit_list(std::vector<double> values);

  /// 1-based iteration index.
  double at(std::size_t m) const;
  bool is_constant() const { return values_.size() == 1 && constant_; }
  const std::vector<double>& values() const { return values_; }

 private:
  WeaknessSequence(std::vector<double> values, bool constant);
  std::vector<double> values_;
  bool constant_ = true;
};

// ---------------------------------------------------------------------------
// Level set sampling

/// Hit-and-run sampler for D = {x : E(x) <= E(0)}. Chord endpoints are found by
/// doubling then bisection along the ray; the chain starts at 0 which is in D.
class LevelSetSampler {
 public:
  LevelSetSampler(const Objective& objective, std::uint64_t seed, std::size_t burn_in = 50);

  Point next();
  std::vector<Point> draw(std::size_t n, std::size_t thinning = 3);
  double level() const { return level_; }

  /// Largest s >= 0 with E(x + s v) <= level, to relative precision 1e-12.
  double ray_crossing(const Point& x, const Point& v) const;

 private:
  const Objective* objective_;
  std::mt19937_64 rng_;
  double level_;
  Point current_;
};

}  // namespace greedy_opt
