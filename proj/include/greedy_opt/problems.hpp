#pragma once

#include "greedy_opt/analysis.hpp"
#include "greedy_opt/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace greedy_opt {

enum class ObjectiveKind { identity_quadratic, general_quadratic, regularized_logistic };
enum class DictionaryKind { canonical, gaussian_normalized, two_ortho_union };
enum class PlantedKind { none, sparse, power_law, explicit_values };
enum class DataKind { gaussian, zero };

std::string to_string(ObjectiveKind k);
std::string to_string(DictionaryKind k);
std::string to_string(PlantedKind k);
std::string to_string(DataKind k);
ObjectiveKind parse_objective_kind(const std::string& text);
DictionaryKind parse_dictionary_kind(const std::string& text);
PlantedKind parse_planted_kind(const std::string& text);
DataKind parse_data_kind(const std::string& text);

struct ProblemSpec {
  ObjectiveKind objective = ObjectiveKind::identity_quadratic;
  std::size_t dimension = 64;
  DictionaryKind dictionary = DictionaryKind::canonical;
  std::size_t n_atoms = 0;  // gaussian_normalized; 0 means 2 * dimension
  NormSpec norm = NormSpec::l2();

  PlantedKind planted = PlantedKind::sparse;
  std::size_t sparsity = 5;            // K
  std::vector<double> values;          // explicit dictionary coefficients
  double magnitude_min = 1.0;          // sparse: |coefficient| ~ U[min, max]
  double magnitude_max = 2.0;
  double tail_norm = 0.0;              // dense perturbation added to f0
  double decay_exponent = 2.0;         // power_law: |c_i| proportional to i^-exponent

  std::size_t rows = 0;                // data rows; 0 means 2 * dimension
  double delta = 0.1;                  // logistic ridge weight
  DataKind data = DataKind::gaussian;
  std::size_t rsc_sparsity = 0;        // S for analytic beta; 0 means dimension

  std::optional<double> declared_gamma;
  std::optional<double> declared_beta;

  std::uint64_t seed = 0;

  void validate() const;
};

struct Problem {
  ProblemSpec spec;
  Objective objective;
  Dictionary dictionary;
  std::optional<Point> f0;
  std::optional<SparseElement> f_eps;  // K-sparse approximant of f0 in the dictionary
  std::optional<Point> f_eps_point;
  ConstantsProfile constants;          // gamma, q, beta, a0, K, epsilon where known
};

Problem make_problem(const ProblemSpec& spec);

Dictionary canonical_dictionary(std::size_t d, NormSpec norm = NormSpec::l2());
Dictionary gaussian_dictionary(std::size_t d, std::size_t n_atoms, std::uint64_t seed, NormSpec norm = NormSpec::l2());
/// Identity plus the Sylvester-Hadamard basis scaled to unit columns; d must be a power of two.
Dictionary two_ortho_union_dictionary(std::size_t d, NormSpec norm = NormSpec::l2());

class InfeasibleApproximant : public Error {
 public:
  InfeasibleApproximant(const std::string& what, double minimal_eps) : Error(what), minimal_eps_(minimal_eps) {}
  double minimal_eps() const { return minimal_eps_; }

 private:
  double minimal_eps_;
};

struct EpsApproximant {
  Point point;
  std::vector<std::size_t> support;  // coordinates kept, ascending
  double distance = 0.0;             // ||f0 - point|| in the given norm
};

/// Best K-term coordinate truncation of f0 (largest magnitudes, ties to the
/// lower index). Throws InfeasibleApproximant carrying the smallest feasible
/// eps when the discarded tail is longer than eps.
EpsApproximant plant_eps_approximant(const Point& f0, std::size_t K, double eps, NormSpec norm);

/// min over |B| = S of lambda_min of the Gram matrix of columns B union T of A.
double restricted_gram_beta(const Matrix& A, std::size_t S, const std::vector<std::size_t>& T = {});

}  // namespace greedy_opt
