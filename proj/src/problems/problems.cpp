#include "greedy_opt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace greedy_opt {

std::string to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::identity_quadratic: return "identity_quadratic";
    case ObjectiveKind::general_quadratic: return "general_quadratic";
    case ObjectiveKind::regularized_logistic: return "regularized_logistic";
  }
  return "unknown";
}

std::string to_string(DictionaryKind k) {
  switch (k) {
    case DictionaryKind::canonical: return "canonical";
    case DictionaryKind::gaussian_normalized: return "gaussian_normalized";
    case DictionaryKind::two_ortho_union: return "two_ortho_union";
  }
  return "unknown";
}

std::string to_string(PlantedKind k) {
  switch (k) {
    case PlantedKind::none: return "none";
    case PlantedKind::sparse: return "sparse";
    case PlantedKind::power_law: return "power_law";
    case PlantedKind::explicit_values: return "explicit";
  }
  return "unknown";
}

std::string to_string(DataKind k) { return k == DataKind::gaussian ? "gaussian" : "zero"; }

ObjectiveKind parse_objective_kind(const std::string& text) {
  for (auto k : {ObjectiveKind::identity_quadratic, ObjectiveKind::general_quadratic,
                 ObjectiveKind::regularized_logistic}) {
    if (text == to_string(k)) return k;
  }
  throw InvalidArgument("unknown objective kind '" + text + "'");
}

DictionaryKind parse_dictionary_kind(const std::string& text) {
  for (auto k : {DictionaryKind::canonical, DictionaryKind::gaussian_normalized, DictionaryKind::two_ortho_union}) {
    if (text == to_string(k)) return k;
  }
  throw InvalidArgument("unknown dictionary kind '" + text + "'");
}

PlantedKind parse_planted_kind(const std::string& text) {
  for (auto k : {PlantedKind::none, PlantedKind::sparse, PlantedKind::power_law, PlantedKind::explicit_values}) {
    if (text == to_string(k)) return k;
  }
  throw InvalidArgument("unknown planted kind '" + text + "'");
}

DataKind parse_data_kind(const std::string& text) {
  if (text == "gaussian") return DataKind::gaussian;
  if (text == "zero") return DataKind::zero;
  throw InvalidArgument("unknown data kind '" + text + "'");
}

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t atom_count(const ProblemSpec& spec) {
  switch (spec.dictionary) {
    case DictionaryKind::canonical: return spec.dimension;
    case DictionaryKind::gaussian_normalized: return spec.n_atoms == 0 ? 2 * spec.dimension : spec.n_atoms;
    case DictionaryKind::two_ortho_union: return 2 * spec.dimension;
  }
  return 0;
}

// Factors converting ell_2 constants to the problem norm: for p > 2 the unit
// ball is larger, for p < 2 distances are longer.
double gamma_norm_factor(std::size_t d, NormSpec norm) {
  const double e = norm.is_infinity() ? 1.0 : 1.0 - 2.0 / norm.p;
  return std::max(1.0, std::pow(static_cast<double>(d), e));
}

double beta_norm_factor(std::size_t d, NormSpec norm) {
  const double e = norm.is_infinity() ? 1.0 : 1.0 - 2.0 / norm.p;
  return std::min(1.0, std::pow(static_cast<double>(d), e));
}

double binomial(std::size_t n, std::size_t k) {
  double acc = 1.0;
  for (std::size_t i = 1; i <= k; ++i) acc = acc * static_cast<double>(n - k + i) / static_cast<double>(i);
  return acc;
}

Dictionary build_dictionary(const ProblemSpec& spec) {
  switch (spec.dictionary) {
    case DictionaryKind::canonical: return canonical_dictionary(spec.dimension, spec.norm);
    case DictionaryKind::gaussian_normalized:
      return gaussian_dictionary(spec.dimension, atom_count(spec), spec.seed ^ 0xd1b54a32d192ed03ULL, spec.norm);
    case DictionaryKind::two_ortho_union: return two_ortho_union_dictionary(spec.dimension, spec.norm);
  }
  throw InvalidArgument("unknown dictionary kind");
}

struct Planted {
  std::optional<SparseElement> head;  // K-sparse part in dictionary coefficients
  Point f0;
};

Planted plant(const ProblemSpec& spec, const Dictionary& dict, std::mt19937_64& rng) {
  const std::size_t n = dict.size();
  const auto d = static_cast<Eigen::Index>(spec.dimension);
  Planted out;
  out.f0 = Point::Zero(d);
  switch (spec.planted) {
    case PlantedKind::none: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Eigen::Index i = 0; i < d; ++i) out.f0[i] = normal(rng);
      return out;
    }
    case PlantedKind::sparse: {
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      for (std::size_t k = 0; k < spec.sparsity; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, n - 1);
        std::swap(idx[k], idx[pick(rng)]);
      }
      std::vector<std::size_t> support(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(spec.sparsity));
      std::sort(support.begin(), support.end());
      std::uniform_real_distribution<double> mag(spec.magnitude_min, spec.magnitude_max);
      std::bernoulli_distribution coin(0.5);
      SparseElement head;
      for (std::size_t i : support) {
        head.support.push_back(i);
        head.coefficients.push_back((coin(rng) ? 1.0 : -1.0) * mag(rng));
      }
      out.f0 = head.synthesize(dict);
      out.head = std::move(head);
      break;
    }
    case PlantedKind::power_law: {
      std::bernoulli_distribution coin(0.5);
      std::vector<double> c(n);
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        c[i] = std::pow(static_cast<double>(i + 1), -spec.decay_exponent);
        total += c[i];
      }
      SparseElement all;
      for (std::size_t i = 0; i < n; ++i) {
        all.support.push_back(i);
        all.coefficients.push_back((coin(rng) ? 1.0 : -1.0) * c[i] / total);
      }
      out.f0 = all.synthesize(dict);
      break;
    }
    case PlantedKind::explicit_values: {
      SparseElement head;
      for (std::size_t i = 0; i < spec.values.size(); ++i) {
        if (spec.values[i] != 0.0) {
          head.support.push_back(i);
          head.coefficients.push_back(spec.values[i]);
        }
      }
      out.f0 = head.synthesize(dict);
      out.head = std::move(head);
      break;
    }
  }
  if (spec.tail_norm > 0.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Point tail(d);
    for (Eigen::Index i = 0; i < d; ++i) tail[i] = normal(rng);
    if (spec.dictionary == DictionaryKind::canonical && out.head) {
      for (std::size_t i : out.head->support) tail[static_cast<Eigen::Index>(i)] = 0.0;
    }
    tail *= spec.tail_norm / norm_of(tail, spec.norm);
    out.f0 += tail;
  }
  return out;
}

Objective logistic_objective(const Matrix& data, const Point& labels, double delta) {
  auto A = std::make_shared<const Matrix>(data);
  auto y = std::make_shared<const Point>(labels);
  const auto value = [A, y, delta](const Point& x) {
    const Point z = y->cwiseProduct(*A * x);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      acc += z[i] > 0.0 ? std::log1p(std::exp(-z[i])) : -z[i] + std::log1p(std::exp(z[i]));
    }
    return acc + delta * x.squaredNorm();
  };
  const auto gradient = [A, y, delta](const Point& x) {
    const Point z = y->cwiseProduct(*A * x);
    Point w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) w[i] = -(*y)[i] / (1.0 + std::exp(z[i]));
    return Point(A->transpose() * w + 2.0 * delta * x);
  };
  return Objective(value, gradient, static_cast<std::size_t>(data.cols()),
                   "regularized logistic loss, " + std::to_string(data.rows()) + " rows, delta " +
                       std::to_string(delta));
}

// Newton's method with backtracking on the full space.
Point minimize_logistic(const Objective& objective, const Matrix& data, const Point& labels, double delta) {
  const auto d = data.cols();
  Point x = Point::Zero(d);
  for (int it = 0; it < 200; ++it) {
    const Point g = objective.gradient(x);
    if (g.norm() <= 1e-12) return x;
    const Point z = labels.cwiseProduct(data * x);
    Point w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-z[i]));
      w[i] = s * (1.0 - s);
    }
    const Matrix H = data.transpose() * w.asDiagonal() * data + 2.0 * delta * Matrix::Identity(d, d);
    const Point step = H.llt().solve(g);
    const double e = objective.value(x);
    double alpha = 1.0;
    Point next = x - step;
    while (objective.value(next) > e && alpha > 1e-12) {
      alpha *= 0.5;
      next = x - alpha * step;
    }
    if (next == x) break;
    x = next;
  }
  const double residual = objective.gradient(x).norm();
  if (residual <= 1e-12) return x;
  throw Error("logistic minimizer did not reach gradient norm 1e-12 (got " + std::to_string(residual) + ")");
}

}  // namespace

void ProblemSpec::validate() const {
  if (dimension == 0) throw InvalidArgument("problem.dimension must be positive");
  norm.validate();
  if (dictionary == DictionaryKind::two_ortho_union && !is_power_of_two(dimension)) {
    throw InvalidArgument("two_ortho_union needs a power-of-two dimension");
  }
  const std::size_t n = atom_count(*this);
  if (planted == PlantedKind::sparse) {
    if (sparsity > dimension) throw InvalidArgument("planted support size K exceeds the dimension");
    if (sparsity > n) throw InvalidArgument("planted support size K exceeds the dictionary size");
    if (!(magnitude_min > 0.0 && magnitude_max >= magnitude_min)) {
      throw InvalidArgument("planted magnitudes need 0 < min <= max");
    }
  }
  if (planted == PlantedKind::explicit_values && values.size() != n) {
    throw InvalidArgument("problem.values needs one coefficient per dictionary atom (" + std::to_string(n) + ")");
  }
  if (tail_norm < 0.0) throw InvalidArgument("problem.tail_norm must be nonnegative");
  if (objective == ObjectiveKind::regularized_logistic && !(delta > 0.0)) {
    throw InvalidArgument("regularized_logistic needs delta > 0 (bounded level set)");
  }
  if (declared_gamma && !(*declared_gamma > 0.0)) throw InvalidArgument("problem.gamma must be positive");
  if (declared_beta && !(*declared_beta >= 0.0)) throw InvalidArgument("problem.beta must be nonnegative");
}

Dictionary canonical_dictionary(std::size_t d, NormSpec norm) {
  std::vector<Point> atoms;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < d; ++i) {
    atoms.push_back(Point::Unit(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)));
    labels.push_back("e" + std::to_string(i));
  }
  return Dictionary(std::move(atoms), norm, false, std::move(labels));
}

Dictionary gaussian_dictionary(std::size_t d, std::size_t n_atoms, std::uint64_t seed, NormSpec norm) {
  std::mt19937_64 rng(seed);
  std::vector<Point> atoms;
  for (std::size_t i = 0; i < n_atoms; ++i) atoms.push_back(random_unit_direction(d, norm, rng));
  return Dictionary(std::move(atoms), norm, true);
}

Dictionary two_ortho_union_dictionary(std::size_t d, NormSpec norm) {
  if (!is_power_of_two(d)) throw InvalidArgument("two_ortho_union needs a power-of-two dimension");
  Matrix H = Matrix::Ones(1, 1);
  while (static_cast<std::size_t>(H.rows()) < d) {
    const auto k = H.rows();
    Matrix next(2 * k, 2 * k);
    next << H, H, H, -H;
    H = std::move(next);
  }
  std::vector<Point> atoms;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < d; ++i) {
    atoms.push_back(Point::Unit(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)));
    labels.push_back("e" + std::to_string(i));
  }
  for (std::size_t i = 0; i < d; ++i) {
    atoms.push_back(H.col(static_cast<Eigen::Index>(i)) / std::sqrt(static_cast<double>(d)));
    labels.push_back("h" + std::to_string(i));
  }
  return Dictionary(std::move(atoms), norm, !norm.is_l2(), std::move(labels));
}

EpsApproximant plant_eps_approximant(const Point& f0, std::size_t K, double eps, NormSpec norm) {
  const auto d = static_cast<std::size_t>(f0.size());
  if (K > d) throw InvalidArgument("plant_eps_approximant: K exceeds the dimension");
  if (!(eps >= 0.0)) throw InvalidArgument("plant_eps_approximant: eps must be nonnegative");
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(f0[static_cast<Eigen::Index>(a)]) > std::abs(f0[static_cast<Eigen::Index>(b)]);
  });
  EpsApproximant out;
  out.point = Point::Zero(f0.size());
  for (std::size_t k = 0; k < K; ++k) {
    const auto i = static_cast<Eigen::Index>(order[k]);
    out.point[i] = f0[i];
    out.support.push_back(order[k]);
  }
  std::sort(out.support.begin(), out.support.end());
  out.distance = norm_of(f0 - out.point, norm);
  // A tail scaled to exactly eps may round a few ulps above it.
  if (out.distance > eps * (1.0 + 1e-12)) {
    throw InfeasibleApproximant("plant_eps_approximant: tail norm " + std::to_string(out.distance) +
                                    " exceeds eps; the smallest feasible eps is the tail norm",
                                out.distance);
  }
  return out;
}

double restricted_gram_beta(const Matrix& A, std::size_t S, const std::vector<std::size_t>& T) {
  const auto n = static_cast<std::size_t>(A.cols());
  if (S > n) throw InvalidArgument("restricted_gram_beta: S exceeds the column count");
  std::vector<std::size_t> B(S);
  std::iota(B.begin(), B.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    std::vector<std::size_t> cols = B;
    for (std::size_t t : T) {
      if (std::find(cols.begin(), cols.end(), t) == cols.end()) cols.push_back(t);
    }
    if (cols.empty()) return 0.0;
    Matrix sub(A.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = A.col(static_cast<Eigen::Index>(cols[j]));
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(sub.transpose() * sub, Eigen::EigenvaluesOnly);
    best = std::min(best, std::max(0.0, eig.eigenvalues()[0]));
    // next combination
    std::size_t i = S;
    while (i > 0 && B[i - 1] == n - S + i - 1) --i;
    if (i == 0) break;
    ++B[i - 1];
    for (std::size_t j = i; j < S; ++j) B[j] = B[j - 1] + 1;
  }
  return best;
}

Problem make_problem(const ProblemSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  Dictionary dict = build_dictionary(spec);
  const std::size_t d = spec.dimension;
  const auto di = static_cast<Eigen::Index>(d);
  const std::size_t rows = spec.rows == 0 ? 2 * d : spec.rows;
  const std::size_t S = spec.rsc_sparsity == 0 ? d : spec.rsc_sparsity;

  ConstantsProfile constants;
  constants.q = 2.0;
  std::optional<Point> f0;
  std::optional<SparseElement> f_eps;
  std::optional<Point> f_eps_point;
  std::optional<Objective> objective;
  double gamma2 = 0.0;
  std::optional<double> beta2;

  if (spec.objective == ObjectiveKind::regularized_logistic) {
    Matrix data = Matrix::Zero(static_cast<Eigen::Index>(rows), di);
    Point labels = Point::Ones(static_cast<Eigen::Index>(rows));
    if (spec.data == DataKind::gaussian) {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index j = 0; j < di; ++j) data(i, j) = normal(rng) / std::sqrt(static_cast<double>(d));
      }
      const Planted p = plant(spec, dict, rng);
      std::bernoulli_distribution flip(0.1);
      for (Eigen::Index i = 0; i < data.rows(); ++i) {
        labels[i] = data.row(i).dot(p.f0) >= 0.0 ? 1.0 : -1.0;
        if (flip(rng)) labels[i] = -labels[i];
      }
    }
    objective = logistic_objective(data, labels, spec.delta);
    f0 = minimize_logistic(*objective, data, labels, spec.delta);
    const double top = data.rows() == 0 ? 0.0
                                        : Eigen::SelfAdjointEigenSolver<Matrix>(data.transpose() * data,
                                                                                Eigen::EigenvaluesOnly)
                                              .eigenvalues()
                                              .maxCoeff();
    gamma2 = std::max(0.0, top) / 8.0 + spec.delta;
    beta2 = spec.delta;
  } else {
    const Planted p = plant(spec, dict, rng);
    f0 = p.f0;
    if (p.head) {
      if (spec.tail_norm > 0.0 && spec.dictionary == DictionaryKind::canonical) {
        const EpsApproximant approx = plant_eps_approximant(p.f0, p.head->sparsity(), spec.tail_norm, spec.norm);
        SparseElement e;
        for (std::size_t i : approx.support) {
          e.support.push_back(i);
          e.coefficients.push_back(p.f0[static_cast<Eigen::Index>(i)]);
        }
        f_eps = std::move(e);
      } else {
        f_eps = *p.head;
      }
    }
    if (spec.objective == ObjectiveKind::identity_quadratic) {
      QuadraticForm form{Matrix::Identity(di, di), -2.0 * p.f0, p.f0.squaredNorm()};
      objective = Objective::quadratic(std::move(form), "||x - b||_2^2, d = " + std::to_string(d));
      gamma2 = 1.0;
      beta2 = 1.0;
    } else {
      Matrix A(static_cast<Eigen::Index>(rows), di);
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < di; ++j) A(i, j) = normal(rng) / std::sqrt(static_cast<double>(rows));
      }
      const Point b = A * p.f0;
      QuadraticForm form{A.transpose() * A, -2.0 * (A.transpose() * b), b.squaredNorm()};
      objective = Objective::quadratic(std::move(form), "||Ax - b||_2^2, " + std::to_string(rows) + " x " +
                                                            std::to_string(d));
      const Eigen::JacobiSVD<Matrix> svd(A);
      const double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
      gamma2 = smax * smax;
      // Restricted eigenvalues are enumerated only where that stays cheap.
      if (spec.dictionary == DictionaryKind::canonical && spec.tail_norm == 0.0 && binomial(d, S) <= 2e5) {
        std::vector<std::size_t> T;
        if (p.head) T = p.head->support;
        beta2 = restricted_gram_beta(A, S, T);
      }
    }
  }

  if (f_eps) {
    f_eps_point = f_eps->synthesize(dict);
    constants.K = f_eps->sparsity();
    constants.epsilon = norm_of(*f0 - *f_eps_point, spec.norm);
  }
  constants.S = S;
  if (spec.dictionary == DictionaryKind::canonical && spec.norm.is_l2()) {
    // Orthonormal atoms: sum_A |c_i| <= |A|^{1/2} ||c||_2 is Cauchy-Schwarz.
    constants.V = 1.0;
    constants.r = 0.5;
  }
  constants.gamma = spec.declared_gamma.value_or(gamma2 * gamma_norm_factor(d, spec.norm));
  if (spec.declared_beta) {
    constants.beta = spec.declared_beta;
  } else if (beta2) {
    constants.beta = *beta2 * beta_norm_factor(d, spec.norm);
  }
  objective->declare_smoothness({*constants.gamma, 2.0});
  const double e0 = objective->value(Point::Zero(di));
  constants.a0 = e0 - objective->value(*f0);

  return Problem{spec, std::move(*objective), std::move(dict), std::move(f0), std::move(f_eps),
                 std::move(f_eps_point), std::move(constants)};
}

}  // namespace greedy_opt
