#include "greedy_opt/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace greedy_opt {

DimensionMismatch::DimensionMismatch(std::size_t expected, std::size_t got, const std::string& where)
    : Error(where + ": dimension mismatch (expected " + std::to_string(expected) + ", got " +
            std::to_string(got) + ")") {}

NormSpec NormSpec::infinity() { return {std::numeric_limits<double>::infinity()}; }

bool NormSpec::is_infinity() const { return std::isinf(p); }

void NormSpec::validate() const {
  if (std::isnan(p) || p < 1.0) {
    throw InvalidArgument("norm exponent p must lie in [1, inf], got " + std::to_string(p));
  }
}

std::string NormSpec::to_string() const {
  if (is_infinity()) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << p;
  return os.str();
}

NormSpec NormSpec::parse(const std::string& text) {
  if (text == "inf" || text == "infinity") return infinity();
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("cannot parse norm exponent '" + text + "'");
  }
  if (used != text.size()) throw InvalidArgument("cannot parse norm exponent '" + text + "'");
  NormSpec n{p};
  n.validate();
  return n;
}

double norm_of(const Point& point, NormSpec norm) {
  if (point.size() == 0) return 0.0;
  if (norm.is_infinity()) return point.cwiseAbs().maxCoeff();
  if (norm.p == 1.0) return point.cwiseAbs().sum();
  if (norm.p == 2.0) return point.norm();
  // Scale by the largest entry so |x_i|^p neither overflows nor underflows.
  const double scale = point.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < point.size(); ++i) acc += std::pow(std::abs(point[i]) / scale, norm.p);
  return scale * std::pow(acc, 1.0 / norm.p);
}

double dual_pairing(const Point& functional, const Point& atom) {
  if (functional.size() != atom.size()) {
    throw DimensionMismatch(static_cast<std::size_t>(functional.size()), static_cast<std::size_t>(atom.size()),
                            "dual_pairing");
  }
  return functional.dot(atom);
}

void require_finite(const Point& point, const std::string& what) {
  if (!point.allFinite()) throw InvalidArgument(what + ": non-finite coordinate");
}

Point random_unit_direction(std::size_t dim, NormSpec norm, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Point y(static_cast<Eigen::Index>(dim));
  double n = 0.0;
  do {
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = normal(rng);
    n = norm_of(y, norm);
  } while (n == 0.0);
  return y / n;
}

// ---------------------------------------------------------------------------

Dictionary::Dictionary(std::vector<Point> atoms, NormSpec norm, bool normalize, std::vector<std::string> labels)
    : atoms_(std::move(atoms)), norm_(norm), labels_(std::move(labels)) {
  norm_.validate();
  if (atoms_.empty()) throw InvalidArgument("dictionary needs at least one atom");
  dim_ = static_cast<std::size_t>(atoms_.front().size());
  if (dim_ == 0) throw InvalidArgument("dictionary atoms must have positive dimension");
  if (!labels_.empty() && labels_.size() != atoms_.size()) {
    throw InvalidArgument("dictionary label count does not match atom count");
  }
  matrix_.resize(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(atoms_.size()));
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    Point& g = atoms_[i];
    if (static_cast<std::size_t>(g.size()) != dim_) throw DimensionMismatch(dim_, g.size(), "dictionary atom");
    require_finite(g, "dictionary atom " + std::to_string(i));
    double n = norm_of(g, norm_);
    if (normalize) {
      if (n == 0.0) throw InvalidArgument("cannot normalize zero atom " + std::to_string(i));
      g /= n;
      n = norm_of(g, norm_);
    }
    if (n > 1.0 + kNormTolerance) {
      throw InvalidArgument("atom " + std::to_string(i) + " has norm " + std::to_string(n) + " > 1");
    }
    matrix_.col(static_cast<Eigen::Index>(i)) = g;
  }
}

Point Dictionary::signed_atom(SignedAtom a) const {
  return a.sign < 0 ? Point(-atom(a.index)) : atom(a.index);
}

std::string Dictionary::label(std::size_t i) const {
  if (!labels_.empty()) return labels_.at(i);
  return "g" + std::to_string(i);
}

Matrix Dictionary::columns(std::span<const SignedAtom> atoms) const {
  Matrix out(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(atoms.size()));
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = static_cast<double>(atoms[j].sign) * atom(atoms[j].index);
  }
  return out;
}

Point SparseElement::synthesize(const Dictionary& dictionary) const {
  if (support.size() != coefficients.size()) throw InvalidArgument("sparse element support/coefficient size mismatch");
  Point out = Point::Zero(static_cast<Eigen::Index>(dictionary.dimension()));
  for (std::size_t j = 0; j < support.size(); ++j) out += coefficients[j] * dictionary.atom(support[j]);
  return out;
}

double SparseElement::l1_norm_excluding(std::span<const std::size_t> exclude) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < support.size(); ++j) {
    if (std::find(exclude.begin(), exclude.end(), support[j]) == exclude.end()) acc += std::abs(coefficients[j]);
  }
  return acc;
}

// ---------------------------------------------------------------------------

double QuadraticForm::value(const Point& x) const { return x.dot(Q * x) + linear.dot(x) + constant; }

Point QuadraticForm::gradient(const Point& x) const { return (Q + Q.transpose()) * x + linear; }

Objective::Objective(ValueFn value, GradientFn gradient, std::size_t dimension, std::string description)
    : value_(std::move(value)), gradient_(std::move(gradient)), dim_(dimension),
      description_(std::move(description)) {
  if (!value_ || !gradient_) throw InvalidArgument("objective requires value and gradient oracles");
  if (dim_ == 0) throw InvalidArgument("objective dimension must be positive");
}

Objective Objective::quadratic(QuadraticForm form, std::string description) {
  const auto d = static_cast<std::size_t>(form.Q.rows());
  if (form.Q.cols() != form.Q.rows()) throw InvalidArgument("quadratic form matrix must be square");
  if (static_cast<std::size_t>(form.linear.size()) != d) {
    throw DimensionMismatch(d, form.linear.size(), "quadratic form linear term");
  }
  auto shared = std::make_shared<const QuadraticForm>(form);
  Objective obj([shared](const Point& x) { return shared->value(x); },
                [shared](const Point& x) { return shared->gradient(x); }, d, std::move(description));
  obj.quadratic_ = std::move(form);
  return obj;
}

double Objective::value(const Point& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw DimensionMismatch(dim_, x.size(), "objective value");
  return value_(x);
}

Point Objective::gradient(const Point& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw DimensionMismatch(dim_, x.size(), "objective gradient");
  return gradient_(x);
}

Objective& Objective::declare_smoothness(SmoothnessConstants c) {
  if (!(c.gamma > 0.0) || !(c.q > 1.0) || c.q > 2.0) {
    throw InvalidArgument("smoothness constants need gamma > 0 and q in (1, 2]");
  }
  smoothness_ = c;
  return *this;
}

ObjectiveCheck check_objective(const Objective& objective, std::span<const Point> probes) {
  constexpr double kConvexitySlack = 1e-9;
  constexpr double kStep = 1e-5;
  constexpr double kRelTol = 1e-6;
  ObjectiveCheck out;

  for (std::size_t i = 0; i + 1 < probes.size(); i += 2) {
    const Point& x = probes[i];
    const Point& y = probes[i + 1];
    const double excess = objective.value(0.5 * (x + y)) - 0.5 * (objective.value(x) + objective.value(y));
    ++out.convexity_pairs;
    out.worst_midpoint_excess = std::max(out.worst_midpoint_excess, excess);
    if (excess > kConvexitySlack) ++out.convexity_violations;
  }

  for (const Point& x : probes) {
    const Point g = objective.gradient(x);
    Point fd(g.size());
    Point xp = x;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double orig = xp[k];
      xp[k] = orig + kStep;
      const double up = objective.value(xp);
      xp[k] = orig - kStep;
      const double down = objective.value(xp);
      xp[k] = orig;
      fd[k] = (up - down) / (2.0 * kStep);
    }
    const double rel = (fd - g).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff());
    ++out.gradient_probes;
    out.worst_gradient_rel_error = std::max(out.worst_gradient_rel_error, rel);
    if (rel > kRelTol) ++out.gradient_violations;
  }
  return out;
}

// ---------------------------------------------------------------------------

WeaknessSequence::WeaknessSequence(std::vector<double> values, bool constant)
    : values_(std::move(values)), constant_(constant) {
  if (values_.empty()) throw InvalidArgument("weakness sequence must not be empty");
  for (double t : values_) {
    if (!(t > 0.0 && t <= 1.0)) throw InvalidArgument("weakness parameter must lie in (0, 1], got " + std::to_string(t));
  }
}

WeaknessSequence WeaknessSequence::constant(double t) { return WeaknessSequence({t}, true); }

WeaknessSequence WeaknessSequence::explicit_list(std::vector<double> values) {
  return WeaknessSequence(std::move(values), false);
}

double WeaknessSequence::at(std::size_t m) const {
  if (m == 0) throw InvalidArgument("weakness sequence is indexed from 1");
  return values_[std::min(m, values_.size()) - 1];
}

// ---------------------------------------------------------------------------

LevelSetSampler::LevelSetSampler(const Objective& objective, std::uint64_t seed, std::size_t burn_in)
    : objective_(&objective), rng_(seed), level_(objective.value(Point::Zero(static_cast<Eigen::Index>(objective.dimension())))),
      current_(Point::Zero(static_cast<Eigen::Index>(objective.dimension()))) {
  for (std::size_t i = 0; i < burn_in; ++i) next();
}

double LevelSetSampler::ray_crossing(const Point& x, const Point& v) const {
  constexpr double kMaxExtent = 1152921504606846976.0;  // 2^60
  const auto inside = [&](double s) { return objective_->value(x + s * v) <= level_; };
  double lo = 0.0;
  double hi = 1.0;
  while (inside(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > kMaxExtent) throw Error("level set {E <= E(0)} appears unbounded along a sampled ray");
  }
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  return lo;
}

Point LevelSetSampler::next() {
  const Point v = random_unit_direction(objective_->dimension(), NormSpec::l2(), rng_);
  const double forward = ray_crossing(current_, v);
  const double backward = ray_crossing(current_, -v);
  std::uniform_real_distribution<double> chord(-backward, forward);
  current_ += chord(rng_) * v;
  return current_;
}

std::vector<Point> LevelSetSampler::draw(std::size_t n, std::size_t thinning) {
  std::vector<Point> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 1; k < thinning; ++k) next();
    out.push_back(next());
  }
  return out;
}

}  // namespace greedy_opt
