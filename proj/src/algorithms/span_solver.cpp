#include "greedy_opt/algorithms.hpp"

#include <cmath>
#include <limits>

namespace greedy_opt {

namespace {

Eigen::VectorXd to_vector(std::span<const double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

struct Evaluation {
  Point x;
  double energy;
  Eigen::VectorXd grad;  // coefficient-space gradient, Phi' E'(x)
};

Evaluation evaluate(const Objective& objective, const Matrix& atoms, const Eigen::VectorXd& c) {
  Evaluation e;
  e.x = atoms * c;
  e.energy = objective.value(e.x);
  e.grad = atoms.transpose() * objective.gradient(e.x);
  return e;
}

double residual_of(const Evaluation& e) { return e.grad.size() == 0 ? 0.0 : e.grad.cwiseAbs().maxCoeff(); }

SpanFit finish(const Evaluation& e, const Eigen::VectorXd& c, std::size_t iterations) {
  SpanFit out;
  out.coefficients = to_std(c);
  out.iterate = e.x;
  out.energy = e.energy;
  out.residual = residual_of(e);
  out.inner_iterations = iterations;
  return out;
}

}  // namespace

double orthogonality_residual(const Objective& objective, const Point& x, const Matrix& atoms) {
  if (atoms.cols() == 0) return 0.0;
  return (atoms.transpose() * objective.gradient(x)).cwiseAbs().maxCoeff();
}

SpanFit minimize_over_span(const Objective& objective, const Matrix& atoms, std::span<const double> warm_start,
                           double orth_tol, std::size_t max_inner) {
  if (static_cast<std::size_t>(atoms.rows()) != objective.dimension()) {
    throw DimensionMismatch(objective.dimension(), atoms.rows(), "minimize_over_span atoms");
  }
  if (static_cast<Eigen::Index>(warm_start.size()) != atoms.cols()) {
    throw DimensionMismatch(atoms.cols(), warm_start.size(), "minimize_over_span warm start");
  }
  if (!(orth_tol > 0.0)) throw InvalidArgument("minimize_over_span: orth_tol must be positive");

  Eigen::VectorXd c = to_vector(warm_start);
  const Evaluation warm = evaluate(objective, atoms, c);
  Evaluation cur = warm;
  std::size_t iterations = 0;

  if (atoms.cols() == 0) return finish(cur, c, 0);

  if (const auto& form = objective.quadratic_form()) {
    // E(Phi c) = c' H c + (Phi' l)' c + const with H = Phi' Q_sym Phi.
    const Matrix q_sym = 0.5 * (form->Q + form->Q.transpose());
    const Matrix hessian = 2.0 * atoms.transpose() * q_sym * atoms;
    const Eigen::CompleteOrthogonalDecomposition<Matrix> solver(hessian);
    // Newton from the warm start, then refinement sweeps on the oracle gradient.
    for (int sweep = 0; sweep < 6 && residual_of(cur) > orth_tol; ++sweep) {
      const Eigen::VectorXd next = c - solver.solve(cur.grad);
      const Evaluation trial = evaluate(objective, atoms, next);
      ++iterations;
      if (residual_of(trial) >= residual_of(cur) && sweep > 0) break;
      c = next;
      cur = trial;
    }
    if (residual_of(cur) <= orth_tol) {
      if (cur.energy > warm.energy && residual_of(warm) <= orth_tol) return finish(warm, to_vector(warm_start), iterations);
      return finish(cur, c, iterations);
    }
  }

  // Gradient descent in coefficient space, Barzilai-Borwein step, Armijo test.
  constexpr double kArmijo = 1e-4;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  double step = 1.0 / std::max(1.0, residual_of(cur));
  Eigen::VectorXd prev_c;
  Eigen::VectorXd prev_grad;
  while (residual_of(cur) > orth_tol) {
    if (iterations >= max_inner) {
      throw ConvergenceFailure("span minimization hit the inner iteration cap with residual " +
                                   std::to_string(residual_of(cur)),
                               residual_of(cur));
    }
    if (prev_c.size() == c.size()) {
      const Eigen::VectorXd s = c - prev_c;
      const Eigen::VectorXd y = cur.grad - prev_grad;
      const double sy = s.dot(y);
      if (sy > 0.0) step = s.squaredNorm() / sy;
    }
    const double g2 = cur.grad.squaredNorm();
    const double noise = 4.0 * kEps * std::abs(cur.energy);
    Evaluation trial;
    Eigen::VectorXd next;
    bool accepted = false;
    for (int halvings = 0; halvings < 80; ++halvings) {
      next = c - step * cur.grad;
      trial = evaluate(objective, atoms, next);
      if (std::isfinite(trial.energy) && trial.energy <= cur.energy - kArmijo * step * g2 + noise) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++iterations;
    if (!accepted) {
      throw ConvergenceFailure("span minimization stalled: no descent step with residual " +
                                   std::to_string(residual_of(cur)),
                               residual_of(cur));
    }
    prev_c = c;
    prev_grad = cur.grad;
    c = next;
    cur = trial;
  }
  return finish(cur, c, iterations);
}

bool in_span(const Matrix& atoms, const Point& candidate, double tol) {
  const double n = candidate.norm();
  if (n == 0.0) return true;
  if (atoms.cols() == 0) return false;
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(atoms);
  const Point projection = atoms * cod.solve(candidate);
  return (candidate - projection).norm() <= tol * n;
}

}  // namespace greedy_opt
