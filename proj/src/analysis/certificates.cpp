#include "greedy_opt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace greedy_opt {

namespace {

constexpr double kSandwichSlack = 1e-9;
constexpr double kHullSlack = 1e-12;

}  // namespace

CertificateReport verify_certificates(const Objective& objective, const GreedyTrace& trace,
                                      const Dictionary& dictionary, const CertificateOptions& options) {
  if (dictionary.dimension() != objective.dimension()) {
    throw DimensionMismatch(objective.dimension(), dictionary.dimension(), "verify_certificates dictionary");
  }
  CertificateReport out;
  const std::size_t d = objective.dimension();
  const NormSpec norm = dictionary.norm();

  // Smoothness sandwich 0 <= E(x+uy) - E(x) - u<E'(x),y> <= 2 rho(E, u||y||).
  if (options.n_samples > 0) {
    const auto& declared = objective.smoothness();
    if (!declared) throw InvalidArgument("verify_certificates: objective declares no smoothness constants");
    if (options.u_grid.empty()) throw InvalidArgument("verify_certificates: empty u grid");
    std::mt19937_64 rng(options.seed);
    LevelSetSampler sampler(objective, options.seed ^ 0x5851f42d4c957f2dULL);
    out.min_lower_slack = std::numeric_limits<double>::infinity();
    out.min_upper_slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < options.n_samples; ++i) {
      const Point x = sampler.next();
      const Point y = random_unit_direction(d, norm, rng);
      const double u = options.u_grid[i % options.u_grid.size()];
      const double middle = objective.value(x + u * y) - objective.value(x) - u * objective.gradient(x).dot(y);
      const double upper = 2.0 * declared->gamma * std::pow(u * norm_of(y, norm), declared->q);
      ++out.sandwich_samples;
      out.min_lower_slack = std::min(out.min_lower_slack, middle);
      out.min_upper_slack = std::min(out.min_upper_slack, upper - middle);
      if (middle < -kSandwichSlack || middle > upper + kSandwichSlack) {
        out.sandwich_violations.push_back({x, y, u, middle, upper});
      }
    }
  }

  // Orthogonality of every refit against its selected atoms, recomputed.
  std::vector<SignedAtom> selected;
  for (const auto& rec : trace.records) {
    if (!rec.atom) continue;
    selected.push_back(*rec.atom);
    const double residual = orthogonality_residual(objective, rec.iterate, dictionary.columns(selected));
    ++out.orth_records;
    out.max_orth_residual = std::max(out.max_orth_residual, residual);
    if (residual > options.orth_tol) out.orth_violations.emplace_back(rec.m, residual);
  }

  // sup over the signed atoms equals sup over their convex hull.
  if (options.hull_functionals > 0) {
    std::mt19937_64 rng(options.seed + 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);
    std::bernoulli_distribution coin(0.5);
    const std::size_t n = dictionary.size();
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_int_distribution<std::size_t> width(1, std::min<std::size_t>(n, 8));
    out.max_hull_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < options.hull_functionals; ++f) {
      Point F(static_cast<Eigen::Index>(d));
      for (Eigen::Index k = 0; k < F.size(); ++k) F[k] = normal(rng);
      const double atom_max = (dictionary.matrix().transpose() * F).cwiseAbs().maxCoeff();
      ++out.hull_functionals;
      for (std::size_t c = 0; c < options.hull_combinations; ++c) {
        const std::size_t k = width(rng);
        std::vector<double> w(k);
        for (double& v : w) v = expo(rng);
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        Point combo = Point::Zero(static_cast<Eigen::Index>(d));
        for (std::size_t j = 0; j < k; ++j) {
          const double sign = coin(rng) ? 1.0 : -1.0;
          combo += (sign * w[j] / total) * dictionary.atom(pick(rng));
        }
        const double excess = dual_pairing(F, combo) - atom_max;
        ++out.hull_combinations;
        out.max_hull_excess = std::max(out.max_hull_excess, excess);
        if (excess > kHullSlack) out.hull_violations.push_back(F);
      }
    }
  }
  return out;
}

}  // namespace greedy_opt
