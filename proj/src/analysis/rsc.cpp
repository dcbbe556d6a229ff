#include "greedy_opt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace greedy_opt {

RscEstimate estimate_rsc(const Objective& objective, const Dictionary& dictionary, const Point& f0, std::size_t S,
                         std::size_t n_samples, std::uint64_t seed) {
  if (dictionary.dimension() != objective.dimension()) {
    throw DimensionMismatch(objective.dimension(), dictionary.dimension(), "estimate_rsc dictionary");
  }
  if (static_cast<std::size_t>(f0.size()) != objective.dimension()) {
    throw DimensionMismatch(objective.dimension(), f0.size(), "estimate_rsc f0");
  }
  if (S > dictionary.size()) throw InvalidArgument("estimate_rsc: S exceeds the dictionary size");

  const NormSpec norm = dictionary.norm();
  const double e0 = objective.value(f0);
  RscEstimate out;
  out.S = S;
  double best = std::numeric_limits<double>::infinity();

  const auto consider = [&](const Point& f) {
    const double dist = norm_of(f - f0, norm);
    if (dist < 1e-12) {
      ++out.samples_skipped;
      return;
    }
    ++out.samples_used;
    best = std::min(best, (objective.value(f) - e0) / (dist * dist));
  };

  if (S == 0) {
    consider(Point::Zero(f0.size()));
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::size_t> idx(dictionary.size());
    const double scale = std::max(1.0, norm_of(f0, norm));
    constexpr double kRadii[] = {1e-2, 1e-1, 1.0, 10.0};
    for (std::size_t s = 0; s < n_samples; ++s) {
      std::iota(idx.begin(), idx.end(), 0);
      for (std::size_t k = 0; k < S; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, idx.size() - 1);
        std::swap(idx[k], idx[pick(rng)]);
      }
      std::vector<SignedAtom> support;
      for (std::size_t k = 0; k < S; ++k) support.push_back({idx[k], 1});
      const Matrix atoms = dictionary.columns(support);

      Eigen::VectorXd c(static_cast<Eigen::Index>(S));
      for (Eigen::Index k = 0; k < c.size(); ++k) c[k] = normal(rng);
      Point dir = atoms * c;
      const double n = norm_of(dir, norm);
      if (!(n > 0.0)) {
        ++out.samples_skipped;
        continue;
      }
      dir /= n;
      const double radius = kRadii[s % 4] * scale;
      if (s % 2 == 0) {
        consider(radius * dir);
      } else {
        // Perturbation of the best approximation of f0 from the same support.
        const Eigen::VectorXd proj = atoms.completeOrthogonalDecomposition().solve(f0);
        consider(atoms * proj + radius * dir);
      }
    }
  }
  if (out.samples_used == 0) throw Error("estimate_rsc: every sample coincided with f0");
  out.beta = std::max(0.0, best);
  return out;
}

}  // namespace greedy_opt
