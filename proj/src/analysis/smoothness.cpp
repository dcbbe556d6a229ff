#include "greedy_opt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace greedy_opt {

namespace {

struct Probe {
  Point x;
  Point y;
};

double second_difference(const Objective& objective, const Probe& p, double u) {
  return 0.5 * std::abs(objective.value(p.x + u * p.y) + objective.value(p.x - u * p.y) - 2.0 * objective.value(p.x));
}

// y <- E'(x+uy) - E'(x-uy), renormalized; keeps the move only if it helps.
Probe ascend(const Objective& objective, Probe p, double u, NormSpec norm, int passes) {
  double best = second_difference(objective, p, u);
  for (int i = 0; i < passes; ++i) {
    const Point dir = objective.gradient(p.x + u * p.y) - objective.gradient(p.x - u * p.y);
    const double n = norm_of(dir, norm);
    if (!(n > 0.0)) break;
    Probe trial{p.x, dir / n};
    const double v = second_difference(objective, trial, u);
    if (!(v > best)) break;
    best = v;
    p = std::move(trial);
  }
  return p;
}

}  // namespace

SmoothnessFit estimate_smoothness(const Objective& objective, NormSpec norm, const std::vector<double>& u_grid,
                                  std::size_t n_samples, std::uint64_t seed) {
  norm.validate();
  if (u_grid.size() < 2) throw InvalidArgument("estimate_smoothness: u_grid needs at least two points for a slope");
  for (std::size_t i = 0; i < u_grid.size(); ++i) {
    if (!(u_grid[i] > 0.0) || (i > 0 && !(u_grid[i] > u_grid[i - 1]))) {
      throw InvalidArgument("estimate_smoothness: u_grid must be positive and strictly ascending");
    }
  }
  if (n_samples == 0) throw InvalidArgument("estimate_smoothness: n_samples must be positive");

  const std::size_t d = objective.dimension();
  std::mt19937_64 rng(seed);
  LevelSetSampler sampler(objective, seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<Probe> probes;
  probes.reserve(n_samples + 8);
  probes.push_back({Point::Zero(static_cast<Eigen::Index>(d)), random_unit_direction(d, norm, rng)});
  for (std::size_t i = 1; i < n_samples; ++i) probes.push_back({sampler.next(), random_unit_direction(d, norm, rng)});

  // Refine the strongest few probes at a mid-grid step.
  const double u_ref = u_grid[u_grid.size() / 2];
  std::vector<std::size_t> order(probes.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> score(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) score[i] = second_difference(objective, probes[i], u_ref);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  const std::size_t n_refine = std::min<std::size_t>(5, probes.size());
  for (std::size_t k = 0; k < n_refine; ++k) probes.push_back(ascend(objective, probes[order[k]], u_ref, norm, 50));
  probes.push_back(ascend(objective, probes.front(), u_ref, norm, 50));

  SmoothnessFit fit;
  for (double u : u_grid) {
    double rho = 0.0;
    for (const Probe& p : probes) rho = std::max(rho, second_difference(objective, p, u));
    fit.samples.push_back({u, rho});
  }

  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& s : fit.samples) {
    if (s.rho > 0.0) {
      lx.push_back(std::log(s.u));
      ly.push_back(std::log(s.rho));
    }
  }
  if (lx.empty()) throw Error("estimate_smoothness: objective is flat on the sampled level set (all rho = 0)");
  if (lx.size() < 2) throw Error("estimate_smoothness: fewer than two grid points with rho > 0");

  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  fit.fitted_q = sxy / sxx;
  const double intercept = my - fit.fitted_q * mx;
  fit.fitted_gamma = std::exp(intercept);
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (intercept + fit.fitted_q * lx[i]);
    rss += e * e;
  }
  fit.fit_residual = std::sqrt(rss / n);

  if (const auto& declared = objective.smoothness()) {
    fit.gamma = declared->gamma;
    fit.q = declared->q;
    fit.analytic = true;
  } else {
    fit.gamma = fit.fitted_gamma;
    fit.q = fit.fitted_q;
  }
  return fit;
}

}  // namespace greedy_opt
