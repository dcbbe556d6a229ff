#include "greedy_opt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace greedy_opt {

std::vector<std::string> ConstantsProfile::missing_for_bound() const {
  std::vector<std::string> missing;
  if (!gamma) missing.push_back("gamma");
  if (!beta) missing.push_back("beta");
  if (!V) missing.push_back("V");
  if (!r) missing.push_back("r");
  if (!t) missing.push_back("t");
  if (!epsilon) missing.push_back("epsilon");
  if (!K) missing.push_back("K");
  if (!a0) missing.push_back("a0");
  return missing;
}

double ConstantsProfile::c1() const {
  if (!beta || !t || !gamma || !V) throw MissingConstant("c1 needs beta, t, gamma and V");
  return *beta * *t * *t / (64.0 * *gamma * *V * *V);
}

bool ConstantsProfile::bound_applies(std::size_t m) const { return !S || !K || *K + m <= *S; }

bool ConstantsProfile::beta_gamma_consistent() const {
  if (!beta || !gamma) return true;
  return *beta <= 2.0 * *gamma * (1.0 + 1e-12);
}

double evaluate_thm21_bound(const ConstantsProfile& profile, std::size_t m) {
  const auto missing = profile.missing_for_bound();
  if (!missing.empty()) {
    std::string names;
    for (const auto& n : missing) names += (names.empty() ? "" : ", ") + n;
    throw MissingConstant("bound evaluation is missing: " + names);
  }
  if (!(*profile.beta > 0.0) || !(*profile.gamma > 0.0) || !(*profile.V > 0.0) || *profile.K == 0) {
    throw InvalidArgument("bound evaluation needs beta, gamma, V > 0 and K >= 1");
  }
  const double gamma = *profile.gamma;
  const double beta = *profile.beta;
  const double eps = *profile.epsilon;
  const double K = static_cast<double>(*profile.K);
  const double decay = *profile.a0 * std::exp(-profile.c1() * static_cast<double>(m) / std::pow(K, 2.0 * *profile.r));
  const double floor = 8.0 * (gamma * gamma / beta) * eps * eps;
  return std::max(decay, floor) + 2.0 * gamma * eps * eps;
}

RateFit evaluate_rate(const std::vector<double>& gaps_by_m, std::size_t m_min, std::size_t m_max, double q) {
  if (m_min == 0 || m_min > m_max) throw InvalidArgument("rate fit: need 1 <= m_min <= m_max");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t m = m_min; m <= m_max && m < gaps_by_m.size(); ++m) {
    const double g = gaps_by_m[m];
    if (std::isfinite(g) && g >= 1e-14) {
      lx.push_back(std::log(static_cast<double>(m)));
      ly.push_back(std::log(g));
    }
  }
  if (lx.size() < 5) throw InvalidArgument("rate fit: fewer than 5 usable gap values");
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  RateFit fit;
  fit.points = lx.size();
  fit.slope = sxy / sxx;
  fit.threshold = (1.0 - q) + 0.2;
  fit.passed = fit.slope <= fit.threshold;
  return fit;
}

RateFit evaluate_thm11_rate(const GreedyTrace& trace, std::size_t m_min, std::size_t m_max, double q) {
  return evaluate_rate(trace.gaps(), m_min, m_max, q);
}

}  // namespace greedy_opt
