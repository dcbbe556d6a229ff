#include "greedy_opt/algorithms.hpp"

#include <cmath>
#include <limits>

namespace greedy_opt {

namespace {

constexpr double kMaxExtent = 1152921504606846976.0;  // 2^60
constexpr double kInvPhi = 0.6180339887498948482;    // 1 / golden ratio
constexpr double kEps = std::numeric_limits<double>::epsilon();

double width_floor(double line_tol, double lo, double hi) {
  return std::max(line_tol, 4.0 * kEps * std::max(std::abs(lo), std::abs(hi)));
}

}  // namespace

LineMinimum line_minimize(const Objective& objective, const Point& base, const Point& direction, double line_tol) {
  if (static_cast<std::size_t>(base.size()) != objective.dimension()) {
    throw DimensionMismatch(objective.dimension(), base.size(), "line_minimize base");
  }
  if (base.size() != direction.size()) throw DimensionMismatch(base.size(), direction.size(), "line_minimize direction");
  if (direction.isZero(0.0)) throw InvalidArgument("line_minimize: direction must be nonzero");
  if (!(line_tol > 0.0)) throw InvalidArgument("line_minimize: line_tol must be positive");

  const auto f = [&](double c) { return objective.value(base + c * direction); };
  const auto slope = [&](double c) { return objective.gradient(base + c * direction).dot(direction); };

  // Bracket [lo, hi] around the minimizer.
  double lo = -1.0;
  double hi = 1.0;
  const double f0 = f(0.0);
  const double fp = f(1.0);
  const double fm = f(-1.0);
  if (fp < f0 || fm < f0) {
    const double dir = fp < f0 ? 1.0 : -1.0;
    double prev = 0.0;
    double cur = dir;
    double fcur = dir > 0 ? fp : fm;
    double step = 1.0;
    for (;;) {
      step *= 2.0;
      const double next = cur + dir * step;
      if (std::abs(next) > kMaxExtent) {
        throw UnboundedBelow("line_minimize: objective keeps decreasing past 2^60 along the direction");
      }
      const double fnext = f(next);
      if (fnext >= fcur) {
        lo = std::min(prev, next);
        hi = std::max(prev, next);
        break;
      }
      prev = cur;
      cur = next;
      fcur = fnext;
    }
  }

  // Golden-section shrinkage; hands over to derivative bisection once the two
  // interior values are equal to rounding.
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  bool bisect = false;
  while (hi - lo > width_floor(line_tol, lo, hi)) {
    const double noise = 8.0 * kEps * std::max({std::abs(f1), std::abs(f2), std::numeric_limits<double>::min()});
    if (std::abs(f1 - f2) <= noise) {
      bisect = true;
      break;
    }
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }
  if (bisect) {
    while (hi - lo > width_floor(line_tol, lo, hi)) {
      const double mid = 0.5 * (lo + hi);
      const double s = slope(mid);
      if (s > 0.0) {
        hi = mid;
      } else if (s < 0.0) {
        lo = mid;
      } else {
        lo = hi = mid;
      }
    }
  }

  LineMinimum out;
  out.c = 0.5 * (lo + hi);
  out.value = f(out.c);
  return out;
}

}  // namespace greedy_opt
