#include "greedy_opt/analysis.hpp"

#include <algorithm>
#include <limits>

namespace greedy_opt {

namespace {

constexpr double kRecursionSlack = 1e-9;

RecursionReport check_steps(std::span<const double> gaps, std::span<const double> l1_remaining,
                            std::span<const double> weakness, double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("recursion_check: gamma must be positive");
  if (gaps.empty()) throw InvalidArgument("recursion_check: empty gap sequence");
  if (l1_remaining.size() + 1 != gaps.size() || weakness.size() != l1_remaining.size()) {
    throw InvalidArgument("recursion_check: need one l1 norm and one t per iteration");
  }
  RecursionReport out;
  out.min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n < gaps.size(); ++n) {
    RecursionStep step;
    step.n = n;
    step.a_prev = gaps[n - 1];
    step.a_n = gaps[n];
    step.l1_remaining = l1_remaining[n - 1];
    // a_{n-1} <= 0 makes the step trivial; an exhausted support with a_{n-1} > 0
    // can only be rounding in E(G_{n-1}) - E(f_eps).
    if (!(step.a_prev > 0.0) || !(step.l1_remaining > 0.0)) {
      step.skipped = true;
      out.steps.push_back(step);
      continue;
    }
    const double tau = weakness[n - 1] * step.a_prev / step.l1_remaining;
    step.required = step.a_prev - tau * tau / (8.0 * gamma);
    step.slack = step.required - step.a_n;
    out.min_slack = std::min(out.min_slack, step.slack);
    if (step.slack < -kRecursionSlack) ++out.violations;
    out.steps.push_back(step);
  }
  return out;
}

}  // namespace

RecursionReport recursion_check(std::span<const double> gaps, std::span<const double> l1_remaining, double t,
                                double gamma) {
  if (!(t > 0.0 && t <= 1.0)) throw InvalidArgument("recursion_check: t must lie in (0, 1]");
  const std::vector<double> weakness(l1_remaining.size(), t);
  return check_steps(gaps, l1_remaining, weakness, gamma);
}

RecursionReport recursion_check(const GreedyTrace& trace, const SparseElement& f_eps, double energy_at_f_eps,
                                double gamma) {
  std::vector<double> gaps;
  std::vector<double> l1;
  std::vector<double> weakness;
  std::vector<std::size_t> picked;
  for (const auto& rec : trace.records) {
    gaps.push_back(rec.energy - energy_at_f_eps);
    if (rec.m == 0) continue;
    l1.push_back(f_eps.l1_norm_excluding(picked));
    weakness.push_back(trace.variant == Variant::egca ? 1.0 : rec.weakness);
    if (rec.atom) picked.push_back(rec.atom->index);
  }
  return check_steps(gaps, l1, weakness, gamma);
}

DominanceReport dominance_check(const Objective& objective, const Dictionary& dictionary, const GreedyTrace& trace,
                                double line_tol) {
  if (trace.variant != Variant::egca) throw InvalidArgument("dominance_check expects an EGCA trace");
  DominanceReport out;
  for (std::size_t n = 1; n < trace.records.size(); ++n) {
    const IterateRecord& rec = trace.records[n];
    if (!rec.line_value) throw InvalidArgument("dominance_check: EGCA record without a line value");
    GreedyState state;
    state.iterate = trace.records[n - 1].iterate;
    const auto wcga = select_atom_wcga(objective, state, dictionary, 1.0);
    if (!wcga) continue;
    const LineMinimum along = line_minimize(objective, state.iterate, dictionary.atom(wcga->atom.index), line_tol);
    DominanceStep step{n, *rec.line_value, along.value};
    if (step.egca_value > step.wcga_value) ++out.violations;
    out.steps.push_back(step);
  }
  return out;
}

}  // namespace greedy_opt
