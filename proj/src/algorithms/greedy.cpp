#include "greedy_opt/algorithms.hpp"

#include <cmath>

namespace greedy_opt {

void SolverConfig::validate() const {
  if (!(orth_tol > 0.0)) throw InvalidArgument("solver.orth_tol must be positive");
  if (!(line_tol > 0.0)) throw InvalidArgument("solver.line_tol must be positive");
  if (span_max_inner == 0) throw InvalidArgument("solver.span_max_inner must be positive");
  if (stop_gap && !(*stop_gap > 0.0)) throw InvalidArgument("solver.stop_gap must be positive");
}

GreedyState GreedyState::initial(const Objective& objective) {
  GreedyState s;
  s.iterate = Point::Zero(static_cast<Eigen::Index>(objective.dimension()));
  s.energy = objective.value(s.iterate);
  return s;
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::stationary: return "stationary";
    case StopReason::stop_gap: return "stop_gap";
    case StopReason::rank_deficient: return "rank_deficient";
  }
  return "unknown";
}

std::vector<double> GreedyTrace::gaps() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.gap.value_or(std::nan("")));
  return out;
}

GreedyTrace run_greedy(Variant variant, const Objective& objective, const Dictionary& dictionary,
                       const SolverConfig& config, const std::optional<Point>& reference) {
  config.validate();
  if (dictionary.dimension() != objective.dimension()) {
    throw DimensionMismatch(objective.dimension(), dictionary.dimension(), "run_greedy dictionary");
  }

  GreedyTrace trace;
  trace.variant = variant;
  if (reference) {
    if (static_cast<std::size_t>(reference->size()) != objective.dimension()) {
      throw DimensionMismatch(objective.dimension(), reference->size(), "run_greedy reference");
    }
    trace.reference_energy = objective.value(*reference);
  }
  const auto gap_of = [&](double energy) -> std::optional<double> {
    if (!trace.reference_energy) return std::nullopt;
    return energy - *trace.reference_energy;
  };
  const auto reached_stop_gap = [&](const std::optional<double>& gap) {
    return config.stop_gap && gap && *gap <= *config.stop_gap;
  };

  GreedyState state = GreedyState::initial(objective);
  {
    IterateRecord r0;
    r0.energy = state.energy;
    r0.gap = gap_of(state.energy);
    r0.iterate = state.iterate;
    trace.records.push_back(std::move(r0));
  }
  trace.stop = StopReason::max_iterations;
  if (reached_stop_gap(trace.records.front().gap)) {
    trace.stop = StopReason::stop_gap;
    trace.final_state = state;
    return trace;
  }

  for (std::size_t m = 1; m <= config.max_iterations; ++m) {
    try {
      const Eigen::VectorXd pairings = atom_pairings(objective, state.iterate, dictionary);
      const double sup = pairings.cwiseAbs().maxCoeff();
      if (!(sup > config.orth_tol)) {
        trace.stop = StopReason::stationary;
        break;
      }

      IterateRecord rec;
      rec.m = m;
      rec.sup_pairing = sup;
      SignedAtom chosen;
      double extra_coefficient = 0.0;
      if (variant == Variant::wcga) {
        const double t = config.weakness.at(m);
        const auto sel = select_atom_wcga(objective, state, dictionary, t, config.selection, config.orth_tol);
        if (!sel) {
          trace.stop = StopReason::stationary;
          break;
        }
        chosen = sel->atom;
        rec.pairing = sel->pairing;
        rec.weakness = t;
      } else {
        const EgcaSelection sel = select_atom_egca(objective, state, dictionary, config.line_tol);
        chosen = sel.atom;
        extra_coefficient = sel.c;
        rec.line_value = sel.value;
        rec.pairing = chosen.sign * pairings[static_cast<Eigen::Index>(chosen.index)];
      }

      const Matrix previous = dictionary.columns(state.selected);
      if (in_span(previous, dictionary.atom(chosen.index))) {
        trace.stop = StopReason::rank_deficient;
        break;
      }

      std::vector<SignedAtom> selected = state.selected;
      selected.push_back(chosen);
      std::vector<double> warm = state.coefficients;
      warm.push_back(extra_coefficient);
      const Matrix atoms = dictionary.columns(selected);
      SpanFit fit = minimize_over_span(objective, atoms, warm, config.orth_tol, config.span_max_inner);

      state.selected = std::move(selected);
      state.coefficients = std::move(fit.coefficients);
      state.iterate = std::move(fit.iterate);
      state.energy = fit.energy;
      state.m = m;

      rec.atom = chosen;
      rec.energy = state.energy;
      rec.gap = gap_of(state.energy);
      rec.orth_residual = fit.residual;
      rec.inner_iterations = fit.inner_iterations;
      rec.iterate = state.iterate;
      trace.records.push_back(std::move(rec));

      if (reached_stop_gap(trace.records.back().gap)) {
        trace.stop = StopReason::stop_gap;
        break;
      }
    } catch (const IterationError&) {
      throw;
    } catch (const Error& e) {
      trace.final_state = state;
      throw IterationError(m, e.what(), std::make_shared<const GreedyTrace>(trace));
    }
  }
  trace.final_state = state;
  return trace;
}

}  // namespace greedy_opt
