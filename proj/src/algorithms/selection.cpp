#include "greedy_opt/algorithms.hpp"

namespace greedy_opt {

std::string to_string(Variant v) { return v == Variant::wcga ? "wcga" : "egca"; }

Variant parse_variant(const std::string& text) {
  if (text == "wcga") return Variant::wcga;
  if (text == "egca") return Variant::egca;
  throw InvalidArgument("unknown variant '" + text + "' (expected wcga or egca)");
}

std::string to_string(SelectionMode mode) { return mode == SelectionMode::argmax ? "argmax" : "adversarial"; }

SelectionMode parse_selection_mode(const std::string& text) {
  if (text == "argmax") return SelectionMode::argmax;
  if (text == "adversarial") return SelectionMode::adversarial;
  throw InvalidArgument("unknown selection mode '" + text + "' (expected argmax or adversarial)");
}

Eigen::VectorXd atom_pairings(const Objective& objective, const Point& at, const Dictionary& dictionary) {
  if (dictionary.dimension() != objective.dimension()) {
    throw DimensionMismatch(objective.dimension(), dictionary.dimension(), "dictionary vs objective");
  }
  const Point g = objective.gradient(at);
  require_finite(g, "gradient oracle");
  return -(dictionary.matrix().transpose() * g);
}

std::optional<WcgaSelection> select_atom_wcga(const Objective& objective, const GreedyState& state,
                                              const Dictionary& dictionary, double t, SelectionMode mode,
                                              double stationarity_tol) {
  if (!(t > 0.0 && t <= 1.0)) throw InvalidArgument("weakness parameter must lie in (0, 1]");
  const Eigen::VectorXd p = atom_pairings(objective, state.iterate, dictionary);

  // Signed candidates are visited as (i, +), (i, -) in index order, so a strict
  // comparison keeps the lowest index and the positive sign on ties.
  double sup = 0.0;
  SignedAtom best{0, 1};
  for (std::size_t i = 0; i < dictionary.size(); ++i) {
    for (int sign : {1, -1}) {
      const double v = sign * p[static_cast<Eigen::Index>(i)];
      if (v > sup) {
        sup = v;
        best = {i, sign};
      }
    }
  }
  if (sup <= stationarity_tol) return std::nullopt;

  WcgaSelection out{best, sup, sup};
  if (mode == SelectionMode::adversarial) {
    const double threshold = t * sup;
    for (std::size_t i = 0; i < dictionary.size(); ++i) {
      for (int sign : {1, -1}) {
        const double v = sign * p[static_cast<Eigen::Index>(i)];
        if (v >= threshold && v < out.pairing) {
          out.pairing = v;
          out.atom = {i, sign};
        }
      }
    }
  }
  return out;
}

EgcaSelection select_atom_egca(const Objective& objective, const GreedyState& state, const Dictionary& dictionary,
                               double line_tol) {
  if (dictionary.dimension() != objective.dimension()) {
    throw DimensionMismatch(objective.dimension(), dictionary.dimension(), "dictionary vs objective");
  }
  EgcaSelection best;
  bool have = false;
  for (std::size_t i = 0; i < dictionary.size(); ++i) {
    const LineMinimum lm = line_minimize(objective, state.iterate, dictionary.atom(i), line_tol);
    if (!have || lm.value < best.value) {
      have = true;
      best.atom = {i, lm.c < 0.0 ? -1 : 1};
      best.c = std::abs(lm.c);
      best.value = lm.value;
    }
  }
  return best;
}

}  // namespace greedy_opt
