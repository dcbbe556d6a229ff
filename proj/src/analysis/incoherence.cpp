#include "greedy_opt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace greedy_opt {

std::string to_string(IncoherenceMode mode) { return mode == IncoherenceMode::exact ? "exact" : "monte_carlo"; }

IncoherenceMode parse_incoherence_mode(const std::string& text) {
  if (text == "exact") return IncoherenceMode::exact;
  if (text == "monte_carlo") return IncoherenceMode::monte_carlo;
  throw InvalidArgument("unknown incoherence mode '" + text + "' (expected exact or monte_carlo)");
}

namespace {

constexpr std::size_t kMaxExactS = 12;
constexpr double kSingularRcond = 1e-12;

// Depth-first walk over A subset of {0..k-1}, |A| <= K, with signs fixed to +
// on the first element of A. `quad` carries s' M_AA s for the current path.
struct SignPatternSearch {
  const Matrix& inv_gram;
  std::size_t K;
  const std::vector<double>& size_power;  // |A|^r indexed by |A|
  double best = 0.0;
  std::vector<std::size_t> best_A;
  std::vector<std::size_t> path;
  std::vector<int> signs;

  void run() { descend(0, 0.0); }

  void descend(std::size_t start, double quad) {
    for (std::size_t j = start; j < static_cast<std::size_t>(inv_gram.rows()); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      double cross = 0.0;
      for (std::size_t a = 0; a < path.size(); ++a) cross += signs[a] * inv_gram(static_cast<Eigen::Index>(path[a]), jj);
      for (int s : {1, -1}) {
        if (path.empty() && s < 0) continue;
        const double q = quad + inv_gram(jj, jj) + 2.0 * s * cross;
        path.push_back(j);
        signs.push_back(s);
        const double value = std::sqrt(std::max(0.0, q)) / size_power[path.size()];
        if (value > best) {
          best = value;
          best_A = path;
        }
        if (path.size() < K) descend(j + 1, q);
        path.pop_back();
        signs.pop_back();
      }
    }
  }
};

// Advances a sorted combination of size k over {0..n-1}; false when exhausted.
bool next_combination(std::vector<std::size_t>& comb, std::size_t n) {
  const std::size_t k = comb.size();
  for (std::size_t i = k; i-- > 0;) {
    if (comb[i] < n - k + i) {
      ++comb[i];
      for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

IncoherenceProfile incoherence_constant(const Dictionary& dictionary, std::size_t K, std::size_t S, double r,
                                        IncoherenceMode mode, std::uint64_t budget, std::uint64_t seed) {
  const std::size_t n = dictionary.size();
  if (K == 0) throw InvalidArgument("incoherence_constant: K must be at least 1");
  if (K > S || S > n) throw InvalidArgument("incoherence_constant: need K <= S <= dictionary size");
  if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument("incoherence_constant: r must lie in [0, 1]");

  IncoherenceProfile out;
  out.r = r;
  out.K = K;
  out.S = S;
  const Matrix gram = dictionary.matrix().transpose() * dictionary.matrix();

  if (mode == IncoherenceMode::exact) {
    if (!dictionary.norm().is_l2()) throw InvalidArgument("incoherence_constant: exact mode needs an ell_2 dictionary");
    if (S > kMaxExactS) throw InvalidArgument("incoherence_constant: exact mode is limited to S <= 12");
    out.certified_exact = true;
    // Enlarging B can only increase the inner supremum, so |B| = S suffices.
    std::vector<std::size_t> B(S);
    std::iota(B.begin(), B.end(), 0);
    Matrix gb(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S));
    const Matrix identity = Matrix::Identity(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S));
    Matrix inv(identity.rows(), identity.cols());
    Eigen::LLT<Matrix> llt(static_cast<Eigen::Index>(S));
    std::vector<double> size_power(K + 1, 1.0);
    for (std::size_t k = 1; k <= K; ++k) size_power[k] = std::pow(static_cast<double>(k), r);
    do {
      ++out.subsets_examined;
      for (std::size_t i = 0; i < S; ++i) {
        for (std::size_t j = 0; j < S; ++j) {
          gb(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              gram(static_cast<Eigen::Index>(B[i]), static_cast<Eigen::Index>(B[j]));
        }
      }
      llt.compute(gb);
      if (llt.info() != Eigen::Success || llt.rcond() < kSingularRcond) {
        out.V = std::numeric_limits<double>::infinity();
        out.witness_B = B;
        out.witness_A.clear();
        return out;
      }
      inv = identity;
      llt.solveInPlace(inv);
      SignPatternSearch search{inv, K, size_power};
      search.run();
      if (search.best > out.V) {
        out.V = search.best;
        out.witness_B = B;
        out.witness_A.clear();
        for (std::size_t a : search.best_A) out.witness_A.push_back(B[a]);
      }
    } while (next_combination(B, n));
    return out;
  }

  // Monte Carlo lower bound.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> a_size(1, K);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::size_t> idx(n);
  const NormSpec norm = dictionary.norm();
  for (std::uint64_t draw = 0; draw < budget; ++draw) {
    ++out.subsets_examined;
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t k = 0; k < S; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, n - 1);
      std::swap(idx[k], idx[pick(rng)]);
    }
    // B = idx[0..S), A = its first |A| entries after a shuffle.
    std::vector<std::size_t> B(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(S));
    std::shuffle(B.begin(), B.end(), rng);
    const std::size_t na = a_size(rng);

    std::vector<SignedAtom> cols;
    for (std::size_t i : B) cols.push_back({i, 1});
    const Matrix phi = dictionary.columns(cols);
    Eigen::VectorXd c(static_cast<Eigen::Index>(S));
    if (norm.is_l2() && coin(rng)) {
      // Maximizer direction G_B^{-1} s for a random sign pattern s on A.
      Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S));
      for (std::size_t a = 0; a < na; ++a) s[static_cast<Eigen::Index>(a)] = coin(rng) ? 1.0 : -1.0;
      const Eigen::LLT<Matrix> llt(phi.transpose() * phi);
      if (llt.info() != Eigen::Success) continue;
      c = llt.solve(s);
    } else {
      for (Eigen::Index k = 0; k < c.size(); ++k) c[k] = normal(rng);
    }
    const double denom = norm_of(phi * c, norm);
    const double numer = c.head(static_cast<Eigen::Index>(na)).cwiseAbs().sum();
    if (!(denom > 0.0)) {
      if (numer > 0.0) {
        out.V = std::numeric_limits<double>::infinity();
        out.witness_B = B;
        out.witness_A.assign(B.begin(), B.begin() + static_cast<std::ptrdiff_t>(na));
        return out;
      }
      continue;
    }
    const double value = numer / (std::pow(static_cast<double>(na), r) * denom);
    if (value > out.V) {
      out.V = value;
      out.witness_B = B;
      out.witness_A.assign(B.begin(), B.begin() + static_cast<std::ptrdiff_t>(na));
    }
  }
  return out;
}

}  // namespace greedy_opt
