#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "greedy_opt/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

using namespace greedy_opt;

namespace {

Point vec(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

std::vector<ProblemSpec> generator_family() {
  std::vector<ProblemSpec> specs;
  ProblemSpec id;
  id.dimension = 12;
  id.sparsity = 3;
  specs.push_back(id);
  ProblemSpec gq = id;
  gq.objective = ObjectiveKind::general_quadratic;
  gq.rsc_sparsity = 4;
  specs.push_back(gq);
  ProblemSpec lg = id;
  lg.objective = ObjectiveKind::regularized_logistic;
  specs.push_back(lg);
  ProblemSpec two = id;
  two.dimension = 8;
  two.dictionary = DictionaryKind::two_ortho_union;
  specs.push_back(two);
  ProblemSpec gd = id;
  gd.dictionary = DictionaryKind::gaussian_normalized;
  specs.push_back(gd);
  return specs;
}

}  // namespace

TEST_CASE("identity quadratic with an explicit three-coordinate target") {
  ProblemSpec spec;
  spec.dimension = 3;
  spec.planted = PlantedKind::explicit_values;
  spec.values = {3, 1, -2};
  const Problem p = make_problem(spec);
  CHECK(p.objective.value(Point::Zero(3)) == doctest::Approx(14.0));
  CHECK(p.objective.value(*p.f0) == 0.0);
  CHECK(*p.f0 == vec({3, 1, -2}));
  CHECK(*p.constants.gamma == 1.0);
  CHECK(*p.constants.beta == 1.0);
  CHECK(*p.constants.a0 == doctest::Approx(14.0));
  CHECK(*p.constants.K == 3);
  CHECK(*p.constants.epsilon == 0.0);
  CHECK(*p.constants.V == 1.0);
  CHECK(*p.constants.r == 0.5);
}

TEST_CASE("canonical dictionary atoms are the unit vectors") {
  const Dictionary d = canonical_dictionary(3);
  REQUIRE(d.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(d.atom(i) == Point::Unit(3, static_cast<Eigen::Index>(i)));
    CHECK(d.atom(i).norm() == 1.0);
  }
  CHECK(d.label(1) == "e1");
}

TEST_CASE("two-ortho union is two orthonormal bases") {
  const Dictionary d = two_ortho_union_dictionary(8);
  REQUIRE(d.size() == 16);
  const Matrix G = d.matrix().transpose() * d.matrix();
  CHECK((G.topLeftCorner(8, 8) - Matrix::Identity(8, 8)).norm() <= 1e-14);
  CHECK((G.bottomRightCorner(8, 8) - Matrix::Identity(8, 8)).norm() <= 1e-14);
  // Every identity/Hadamard pair has coherence 1/sqrt(d).
  CHECK(G.topRightCorner(8, 8).cwiseAbs().maxCoeff() == doctest::Approx(1.0 / std::sqrt(8.0)));
  CHECK(G.topRightCorner(8, 8).cwiseAbs().minCoeff() == doctest::Approx(1.0 / std::sqrt(8.0)));
  CHECK_THROWS(two_ortho_union_dictionary(6));
}

TEST_CASE("gaussian dictionaries are normalized and seeded") {
  const Dictionary a = gaussian_dictionary(5, 11, 3);
  const Dictionary b = gaussian_dictionary(5, 11, 3);
  CHECK(a.size() == 11);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.atom(i).norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(a.atom(i) == b.atom(i));
  }
}

TEST_CASE("logistic loss with zero data is the pure regularizer") {
  ProblemSpec spec;
  spec.objective = ObjectiveKind::regularized_logistic;
  spec.dimension = 4;
  spec.data = DataKind::zero;
  spec.delta = 0.1;
  spec.planted = PlantedKind::none;
  const Problem p = make_problem(spec);
  CHECK(p.f0->norm() == 0.0);
  // 2d rows, each contributing log(1 + e^0).
  CHECK(p.objective.value(*p.f0) == doctest::Approx(8.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(*p.constants.beta == doctest::Approx(0.1));
}

TEST_CASE("logistic minimizer is stationary") {
  ProblemSpec spec;
  spec.objective = ObjectiveKind::regularized_logistic;
  spec.dimension = 10;
  spec.sparsity = 3;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    spec.seed = seed;
    const Problem p = make_problem(spec);
    CHECK(p.objective.gradient(*p.f0).norm() <= 1e-10);
    CHECK(*p.constants.beta == spec.delta);
  }
}

TEST_CASE("eps approximants by truncation") {
  const EpsApproximant a = plant_eps_approximant(vec({3, 1, -2, 0.01}), 3, 0.02, NormSpec::l2());
  CHECK(a.point == vec({3, 1, -2, 0}));
  CHECK(a.distance == doctest::Approx(0.01));
  CHECK(a.support == std::vector<std::size_t>{0, 1, 2});

  const EpsApproximant exact = plant_eps_approximant(vec({0, 5, 0, -1}), 2, 0.0, NormSpec::l2());
  CHECK(exact.point == vec({0, 5, 0, -1}));
  CHECK(exact.distance == 0.0);

  try {
    plant_eps_approximant(vec({3, 1, -2, 0.5}), 2, 0.0, NormSpec::l2());
    FAIL("expected infeasible");
  } catch (const InfeasibleApproximant& e) {
    CHECK(e.minimal_eps() == doctest::Approx(std::sqrt(1.0 + 0.25)));
  }
  CHECK_THROWS(plant_eps_approximant(vec({1, 2}), 3, 1.0, NormSpec::l2()));
}

TEST_CASE("planted tail has the requested norm") {
  ProblemSpec spec;
  spec.dimension = 64;
  spec.sparsity = 5;
  spec.tail_norm = 0.01;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    spec.seed = seed;
    const Problem p = make_problem(spec);
    CHECK(*p.constants.epsilon == doctest::Approx(0.01).epsilon(1e-12));
    CHECK((*p.f0 - *p.f_eps_point).norm() == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(p.f_eps->sparsity() == 5);
  }
}

TEST_CASE("power-law targets have unit l1 coefficient mass") {
  ProblemSpec spec;
  spec.dimension = 256;
  spec.planted = PlantedKind::power_law;
  const Problem p = make_problem(spec);
  CHECK(p.f0->lpNorm<1>() == doctest::Approx(1.0).epsilon(1e-12));
  // |c_2| / |c_1| = 2^{-2}.
  std::vector<double> mags(p.f0->data(), p.f0->data() + p.f0->size());
  for (double& m : mags) m = std::abs(m);
  std::sort(mags.rbegin(), mags.rend());
  CHECK(mags[1] / mags[0] == doctest::Approx(0.25));
}

TEST_CASE("every generated objective passes the convexity and gradient spot checks") {
  for (const ProblemSpec& spec : generator_family()) {
    const Problem p = make_problem(spec);
    LevelSetSampler sampler(p.objective, 21);
    const std::vector<Point> probes = sampler.draw(120);
    const ObjectiveCheck c = check_objective(p.objective, probes);
    INFO(to_string(spec.objective) << " / " << to_string(spec.dictionary));
    CHECK(c.gradient_probes >= 100);
    CHECK(c.passed());
  }
}

TEST_CASE("declared smoothness agrees with the sampled modulus") {
  for (const ProblemSpec& spec : generator_family()) {
    const Problem p = make_problem(spec);
    const SmoothnessFit fit =
        estimate_smoothness(p.objective, spec.norm, {1e-3, 1e-2, 1e-1, 0.5, 1.0}, 1000, 13);
    const double gamma = *p.constants.gamma;
    INFO(to_string(spec.objective) << " fitted " << fit.fitted_gamma << " declared " << gamma);
    for (const auto& s : fit.samples) CHECK(s.rho <= gamma * s.u * s.u * (1.0 + 1e-6));
    CHECK(fit.fitted_gamma <= gamma * (1.0 + 1e-6));
    CHECK(fit.fitted_gamma >= 0.8 * gamma);
  }
}

TEST_CASE("general quadratic beta matches the restricted Gram minimum") {
  ProblemSpec spec;
  spec.objective = ObjectiveKind::general_quadratic;
  spec.dimension = 10;
  spec.sparsity = 2;
  spec.rsc_sparsity = 3;
  spec.rows = 14;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    spec.seed = seed;
    const Problem p = make_problem(spec);
    // Hessian is 2 A'A = 2 Q, so E(f) - E(f0) = (f - f0)' Q (f - f0).
    const Matrix& Q = p.objective.quadratic_form()->Q;
    const auto& T = p.f_eps->support;
    double oracle = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < 10; ++a) {
      for (std::size_t b = a + 1; b < 10; ++b) {
        for (std::size_t c = b + 1; c < 10; ++c) {
          std::vector<std::size_t> cols{a, b, c};
          for (std::size_t t : T) {
            if (std::find(cols.begin(), cols.end(), t) == cols.end()) cols.push_back(t);
          }
          Matrix sub(static_cast<Eigen::Index>(cols.size()), static_cast<Eigen::Index>(cols.size()));
          for (std::size_t i = 0; i < cols.size(); ++i) {
            for (std::size_t j = 0; j < cols.size(); ++j) {
              sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                  Q(static_cast<Eigen::Index>(cols[i]), static_cast<Eigen::Index>(cols[j]));
            }
          }
          oracle = std::min(oracle, Eigen::SelfAdjointEigenSolver<Matrix>(sub).eigenvalues().minCoeff());
        }
      }
    }
    CHECK(*p.constants.beta == doctest::Approx(oracle).epsilon(1e-10));
    CHECK(p.constants.beta_gamma_consistent());
  }
}

TEST_CASE("generators are seed deterministic") {
  for (ProblemSpec spec : generator_family()) {
    spec.seed = 77;
    const Problem a = make_problem(spec);
    const Problem b = make_problem(spec);
    CHECK(*a.f0 == *b.f0);
    CHECK(a.dictionary.matrix() == b.dictionary.matrix());
    const Point x = Point::Ones(static_cast<Eigen::Index>(spec.dimension));
    CHECK(a.objective.value(x) == b.objective.value(x));
    spec.seed = 78;
    CHECK(*make_problem(spec).f0 != *a.f0);
  }
}

TEST_CASE("non-Euclidean norms scale the analytic constants") {
  ProblemSpec spec;
  spec.dimension = 16;
  spec.sparsity = 2;
  spec.norm = NormSpec::l1();
  const Problem l1 = make_problem(spec);
  // ||x||_2 <= ||x||_1 leaves gamma; beta shrinks by 1/d.
  CHECK(*l1.constants.gamma == 1.0);
  CHECK(*l1.constants.beta == doctest::Approx(1.0 / 16.0));
  CHECK_FALSE(l1.constants.V);
  spec.norm = NormSpec::infinity();
  const Problem linf = make_problem(spec);
  CHECK(*linf.constants.gamma == doctest::Approx(16.0));
  CHECK(*linf.constants.beta == 1.0);
}

TEST_CASE("problem spec validation") {
  ProblemSpec spec;
  spec.dimension = 4;
  spec.sparsity = 5;
  CHECK_THROWS(make_problem(spec));
  spec = ProblemSpec{};
  spec.planted = PlantedKind::explicit_values;
  spec.values = {1.0};
  CHECK_THROWS(make_problem(spec));
  spec = ProblemSpec{};
  spec.objective = ObjectiveKind::regularized_logistic;
  spec.delta = 0.0;
  CHECK_THROWS(make_problem(spec));
  CHECK(parse_planted_kind("explicit") == PlantedKind::explicit_values);
  CHECK_THROWS(parse_dictionary_kind("wavelet"));
}
