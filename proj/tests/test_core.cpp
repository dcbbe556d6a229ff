#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "greedy_opt/core.hpp"
#include "greedy_opt/io.hpp"

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

// ||x - b||^2 written out by hand, independent of QuadraticForm.
Objective shifted_square(const Point& b) {
  return Objective([b](const Point& x) { return (x - b).squaredNorm(); },
                   [b](const Point& x) { return Point(2.0 * (x - b)); }, static_cast<std::size_t>(b.size()),
                   "||x - b||^2");
}

}  // namespace

TEST_CASE("dual pairing is the coordinate dot product") {
  CHECK(dual_pairing(vec({1, 2}), vec({0, -1})) == -2.0);
  CHECK(dual_pairing(vec({6, 2, -4}), vec({1, 0, 0})) == 6.0);
  CHECK(dual_pairing(Point::Zero(3), vec({0.3, -0.2, 0.9})) == 0.0);
  CHECK_THROWS_AS(dual_pairing(vec({1, 2}), vec({1, 2, 3})), DimensionMismatch);
}

TEST_CASE("dual pairing flips sign exactly under atom negation") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Point F(17), g(17);
    for (Eigen::Index i = 0; i < 17; ++i) {
      F[i] = normal(rng) * 1e3;
      g[i] = normal(rng);
    }
    CHECK(dual_pairing(F, g) + dual_pairing(F, Point(-g)) == 0.0);
  }
}

TEST_CASE("lp norms") {
  CHECK(norm_of(vec({3, 4}), NormSpec::l2()) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(norm_of(vec({1, -1, 1}), NormSpec::l1()) == 3.0);
  CHECK(norm_of(vec({2, -7}), NormSpec::infinity()) == 7.0);
  // (1, 1) in l3 is 2^{1/3}.
  CHECK(norm_of(vec({1, 1}), NormSpec{3.0}) == doctest::Approx(std::cbrt(2.0)).epsilon(1e-14));
  CHECK_THROWS(NormSpec{0.5}.validate());
  CHECK(NormSpec::parse("inf").is_infinity());
  CHECK(NormSpec::parse("1.5").p == 1.5);
}

TEST_CASE("random unit directions have unit norm") {
  std::mt19937_64 rng(11);
  for (double p : {1.0, 1.5, 2.0, 4.0}) {
    for (int i = 0; i < 20; ++i) CHECK(norm_of(random_unit_direction(9, NormSpec{p}, rng), NormSpec{p}) == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (int i = 0; i < 20; ++i) {
    CHECK(norm_of(random_unit_direction(9, NormSpec::infinity(), rng), NormSpec::infinity()) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("dictionary atoms are unit bounded under their own norm") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (NormSpec norm : {NormSpec::l1(), NormSpec{1.5}, NormSpec::l2(), NormSpec{3.0}, NormSpec::infinity()}) {
    std::vector<Point> atoms;
    for (int i = 0; i < 30; ++i) {
      Point a(12);
      for (Eigen::Index k = 0; k < 12; ++k) a[k] = normal(rng) * 10.0;
      atoms.push_back(a);
    }
    const Dictionary dict(atoms, norm, true);
    for (std::size_t i = 0; i < dict.size(); ++i) CHECK(norm_of(dict.atom(i), norm) <= 1.0 + 1e-12);
  }
  CHECK_THROWS_AS(Dictionary({vec({1.1, 0.0})}, NormSpec::l2()), InvalidArgument);
  CHECK_THROWS_AS(Dictionary({Point::Zero(2)}, NormSpec::l2(), true), InvalidArgument);
  CHECK_THROWS(Dictionary({}, NormSpec::l2()));
  CHECK_THROWS(Dictionary({vec({1, 0}), vec({0, 0, 1})}, NormSpec::l2()));
}

TEST_CASE("signed atoms and column extraction") {
  const Dictionary dict({vec({1, 0, 0}), vec({0, 0.6, 0.8})}, NormSpec::l2());
  CHECK(dict.signed_atom({1, -1}) == vec({0, -0.6, -0.8}));
  const std::vector<SignedAtom> picks{{1, 1}, {0, -1}};
  const Matrix cols = dict.columns(picks);
  CHECK(cols.col(0) == vec({0, 0.6, 0.8}));
  CHECK(cols.col(1) == vec({-1, 0, 0}));
}

TEST_CASE("sparse elements") {
  const Dictionary dict({vec({1, 0, 0}), vec({0, 1, 0}), vec({0, 0, 1})}, NormSpec::l2());
  const SparseElement e{{0, 2}, {3.0, -2.0}};
  CHECK(e.synthesize(dict) == vec({3, 0, -2}));
  CHECK(e.l1_norm_excluding() == 5.0);
  const std::vector<std::size_t> drop{2};
  CHECK(e.l1_norm_excluding(drop) == 3.0);
}

TEST_CASE("weakness sequences") {
  CHECK(WeaknessSequence::constant(0.5).at(7) == 0.5);
  const auto list = WeaknessSequence::explicit_list({1.0, 0.7, 0.3});
  CHECK(list.at(1) == 1.0);
  CHECK(list.at(3) == 0.3);
  CHECK(list.at(10) == 0.3);
  CHECK_FALSE(list.is_constant());
  CHECK_THROWS(WeaknessSequence::constant(0.0));
  CHECK_THROWS(WeaknessSequence::constant(1.5));
  CHECK_THROWS(WeaknessSequence::explicit_list({0.5, -0.1}));
  CHECK_THROWS(WeaknessSequence::constant(1.0).at(0));
}

TEST_CASE("quadratic objective matches its hand-written oracle") {
  const Point b = vec({3, 1, -2});
  const Objective q = Objective::quadratic({Matrix::Identity(3, 3), -2.0 * b, b.squaredNorm()}, "quad");
  const Objective ref = shifted_square(b);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Point x = vec({normal(rng), normal(rng), normal(rng)});
    CHECK(q.value(x) == doctest::Approx(ref.value(x)).epsilon(1e-13));
    CHECK((q.gradient(x) - ref.gradient(x)).norm() <= 1e-13);
  }
  CHECK(q.value(Point::Zero(3)) == doctest::Approx(14.0));
  CHECK_THROWS_AS(q.value(Point::Zero(2)), DimensionMismatch);
}

TEST_CASE("declared smoothness must be admissible") {
  Objective obj = shifted_square(vec({1, 2}));
  CHECK_THROWS(obj.declare_smoothness({0.0, 2.0}));
  CHECK_THROWS(obj.declare_smoothness({1.0, 2.5}));
  CHECK_THROWS(obj.declare_smoothness({1.0, 1.0}));
  obj.declare_smoothness({1.0, 2.0});
  REQUIRE(obj.smoothness());
  CHECK(obj.smoothness()->gamma == 1.0);
}

TEST_CASE("objective spot checks accept convex oracles and reject broken ones") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Point> probes;
  for (int i = 0; i < 100; ++i) probes.push_back(vec({normal(rng), normal(rng), normal(rng), normal(rng)}));
  const Point b = vec({1, -1, 2, 0.5});

  CHECK(check_objective(shifted_square(b), probes).passed());

  const Objective concave([](const Point& x) { return -x.squaredNorm(); },
                          [](const Point& x) { return Point(-2.0 * x); }, 4, "concave");
  const ObjectiveCheck c = check_objective(concave, probes);
  CHECK(c.convexity_violations > 0);
  CHECK(c.gradient_violations == 0);

  const Objective wrong_gradient([b](const Point& x) { return (x - b).squaredNorm(); },
                                 [b](const Point& x) { return Point(x - b); }, 4, "half gradient");
  const ObjectiveCheck w = check_objective(wrong_gradient, probes);
  CHECK(w.gradient_violations == w.gradient_probes);
  CHECK(w.convexity_violations == 0);
}

TEST_CASE("level set sampler stays inside the level set") {
  const Point b = vec({3, 1, -2, 0.5, 0});
  const Objective obj = shifted_square(b);
  LevelSetSampler sampler(obj, 17);
  CHECK(sampler.level() == doctest::Approx(b.squaredNorm()));
  for (const Point& x : sampler.draw(500)) CHECK(obj.value(x) <= sampler.level() * (1.0 + 1e-12));
  // Ray from the center of the ball along e1 leaves it at distance ||b||.
  CHECK(sampler.ray_crossing(b, Point::Unit(5, 0)) == doctest::Approx(b.norm()).epsilon(1e-10));
}

TEST_CASE("level set sampler is seed deterministic") {
  const Objective obj = shifted_square(vec({1, 2, 3}));
  LevelSetSampler a(obj, 4);
  LevelSetSampler b(obj, 4);
  for (int i = 0; i < 20; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("plain-text matrix format round-trips exactly") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Point> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(vec({normal(rng), normal(rng) * 1e-300, normal(rng) * 1e300}));
  const auto back = parse_points(format_points(pts));
  REQUIRE(back.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(back[i] == pts[i]);

  const auto parsed = parse_points("# comment\n1 2 3\n\n4 5 6\n");
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[1] == vec({4, 5, 6}));
  CHECK_THROWS_WITH(parse_points("1 2 3\n4 5\n"), doctest::Contains("line 2"));
  CHECK_THROWS_WITH(parse_points("1 x 3\n"), doctest::Contains("line 1"));
}

TEST_CASE("dictionary files round-trip") {
  const auto path = std::filesystem::temp_directory_path() / "greedy_opt_test_dictionary.txt";
  const Dictionary dict({vec({1, 0}), vec({0.6, 0.8})}, NormSpec::l2());
  write_dictionary(path, dict);
  const Dictionary back = read_dictionary(path, NormSpec::l2());
  REQUIRE(back.size() == 2);
  CHECK(back.atom(1) == dict.atom(1));
  std::filesystem::remove(path);
  CHECK_THROWS(read_points(path));
}

TEST_CASE("non-finite coordinates are rejected") {
  CHECK_THROWS_AS(require_finite(vec({1, std::nan("")}), "x"), InvalidArgument);
  CHECK_THROWS_AS(require_finite(vec({std::numeric_limits<double>::infinity()}), "x"), InvalidArgument);
  CHECK_NOTHROW(require_finite(vec({1, 2}), "x"));
}
