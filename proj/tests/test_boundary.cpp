#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "urlab/boundary.hpp"

using namespace urlab;

namespace {
Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}
}  // namespace

TEST_CASE("plane generator: count, weights, oracle") {
  const BoundarySample s = make_plane({8.0, 0.01, 1, 2});
  CHECK(s.count() == 1601);
  CHECK(s.weights.minCoeff() == doctest::Approx(0.01));
  CHECK(s.weights.maxCoeff() == doctest::Approx(0.01));
  CHECK(dist_to_boundary(s, vec2(3.0, 0.7)) == doctest::Approx(0.7));
  CHECK(s.ahlfors_constant > 0);
}

TEST_CASE("four-corner Cantor: self-similar measure") {
  const BoundarySample s = make_four_corner_cantor({5});
  CHECK(s.count() == 1024);
  CHECK(s.weights.minCoeff() == doctest::Approx(std::pow(4.0, -5)));
  CHECK(s.total_mass() == doctest::Approx(1.0));
  CHECK(s.d == 1.0);
  // atoms live in the unit square, one per generation-5 square
  CHECK(s.points.minCoeff() >= 0.0);
  CHECK(s.points.maxCoeff() <= 1.0);
}

TEST_CASE("circle generator: circumference and oracle") {
  const BoundarySample s = make_circle({1.0, 628});
  CHECK(s.total_mass() == doctest::Approx(2.0 * kPi).epsilon(1e-3));
  CHECK(dist_to_boundary(s, vec2(2.0, 0.0)) == doctest::Approx(1.0));
}

TEST_CASE("sampled-line distance is an over-estimate by at most half a spacing") {
  BoundarySample s = make_plane({8.0, 0.01, 1, 2});
  const Vector X = vec2(0.005, 1.0);
  const double d = sample_distance(s, X);  // atom path, no oracle
  CHECK(d >= 1.0);
  CHECK(d <= 1.0000125 + 1e-12);
}

TEST_CASE("oracle and atom distances agree within half a spacing") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  const BoundarySample line = make_plane({8.0, 0.01, 1, 2});
  const BoundarySample circ = make_circle({1.0, 1257});
  for (int t = 0; t < 1000; ++t) {
    Vector X = vec2(u(rng), u(rng));
    if (std::abs(X[1]) < 0.02) X[1] += 0.05;
    CHECK(std::abs(sample_distance(line, X) - line.oracle(X)) <= 0.5 * line.spacing + 1e-12);
    if (std::abs(X.norm() - 1.0) > 0.02)
      CHECK(std::abs(sample_distance(circ, X) - circ.oracle(X)) <= 0.5 * circ.spacing + 1e-12);
  }
}

TEST_CASE("verify_ahlfors: line ratios bracket the interval measure") {
  const BoundarySample s = make_plane({8.0, 0.01, 1, 2});
  const AhlforsReport rep = verify_ahlfors(s, 200);
  CHECK(rep.min_ratio >= 1.9);
  CHECK(rep.max_ratio <= 2.1);
  CHECK(rep.regularity_ok);
}

TEST_CASE("verify_ahlfors: Cantor constant stays below 8 at quarter scales") {
  const BoundarySample s = make_four_corner_cantor({6});
  // brute-force sums of the self-similar weights at dyadic-quarter scales
  double worst_lo = 1e300, worst_hi = 0;
  for (int j = 1; j <= 5; ++j) {
    const double r = std::pow(0.25, j);
    for (int i = 0; i < s.count(); i += 37) {
      const Vector x = s.points.row(i).transpose();
      double mass = 0;
      for (int k = 0; k < s.count(); ++k)
        if ((s.points.row(k).transpose() - x).norm() <= r) mass += s.weights[k];
      const double ratio = mass / r;
      worst_lo = std::min(worst_lo, ratio);
      worst_hi = std::max(worst_hi, ratio);
    }
  }
  CHECK(worst_hi <= 8.0);
  CHECK(worst_lo >= 1.0 / 8.0);
}

TEST_CASE("verify_ahlfors flags a mis-declared dimension") {
  // ratio scales like 1/r under d = 2, so a fine sample pushes it past 1e3
  const BoundarySample s = make_plane({1.0, 5e-5, 1, 2});
  const AhlforsReport rep = verify_ahlfors(s, 200, 1234, /*declared_d=*/2.0);
  CHECK_FALSE(rep.regularity_ok);
}

TEST_CASE("boundary text round-trip") {
  const BoundarySample s = make_four_corner_cantor({3});
  const std::string path = "/tmp/urlab_boundary_rt.txt";
  write_boundary(s, path);
  const BoundarySample r = read_boundary(path);
  REQUIRE(r.count() == s.count());
  CHECK((r.points - s.points).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.weights - s.weights).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.n == s.n);
  CHECK(r.d == doctest::Approx(s.d));
  std::remove(path.c_str());
}

TEST_CASE("generator parameter errors") {
  CHECK_THROWS_AS(make_four_corner_cantor({0}), ParameterError);
  CHECK_THROWS_AS(make_plane({8.0, -0.01, 1, 2}), ParameterError);
  CHECK_THROWS_AS(make_plane({8.0, 0.01, 2, 2}), DimensionError);
  CHECK_THROWS_AS(make_circle({1.0, 2}), ParameterError);
}
