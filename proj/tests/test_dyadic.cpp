#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "urlab/dyadic.hpp"
#include "urlab/whitney.hpp"

using namespace urlab;

namespace {

Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

void check_partition(const ChristForest& forest) {
  const int count = forest.sample->count();
  for (int k = forest.k_min; k <= forest.k_max; ++k) {
    std::vector<int> seen(count, 0);
    for (int id : forest.generation(k))
      for (int i : forest.cubes[id].members) seen[i] += 1;
    for (int i = 0; i < count; ++i) CHECK(seen[i] == 1);  // disjoint cover, exactly
  }
  for (const ChristCube& q : forest.cubes) {
    if (q.children.empty()) continue;
    std::vector<int> merged;
    for (int c : q.children)
      merged.insert(merged.end(), forest.cubes[c].members.begin(),
                    forest.cubes[c].members.end());
    std::sort(merged.begin(), merged.end());
    CHECK(merged == q.members);  // children partition the parent, set equality
  }
}

}  // namespace

TEST_CASE("christ cubes on a uniformly sampled line") {
  const BoundarySample line = make_plane({2.0, 0.01, 1, 2});
  const ChristForest forest = build_christ_cubes(line, -2, 4);
  check_partition(forest);
  CHECK(forest.a0 >= 0.25);
  // generation-k cubes are near-dyadic intervals
  for (int id : forest.generation(3)) {
    const ChristCube& q = forest.cubes[id];
    double lo = 1e300, hi = -1e300;
    for (int i : q.members) {
      lo = std::min(lo, line.points(i, 0));
      hi = std::max(hi, line.points(i, 0));
    }
    CHECK(hi - lo <= 2.0 * q.scale());
    // members are contiguous on the line
    CHECK(q.sigma_mass == doctest::Approx((hi - lo) + 0.01));
  }
}

TEST_CASE("christ cubes on a single atom") {
  BoundarySample s = make_plane({2.0, 0.01, 1, 2});
  s.points = Matrix::Zero(1, 2);
  s.weights = Vector::Ones(1);
  s.tail.reset();
  s.oracle = nullptr;
  s.diam = 0;
  finalize_sample(s, false);
  const ChristForest forest = build_christ_cubes(s, 0, 5);
  CHECK(forest.cubes.size() == 6);
  for (const ChristCube& q : forest.cubes) {
    CHECK(q.members.size() == 1);
    CHECK(q.sigma_mass == 1.0);
  }
}

TEST_CASE("christ cubes on the Cantor set: nesting, outer balls, mass comparability") {
  const int g = 4;
  const BoundarySample cantor = make_four_corner_cantor({g});
  const ChristForest forest = build_christ_cubes(cantor, 0, 2 * (g - 1));
  check_partition(forest);
  CHECK(forest.a0 >= 0.25);
  for (const ChristCube& q : forest.cubes) {
    // members sit inside the cube ball Delta(x_Q, 2^{-k})
    for (int i : q.members)
      CHECK((cantor.points.row(i).transpose() - q.center).norm() <= q.scale());
    // sigma(Q) is comparable to the self-similar mass at scale 2^{-k}
    if (q.k >= 1) {
      CHECK(q.sigma_mass >= q.scale() / 8.0);
      CHECK(q.sigma_mass <= 8.0 * q.scale());
    }
  }
}

TEST_CASE("packing sums: trivial, telescoping, monotone") {
  const BoundarySample line = make_plane({2.0, 0.02, 1, 2});
  const ChristForest forest = build_christ_cubes(line, -2, 2);
  const int root = forest.roots.front();

  CHECK(packing_sum(forest, [](const ChristCube&) { return false; }, root) == 0.0);

  // all-true predicate telescopes: one sigma(Q0) per generation below the root
  const int depth = forest.k_max - forest.cubes[root].k;
  CHECK(packing_sum(forest, [](const ChristCube&) { return true; }, root) ==
        doctest::Approx(depth + 1).epsilon(1e-12));

  // monotone under pointwise implication
  const double a = packing_sum(forest, [](const ChristCube& q) { return q.k >= 1; }, root);
  const double b = packing_sum(forest, [](const ChristCube& q) { return q.k >= 0; }, root);
  CHECK(a <= b + 1e-12);
}

TEST_CASE("christ cube preconditions") {
  const BoundarySample line = make_plane({2.0, 0.01, 1, 2});
  CHECK_THROWS_AS(build_christ_cubes(line, 2, 4), ParameterError);    // k_min too fine
  CHECK_THROWS_AS(build_christ_cubes(line, -2, 9), ResolutionError);  // below 4 spacing
}

TEST_CASE("whitney cubes on the upper half-plane satisfy the exact sandwich") {
  const BoundarySample line = make_plane({8.0, 0.01, 1, 2});
  const DomainBox dom(vec2(-2, 0), vec2(2, 4), line, Side::one_side);
  const WhitneyDecomposition w = build_whitney(dom, 1.0 / 256);
  CHECK(w.cubes.size() > 100);
  for (const WhitneyCube& cube : w.cubes) {
    const double dist = cube.corner[1];  // oracle distance of the box to {t=0}
    CHECK(dist >= 20.0 * cube.side);
    CHECK(dist < 40.0 * cube.side);
  }
  CHECK(w.overlap_multiplicity <= 16);
}

TEST_CASE("whitney sides near a point boundary") {
  BoundarySample point = make_plane({2.0, 0.01, 1, 2});
  point.points = Matrix::Zero(1, 2);
  point.points << 0.0, 0.0;
  point.weights = Vector::Ones(1);
  point.tail.reset();
  point.oracle = nullptr;
  point.kind = BoundaryKind::custom;
  point.diam = 0;
  finalize_sample(point, false);
  const DomainBox dom(vec2(-2, -2), vec2(2, 2), point, Side::complement);
  const WhitneyDecomposition w = build_whitney(dom, 1.0 / 1024);
  bool found = false;
  for (const WhitneyCube& cube : w.cubes) {
    const Vector c = cube.center();
    if (std::abs(c.norm() - 1.0) < 0.05) {
      CHECK(cube.side >= 1.0 / 64);  // dyadic bracket around [1/41, 1/20]
      CHECK(cube.side <= 1.0 / 16);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("whitney coverage above the resolved band") {
  const BoundarySample line = make_plane({8.0, 0.01, 1, 2});
  const DomainBox dom(vec2(-1, 0), vec2(1, 2), line, Side::one_side);
  const WhitneyDecomposition w = build_whitney(dom, std::pow(2.0, -10));
  // covered volume above t = 2^-6 must miss less than 1% of that region
  const double t0 = std::pow(2.0, -6);
  double covered = 0.0;
  for (const WhitneyCube& cube : w.cubes) {
    const double lo = std::max(cube.corner[1], t0);
    const double hi = cube.corner[1] + cube.side;
    if (hi > lo) covered += (hi - lo) * cube.side;
  }
  const double region = 2.0 * (2.0 - t0);
  CHECK((region - covered) / region < 1e-2);
}

TEST_CASE("forest export") {
  const BoundarySample line = make_plane({2.0, 0.02, 1, 2});
  const ChristForest forest = build_christ_cubes(line, -2, 2);
  const std::string path = "/tmp/urlab_forest.txt";
  write_forest(forest, path);
  std::ifstream in(path);
  int rows = 0;
  std::string l;
  while (std::getline(in, l)) ++rows;
  CHECK(rows == static_cast<int>(forest.cubes.size()));
  std::remove(path.c_str());
}
