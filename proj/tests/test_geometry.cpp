#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "urlab/geometry.hpp"

using namespace urlab;

namespace {

Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

DomainBox upper_half_plane(const BoundarySample& line) {
  return DomainBox(vec2(-20, -20), vec2(20, 20), line, Side::one_side);
}

void check_chain(const DomainBox& dom, const HarnackChain& ch, double dX, double dY) {
  for (size_t i = 0; i + 1 < ch.points.size(); ++i) {
    const double step = (ch.points[i + 1] - ch.points[i]).norm();
    CHECK(step <= 0.5 * dom.delta(ch.points[i]) + 1e-10);
  }
  const double floor = std::pow(2.0, -ch.n_prime) * std::min(dX, dY);
  for (const auto& Z : ch.points) CHECK(dom.delta(Z) >= floor - 1e-10);
}

}  // namespace

TEST_CASE("local Hausdorff distance") {
  const BoundarySample a = make_plane({4.0, 0.01, 1, 2});
  CHECK(local_hausdorff(a, a, vec2(0, 0), 1.0) == doctest::Approx(0.0));

  BoundarySample b = a;
  b.points.col(1).array() += 0.25;
  b.tail->origin = vec2(0.0, 0.25);
  finalize_sample(b, false);
  // each sup equals the vertical shift
  CHECK(local_hausdorff(a, b, vec2(0, 0), 1.0) == doctest::Approx(0.5).epsilon(1e-9));
  // symmetry
  CHECK(local_hausdorff(b, a, vec2(0, 0), 1.0) ==
        doctest::Approx(local_hausdorff(a, b, vec2(0, 0), 1.0)));

  // one empty sup: E far from the ball, F a point inside it
  BoundarySample point = a;
  point.points = Matrix::Zero(1, 2);
  point.points << 0.0, 0.3;
  point.weights = Vector::Ones(1);
  point.tail.reset();
  point.oracle = nullptr;
  point.kind = BoundaryKind::custom;
  finalize_sample(point, false);
  BoundarySample far = point;
  far.points << 100.0, 0.0;
  finalize_sample(far, false);
  const double v = local_hausdorff(far, point, vec2(0, 0), 1.0);
  CHECK(v == doctest::Approx(sample_distance(far, vec2(0, 0.3))).epsilon(1e-12));
}

TEST_CASE("corkscrew point on the half-plane") {
  const BoundarySample line = make_plane({8.0, 0.01, 1, 2});
  const DomainBox dom = upper_half_plane(line);
  const CorkscrewResult cs = find_corkscrew(dom, vec2(0, 0), 1.0);
  CHECK(cs.epsilon == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(cs.point[0] == doctest::Approx(0.0));
  CHECK(cs.point[1] == doctest::Approx(0.5));
  // the half-space optimum is 1/2 at every location and scale
  for (double r : {0.25, 0.5, 2.0}) {
    for (double x : {-1.0, 0.5, 3.0}) {
      const CorkscrewResult c = find_corkscrew(dom, vec2(x, 0), r);
      CHECK(c.epsilon == doctest::Approx(0.5).epsilon(1.0 / 64.0));
    }
  }
}

TEST_CASE("corkscrew on the two-sided complement and the Cantor complement") {
  const BoundarySample line = make_plane({8.0, 0.01, 1, 2});
  const DomainBox both(vec2(-20, -20), vec2(20, 20), line, Side::complement);
  const CorkscrewResult cs = find_corkscrew(both, vec2(0, 0), 1.0);
  CHECK(cs.epsilon == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::abs(cs.point[1]) == doctest::Approx(0.5));

  const BoundarySample cantor = make_four_corner_cantor({5});
  const DomainBox dom(vec2(-2, -2), vec2(3, 3), cantor, Side::complement);
  const CorkscrewResult cc = find_corkscrew(dom, cantor.points.row(0).transpose(), 1.0);
  CHECK(cc.epsilon >= 0.1);
}

TEST_CASE("harnack chains on the half-plane") {
  const BoundarySample line = make_plane({64.0, 0.05, 1, 2});
  const DomainBox dom = upper_half_plane(line);

  const HarnackChain trivial = harnack_chain(dom, vec2(0, 1), vec2(0, 1));
  CHECK(trivial.points.size() == 1);

  const HarnackChain vertical = harnack_chain(dom, vec2(0, 1), vec2(0, 2));
  CHECK(vertical.points.size() <= 3);
  check_chain(dom, vertical, 1.0, 2.0);

  // length grows like log(1+k) along horizontal separations
  std::vector<double> lengths;
  for (double k : {2.0, 4.0, 8.0, 16.0}) {
    const HarnackChain ch = harnack_chain(dom, vec2(0, 1), vec2(k, 1));
    check_chain(dom, ch, 1.0, 1.0);
    lengths.push_back(static_cast<double>(ch.points.size()));
    CHECK(static_cast<double>(ch.points.size()) <= 8.0 * std::log1p(k) + 6.0);
  }
  CHECK(lengths[3] >= lengths[0]);
}

TEST_CASE("uniformity report on the half-plane") {
  const BoundarySample line = make_plane({8.0, 0.02, 1, 2});
  const DomainBox dom = upper_half_plane(line);
  const UniformityReport rep = uniformity_report(dom, 8);
  CHECK(rep.epsilon > 0.3);
  CHECK(rep.epsilon <= 1.0);
  CHECK(rep.chain_constant > 0.0);
}

TEST_CASE("domain box validation") {
  const BoundarySample l3 = make_low_dim_plane(4.0, 0.01, 3);
  Vector lo(3), hi(3);
  lo << -1, -1, -1;
  hi << 1, 1, 1;
  CHECK_THROWS_AS(DomainBox(lo, hi, l3, Side::one_side), DimensionError);
  const DomainBox ok(lo, hi, l3, Side::complement);
  Vector X(3);
  X << 0.2, 0.3, 0.4;
  CHECK(ok.in_domain(X));
  CHECK(ok.delta(X) == doctest::Approx(0.5));
}
