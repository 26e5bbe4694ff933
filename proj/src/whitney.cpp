#include "urlab/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace urlab {

namespace {

double point_box_distance(const Vector& y, const Vector& lo, const Vector& hi) {
  double d2 = 0;
  for (int j = 0; j < y.size(); ++j) {
    const double gap = std::max({lo[j] - y[j], 0.0, y[j] - hi[j]});
    d2 += gap * gap;
  }
  return std::sqrt(d2);
}

double ray_box_distance(const FlatTail& tail, double s_lo, double s_hi, const Vector& lo,
                        const Vector& hi) {
  // distance from {origin + s axis : s in [s_lo, s_hi]} to the box; the
  // squared distance is convex in s, golden-section suffices
  auto g = [&](double s) { return point_box_distance(tail.origin + s * tail.axis, lo, hi); };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = s_lo, b = s_hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * (1.0 + std::abs(a)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = g(x2);
    }
  }
  return std::min(f1, f2);
}

}  // namespace

double box_boundary_distance(const BoundarySample& sample, const Vector& lo, const Vector& hi) {
  if (sample.kind == BoundaryKind::plane || sample.kind == BoundaryKind::low_dim_plane) {
    // exact gap to the (infinite) d-plane spanned by the first d axes
    double d2 = 0;
    for (int j = static_cast<int>(std::llround(sample.d)); j < sample.n; ++j) {
      const double gap = std::max({lo[j], 0.0, -hi[j]});
      d2 += gap * gap;
    }
    return std::sqrt(d2);
  }
  if (sample.kind == BoundaryKind::circle) {
    const double R = sample.diam / 2.0;
    const Vector origin = Vector::Zero(sample.n);
    const double rmin = point_box_distance(origin, lo, hi);
    double rmax = 0;
    for (int mask = 0; mask < (1 << sample.n); ++mask) {
      Vector c(sample.n);
      for (int j = 0; j < sample.n; ++j) c[j] = (mask >> j) & 1 ? hi[j] : lo[j];
      rmax = std::max(rmax, c.norm());
    }
    if (rmin <= R && R <= rmax) return 0.0;
    return rmin > R ? rmin - R : R - rmax;
  }
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < sample.count(); ++i)
    best = std::min(best, point_box_distance(sample.points.row(i).transpose(), lo, hi));
  if (sample.tail) {
    const double far = 1e6 * (1.0 + (hi - lo).norm() + hi.cwiseAbs().maxCoeff());
    best = std::min(best, ray_box_distance(*sample.tail, sample.tail->half_extent, far, lo, hi));
    best = std::min(best, ray_box_distance(*sample.tail, -far, -sample.tail->half_extent, lo, hi));
  }
  return best;
}

WhitneyDecomposition build_whitney(const DomainBox& domain, double h_min) {
  if (h_min <= 0) throw ParameterError("build_whitney: h_min must be > 0");
  const int n = domain.boundary->n;
  const Vector extent = domain.hi - domain.lo;

  // root cell side: largest value tiling every box extent
  double s0 = extent.minCoeff();
  auto tiles = [&](double s) {
    for (int j = 0; j < n; ++j) {
      const double q = extent[j] / s;
      if (std::abs(q - std::round(q)) > 1e-9) return false;
    }
    return true;
  };
  while (!tiles(s0)) {
    s0 *= 0.5;
    if (s0 < h_min) throw ParameterError("build_whitney: box extents do not tile dyadically");
  }

  WhitneyDecomposition out;
  double covered = 0.0, uncovered = 0.0;

  std::function<void(const Vector&, double)> descend = [&](const Vector& corner, double side) {
    const Vector hi = corner + Vector::Constant(n, side);
    const double dist = box_boundary_distance(*domain.boundary, corner, hi);
    const Vector center = corner + Vector::Constant(n, 0.5 * side);
    if (dist >= 20.0 * side && domain.in_domain(center)) {
      out.cubes.push_back({corner, side});
      covered += std::pow(side, n);
      return;
    }
    if (0.5 * side >= h_min) {
      for (int mask = 0; mask < (1 << n); ++mask) {
        Vector c = corner;
        for (int j = 0; j < n; ++j)
          if ((mask >> j) & 1) c[j] += 0.5 * side;
        descend(c, 0.5 * side);
      }
      return;
    }
    // unresolvable near-boundary cell
    if (dist > 0.0 ? domain.in_domain(center) : true) uncovered += std::pow(side, n);
  };

  std::vector<int> counts(n);
  long total = 1;
  for (int j = 0; j < n; ++j) {
    counts[j] = static_cast<int>(std::llround(extent[j] / s0));
    total *= counts[j];
  }
  for (long cell = 0; cell < total; ++cell) {
    long rest = cell;
    Vector corner = domain.lo;
    for (int j = 0; j < n; ++j) {
      corner[j] += (rest % counts[j]) * s0;
      rest /= counts[j];
    }
    descend(corner, s0);
  }

  out.uncovered_fraction = uncovered / std::max(1e-300, covered + uncovered);

  // overlap multiplicity of the dilates W* = 2B_W, sampled
  const size_t stride = std::max<size_t>(1, out.cubes.size() / 200);
  double mult = 0;
  for (size_t i = 0; i < out.cubes.size(); i += stride) {
    const Vector ci = out.cubes[i].center();
    int count = 0;
    for (const WhitneyCube& w : out.cubes)
      if ((w.center() - ci).norm() < 2.0 * w.side) ++count;
    mult = std::max(mult, static_cast<double>(count));
  }
  out.overlap_multiplicity = mult;
  return out;
}

}  // namespace urlab
