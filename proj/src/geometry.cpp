#include "urlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace urlab {

DomainBox::DomainBox(Vector lo_, Vector hi_, const BoundarySample& b, Side s)
    : lo(std::move(lo_)), hi(std::move(hi_)), boundary(&b), side(s) {
  if (lo.size() != b.n || hi.size() != b.n) throw DimensionError("DomainBox: corner dimension");
  if ((hi - lo).minCoeff() <= 0) throw ParameterError("DomainBox: empty box");
  if (b.d < b.n - 1 && side == Side::one_side)
    throw DimensionError("DomainBox: d < n-1 forces the complement domain");
  if (side == Side::one_side && !b.upper_excess)
    throw ParameterError("DomainBox: one_side needs a graph boundary");
}

bool DomainBox::in_box(const Vector& X) const {
  return (X.array() >= lo.array()).all() && (X.array() <= hi.array()).all();
}

bool DomainBox::in_domain(const Vector& X) const {
  if (side == Side::one_side) return boundary->upper_excess(X) > 0.0;
  return dist_to_boundary(*boundary, X) > 0.0;
}

double local_hausdorff(const BoundarySample& E, const BoundarySample& F, const Vector& x,
                       double r) {
  if (r <= 0) throw ParameterError("local_hausdorff: r must be > 0");
  double supE = 0.0, supF = 0.0;
  for (int i = 0; i < E.count(); ++i) {
    const Vector y = E.points.row(i).transpose();
    if ((y - x).norm() <= r) supE = std::max(supE, sample_distance(F, y));
  }
  for (int i = 0; i < F.count(); ++i) {
    const Vector y = F.points.row(i).transpose();
    if ((y - x).norm() <= r) supF = std::max(supF, sample_distance(E, y));
  }
  return (supE + supF) / r;
}

CorkscrewResult find_corkscrew(const DomainBox& domain, const Vector& x, double r) {
  if (r <= 0) throw ParameterError("find_corkscrew: r must be > 0");
  const int n = domain.boundary->n;
  const double step = r / 64.0;
  std::vector<int> idx(n, -64);
  CorkscrewResult best;
  best.epsilon = 0.0;
  Vector X(n);
  bool found = false;
  // odometer loop over the lattice, lexicographic order gives the tie-break
  while (true) {
    for (int j = 0; j < n; ++j) X[j] = x[j] + idx[j] * step;
    const double rad = (X - x).norm();
    if (rad < r && domain.in_domain(X)) {
      const double obj = std::min(domain.delta(X), r - rad);
      if (obj > best.epsilon * r + 1e-15 * r) {
        best.epsilon = obj / r;
        best.point = X;
        found = true;
      }
    }
    int j = n - 1;
    while (j >= 0 && idx[j] == 64) {
      idx[j] = -64;
      --j;
    }
    if (j < 0) break;
    ++idx[j];
  }
  if (!found || best.epsilon <= 0)
    throw SearchError("find_corkscrew: no interior point at resolution r/64");
  return best;
}

namespace {

// March from P toward T with steps of length <= delta(P)/2 until arrival.
void march(const DomainBox& domain, std::vector<Vector>& chain, const Vector& T, int max_steps) {
  Vector P = chain.back();
  for (int it = 0; it < max_steps; ++it) {
    const double gap = (T - P).norm();
    const double dp = domain.delta(P);
    if (gap <= 0.5 * dp) {
      if (gap > 0) chain.push_back(T);
      return;
    }
    if (dp <= 1e-14) throw ConnectivityError("harnack_chain: chain hit the boundary");
    P = P + (0.5 * dp / gap) * (T - P);
    chain.push_back(P);
  }
  throw ConnectivityError("harnack_chain: step budget exhausted (non-uniform at this scale?)");
}

}  // namespace

HarnackChain harnack_chain(const DomainBox& domain, const Vector& X, const Vector& Y) {
  if (!domain.in_domain(X) || !domain.in_domain(Y))
    throw ParameterError("harnack_chain: endpoints must lie in the domain");
  HarnackChain out;
  const double dX = domain.delta(X), dY = domain.delta(Y);
  const double sep = (X - Y).norm();
  out.lambda = sep / std::max(1e-300, std::min(dX, dY));
  if (sep == 0.0) {
    out.points = {X};
    return out;
  }

  auto ascend = [&](const Vector& P0) {
    std::vector<Vector> part{P0};
    const double target_depth = 0.2 * sep;
    if (domain.delta(P0) >= target_depth) return part;
    const int anchor = domain.boundary->tree->nearest(P0).first;
    const Vector xb = domain.boundary->points.row(anchor).transpose();
    const CorkscrewResult cs = find_corkscrew(domain, xb, sep);
    march(domain, part, cs.point, 400);
    return part;
  };

  std::vector<Vector> up = ascend(X);
  std::vector<Vector> down = ascend(Y);
  march(domain, up, down.back(), 400);
  // walk the descent corridor back to Y; each leg stays within delta/2 of its
  // waypoint, so march terminates in a few substeps per leg
  for (auto it = down.rbegin() + 1; it != down.rend(); ++it) march(domain, up, *it, 50);
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& Z : up) dmin = std::min(dmin, domain.delta(Z));
  out.n_prime = std::max(0, static_cast<int>(std::ceil(std::log2(std::min(dX, dY) / dmin))));
  out.points = std::move(up);
  return out;
}

UniformityReport uniformity_report(const DomainBox& domain, int trials, unsigned seed) {
  UniformityReport rep;
  rep.samples = trials;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, domain.boundary->count() - 1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double r_hi = 0.25 * (domain.hi - domain.lo).minCoeff();
  double eps = 1.0;
  for (int t = 0; t < trials; ++t) {
    const Vector x = domain.boundary->points.row(pick(rng)).transpose();
    const double r = r_hi * std::pow(0.1, u01(rng));
    try {
      eps = std::min(eps, find_corkscrew(domain, x, r).epsilon);
    } catch (const SearchError&) {
      eps = 0.0;
    }
  }
  rep.epsilon = eps;
  // chain-length fit N ~ C ln(1+Lambda) over corkscrew pairs at spread scales
  double sxx = 0, sxy = 0, syy = 0;
  int m = 0;
  for (int t = 0; t < trials; ++t) {
    const Vector x = domain.boundary->points.row(pick(rng)).transpose();
    const double r = r_hi * std::pow(0.1, u01(rng));
    try {
      const Vector A = find_corkscrew(domain, x, r).point;
      const Vector B = find_corkscrew(domain, x, r_hi).point;
      const HarnackChain ch = harnack_chain(domain, A, B);
      const double lx = std::log1p(ch.lambda);
      const double ny = static_cast<double>(ch.points.size());
      sxx += lx * lx;
      sxy += lx * ny;
      syy += ny * ny;
      ++m;
    } catch (const Error&) {
      continue;
    }
  }
  if (m > 0 && sxx > 0) {
    rep.chain_constant = sxy / sxx;
    rep.chain_fit_goodness = (syy > 0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  }
  return rep;
}

}  // namespace urlab
