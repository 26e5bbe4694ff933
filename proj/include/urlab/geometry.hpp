#pragma once

#include <vector>

#include "urlab/boundary.hpp"
#include "urlab/types.hpp"

namespace urlab {

enum class Side { one_side, complement };

// Computational window: Omega is either the upper side of a graph boundary or
// the full complement of the boundary set, intersected with [lo, hi].
struct DomainBox {
  Vector lo, hi;
  const BoundarySample* boundary = nullptr;
  Side side = Side::complement;

  DomainBox() = default;
  DomainBox(Vector lo_, Vector hi_, const BoundarySample& b, Side s);

  bool in_box(const Vector& X) const;
  bool in_domain(const Vector& X) const;  // membership in Omega (box not required)
  double delta(const Vector& X) const { return dist_to_boundary(*boundary, X); }
};

// Local Hausdorff distance d_{x,r}(E,F); empty intersections contribute 0.
double local_hausdorff(const BoundarySample& E, const BoundarySample& F, const Vector& x,
                       double r);

struct CorkscrewResult {
  Vector point;
  double epsilon = 0.0;  // min(delta(X), r - |X-x|) / r at the returned point
};

// Grid search at resolution r/64 inside B(x,r); deterministic lexicographic
// tie-break on the maximizer.
CorkscrewResult find_corkscrew(const DomainBox& domain, const Vector& x, double r);

struct HarnackChain {
  std::vector<Vector> points;  // Z_0 = X, ..., Z_N = Y
  double lambda = 0.0;         // |X-Y| / min(delta(X), delta(Y))
  int n_prime = 0;             // depth loss: min delta along chain >= 2^{-n_prime} min(dX,dY)
};

// Greedy chain: ascend from both endpoints toward corkscrew points at scale
// |X-Y|, connect across the top. Every step satisfies |Z_i - Z_{i+1}| <=
// delta(Z_i)/2 by construction.
HarnackChain harnack_chain(const DomainBox& domain, const Vector& X, const Vector& Y);

struct UniformityReport {
  double epsilon = 0.0;            // worst corkscrew constant observed
  double chain_constant = 0.0;     // C in N_Lambda ~ C ln(1+Lambda)
  double chain_fit_goodness = 0.0; // correlation of N against ln(1+Lambda)
  int samples = 0;
};

UniformityReport uniformity_report(const DomainBox& domain, int trials, unsigned seed = 31);

}  // namespace urlab
