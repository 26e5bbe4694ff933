#pragma once

#include <vector>

#include "urlab/geometry.hpp"
#include "urlab/types.hpp"

namespace urlab {

struct WhitneyCube {
  Vector corner;  // lower corner
  double side = 0.0;
  Vector center() const { return corner + Vector::Constant(corner.size(), 0.5 * side); }
};

struct WhitneyDecomposition {
  std::vector<WhitneyCube> cubes;
  double uncovered_fraction = 0.0;  // volume of Omega ∩ box left uncovered
  double overlap_multiplicity = 0.0;  // max multiplicity of the dilates 2B_W
};

// Maximal lattice cubes aligned to the box corner with dist(W, boundary)
// >= 20 side(W); cubes that would need side < h_min are dropped and their
// volume reported as uncovered.
WhitneyDecomposition build_whitney(const DomainBox& domain, double h_min);

// Exact distance from an axis-aligned box to the sampled boundary: min over
// atoms, tail rays and the kind-specific analytic parts.
double box_boundary_distance(const BoundarySample& sample, const Vector& lo, const Vector& hi);

}  // namespace urlab
