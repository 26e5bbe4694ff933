#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "urlab/cluster_tree.hpp"
#include "urlab/types.hpp"

namespace urlab {

enum class BoundaryKind { plane, lipschitz_graph, circle, four_corner_cantor, low_dim_plane, custom };

std::string to_string(BoundaryKind kind);
BoundaryKind boundary_kind_from_string(const std::string& s);

// Analytic continuation of a flat boundary beyond the sampled core: the atoms
// tile origin + s*axis for |s| <= half_extent, the rays |s| > half_extent carry
// the same d-dimensional measure and are integrated in closed form downstream.
struct FlatTail {
  Vector origin;
  Vector axis;  // unit vector, d = 1 tails only
  double half_extent = 0.0;
};

// Quadrature representation of (boundary, sigma): atoms with weights that
// approximate the d-dimensional Hausdorff measure, plus optional exact
// helpers for the generated catalog sets.
struct BoundarySample {
  Matrix points;   // count x n
  Vector weights;  // length^d units
  double d = 1.0;
  int n = 2;
  double diam = 0.0;
  BoundaryKind kind = BoundaryKind::custom;
  double spacing = 0.0;  // nominal sample pitch
  std::optional<FlatTail> tail;
  std::function<double(const Vector&)> oracle;        // exact distance, may be empty
  std::function<double(const Vector&)> upper_excess;  // X "height above" the graph, may be empty
  double ahlfors_constant = 0.0;                      // empirical C_sigma recorded at generation
  std::shared_ptr<const ClusterTree> tree;            // nearest-atom queries

  int count() const { return static_cast<int>(points.rows()); }
  double total_mass() const { return weights.sum(); }
};

struct PlaneParams {
  double extent = 8.0;
  double spacing = 0.01;
  int d = 1;
  int n = 2;
};
struct GraphParams {
  double extent = 4.0;
  double spacing = 0.01;
  double slope = 0.3;  // Lipschitz constant M >= 0
  int n = 2;
};
struct CircleParams {
  double radius = 1.0;
  int count = 628;
};
struct CantorParams {
  int generation = 5;
};

BoundarySample make_plane(const PlaneParams& p);
BoundarySample make_lipschitz_graph(const GraphParams& p);
BoundarySample make_circle(const CircleParams& p);
BoundarySample make_four_corner_cantor(const CantorParams& p);
BoundarySample make_low_dim_plane(double extent, double spacing, int n);

// Triangle-wave profile used by the graph generator; M-Lipschitz, zero (flat)
// outside |x| >= flat_from.
double graph_profile(double x, double slope, double flat_from);
double graph_flat_from(double extent);

// Distance from X to the sample (oracle when present, otherwise the atom/tail
// minimum, an over-estimate by at most half the sample spacing).
double dist_to_boundary(const BoundarySample& sample, const Vector& X);

// Distance ignoring the oracle: min over atoms and tail rays.
double sample_distance(const BoundarySample& sample, const Vector& X);

struct AhlforsReport {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double c_sigma = 0.0;  // max(max_ratio, 1/min_ratio)
  bool regularity_ok = true;
  int trials = 0;
  double r_lo = 0.0, r_hi = 0.0;  // valid scale window tested
};

// Samples random (x, r) with r in [10*spacing, diam/4] and reports the range
// of sigma(B(x,r))/r^d. Ratios outside [1e-3, 1e3] set the failure flag.
AhlforsReport verify_ahlfors(const BoundarySample& sample, int trials, unsigned seed = 1234,
                             double declared_d = -1.0);

// Columnar text format: header `n d count`, one `x1 ... xn w` row per atom.
void write_boundary(const BoundarySample& sample, const std::string& path);
BoundarySample read_boundary(const std::string& path);

// Rebuilds the derived members (tree, diam, empirical Ahlfors constant).
void finalize_sample(BoundarySample& sample, bool record_ahlfors = true);

}  // namespace urlab
