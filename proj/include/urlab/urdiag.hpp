#pragma once

#include <functional>
#include <string>
#include <vector>

#include "urlab/dyadic.hpp"
#include "urlab/grid.hpp"
#include "urlab/types.hpp"

namespace urlab {

struct BetaEntry {
  int cube_id = -1;
  int k = 0;
  double bbeta = 0.0;
  double seed_value = 0.0;  // the LSQ-seeded objective before pattern search
  bool bad = false;
};

struct BetaReport {
  double epsilon = 0.0;
  std::vector<BetaEntry> entries;
  std::vector<std::pair<int, double>> root_ratios;  // (root id, packing ratio)
  double max_ratio = 0.0;
};

// Bilateral beta number of a cube: infimum over d-planes approximated by a
// weighted LSQ seed plus deterministic pattern search (budget 200 objective
// evaluations); the plane-to-set sup is sampled at pitch l(Q)/32 and uses the
// oracle distance when the sample has one.
double bbeta_inf(const BoundarySample& sample, const ChristForest& forest, int cube_id,
                 double* seed_value = nullptr);

// Packing ratios of {bbeta > epsilon} below every root.
BetaReport bwgl_report(const BoundarySample& sample, const ChristForest& forest, double epsilon,
                       int threads = 1);

void write_beta_csv(const BetaReport& report, const ChristForest& forest,
                    const std::string& path);

struct EikonalReport {
  bool is_const_grad = false;
  double c = 0.0;             // the constant |grad G|
  double oscillation = 0.0;   // relative oscillation of |grad G| on the mask
  double max_deviation = 0.0; // max |G - c dist(., zero set)|
};

// Rigidity check: |grad G| constant implies G is (a multiple of) the distance
// to its zero set; the distance is brute-forced over zero-set nodes.
EikonalReport eikonal_distance_check(const ScalarField& G, double osc_tol = 0.05,
                                     double zero_tol = 1e-12);

// Concave C^3 chart of a convex body boundary: E = {(y, s): s <= phi(y)}
// locally, phi(0) = 0, grad phi(0) = 0.
struct ConvexBodySpec {
  int n = 2;
  std::function<double(const Vector&)> phi;          // R^{n-1} -> R
  std::function<Vector(const Vector&)> phi_grad;
  std::function<Matrix(const Vector&)> phi_hess;
  Vector lambdas;  // principal curvatures, eigenvalues of -D^2 phi(0)
};

ConvexBodySpec make_unit_disk_chart();
ConvexBodySpec make_plane_chart(int n);
ConvexBodySpec make_paraboloid_chart(const Vector& lambdas);

struct ConvexHessianReport {
  Matrix fd_hessian;       // finite differences of the projected distance
  Matrix closed_form;      // delta_ij lambda_i / (1 + t lambda_i)^2, chart computation
  double discrepancy = 0.0;
  double L_delta = 0.0;    // -sum a_ij d_ij delta_E, finite-difference path
};

// Distance to the body via damped Newton projection on the chart (step
// tolerance 1e-10); reports both the finite-difference Hessian at X = (0, t)
// and the closed-form matrix, plus the sign of L delta_E for the supplied
// constant coefficient matrix.
ConvexHessianReport convex_distance_hessian(const ConvexBodySpec& body, double t,
                                            const Matrix& coeff);

// The projected distance itself (exposed for the property tests).
double convex_body_distance(const ConvexBodySpec& body, const Vector& X);

}  // namespace urlab
