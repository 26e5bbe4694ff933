#pragma once

#include <optional>
#include <string>
#include <vector>

#include "urlab/dyadic.hpp"
#include "urlab/elliptic.hpp"
#include "urlab/grid.hpp"
#include "urlab/whitney.hpp"

namespace urlab {

enum class IntegrandKind {
  hess_u,           // f = delta^2 |grad^2 u| / u
  grad_abs_grad_u,  // f = delta^2 |grad|grad u|| / u
  grad_sq_grad_u,   // f = delta^3 |grad(|grad u|^2)| / u^2
  logratio_grad,    // f = D |grad ln(u/D)|
  logratio_hess,    // f = D^2 |grad^2 ln(u/D)|
  dkp_coeff,        // f = delta |grad A|
  dem_g1,           // f = delta |grad |grad D||
  dem_g2,           // f = delta |grad(|grad D|^2)|
  dem_ind,          // f = 1_{|grad D| < c}
  weight_div        // f = delta^{n-d} |div(D^{d+1-n} grad D)|
};

std::string to_string(IntegrandKind kind);
IntegrandKind integrand_kind_from_string(const std::string& s);

struct BallEntry {
  Vector center;
  double r = 0.0;
  double value = 0.0;
  long cells = 0;
  bool absent = false;
};

struct CarlesonReport {
  std::vector<double> scales;
  std::vector<BallEntry> table;
  double sup = 0.0;  // M^2
  int argmax = -1;   // index into table
  double h = 0.0;
  double trend_slope = 0.0;  // filled by ladder drivers
};

// Per-ball normalized integrals r^{-d} sum f^2 delta^{d-n} h^n over interior
// lattice cells inside B(x,r), centers one per Christ cube at each scale.
// Balls that leave the box or contain the pole within 2r are reported absent.
CarlesonReport carleson_norm(const ScalarField& f, const BoundarySample& sample,
                             const ChristForest& forest, const std::vector<double>& scales,
                             const Vector* pole = nullptr);

// Same sums with f supplied as an evaluator (NaN = masked); spares the field
// storage on fine 3-D lattices.
CarlesonReport carleson_norm_fn(const Grid& grid,
                                const std::function<double(const Vector&, double)>& f,
                                const BoundarySample& sample, const ChristForest& forest,
                                const std::vector<double>& scales, const Vector* pole = nullptr);

struct IntegrandResult {
  ScalarField f;
  bool counterexample_regime = false;  // hess_u with d < n-1
};

// Assembles the tagged integrand from the solution field, the smooth distance
// field and the operator spec (the field pointer is needed for logratio and
// DEM tags).
IntegrandResult build_integrand(IntegrandKind kind, const Grid& grid, const ScalarField* u,
                                const SmoothDistanceField* field, const OperatorSpec& spec,
                                const Vector* pole = nullptr);

struct DkpReport {
  double sup_coeff = 0.0;  // sup delta |grad A|
  std::vector<std::pair<double, double>> ladder;  // (h, carleson sup)
  bool dkp = false;
  double growth_min = 0.0, growth_max = 0.0;
};

// L^inf bound and Carleson table for f = delta |grad A|, classified by the
// refinement trend across the h ladder.
DkpReport dkp_check(const OperatorSpec& spec, const DomainBox& domain,
                    const BoundarySample& sample, const std::vector<double>& h_ladder,
                    const std::vector<double>& scales);

struct TrendResult {
  bool divergent = false;
  double growth_min = 0.0, growth_max = 0.0;
  double slope = 0.0;  // d(sup)/d(ln(1/h))
};

// Divergence rule pinned for the acceptance suite: every refinement step grows
// the sup by >= 8% and the total growth is >= 25% (below 1e-12 counts bounded).
TrendResult classify_trend(const std::vector<std::pair<double, double>>& ladder);

struct CaccioppoliEntry {
  WhitneyCube cube;
  double lhs = 0.0;       // int_W |grad^2 ln(u/D)|^2 D^{d+4-n}
  double rhs_grad = 0.0;  // int_{W*} |grad ln(u/D)|^2 D^{d+2-n}
  double rhs_wdiv = 0.0;  // int_{W*} (wdiv integrand)^2 D^{d-n}
  double rhs_coeff = 0.0; // int_{W*} (delta |grad A|)^2 D^{d-n}
  double constant = 0.0;  // lhs / (rhs_grad + rhs_wdiv + rhs_coeff)
};

// Whitney-cube Caccioppoli consistency for a positive solution u; cubes whose
// dilate W* = 2B_W leaves the box, touches the pole or has no valid lattice
// cells are skipped.
std::vector<CaccioppoliEntry> caccioppoli_check(const ScalarField& u,
                                                const SmoothDistanceField& field,
                                                const OperatorSpec& spec,
                                                const std::vector<WhitneyCube>& cubes,
                                                double min_side, const Vector* pole);

// CSV emission: `center..., r, value, cells_used` rows plus a summary block.
void write_carleson_csv(const CarlesonReport& report, const std::string& path);

}  // namespace urlab
