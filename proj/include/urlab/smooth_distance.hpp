#pragma once

#include <memory>
#include <string>
#include <vector>

#include "urlab/boundary.hpp"
#include "urlab/cluster_tree.hpp"
#include "urlab/types.hpp"

namespace urlab {

// Value / gradient / Hessian bundle of a scalar field at a probe.
struct Jet2 {
  double value = 0.0;
  Vector grad;
  Matrix hess;
  int order = 0;
};

// Evaluation record of eval_smooth_distance: the kernel sum R_beta and the
// smooth distance D_beta = R_beta^{-1/beta} with requested derivatives.
struct SmoothDistanceEval {
  Jet2 R;
  Jet2 D;
  double delta = 0.0;  // true distance used for the comparability record
};

struct PlaneFit {
  Vector point;   // a point on P_X
  Matrix frame;   // n x d orthonormal tangent frame
  Matrix normal;  // n x (n-d) orthonormal normal frame
  double c_x = 0.0;
  double D1 = 0.0, Dhalf = 0.0;  // the D_1 and D_{1/2} evaluations behind c_x
};

struct DemIntegrands {
  double g2 = 0.0;    // delta |grad(|grad D|^2)|
  double g1 = 0.0;    // delta |grad |grad D||
  double ind = 0.0;   // 1_{|grad D| < c}
  double wdiv = 0.0;  // delta^{n-d} |div(D^{d+1-n} grad D)|
  double threshold = 0.0;  // the c used by the indicator
};

// Evaluator of R_beta, D_beta and derivatives up to order 2 over a boundary
// sample, with cluster-tree far-field acceleration and flat-tail closure.
class SmoothDistanceField {
 public:
  SmoothDistanceField(const BoundarySample& sample, double beta, double theta = 0.5,
                      double mac_tol = 1e-7);

  const BoundarySample& sample() const { return *sample_; }
  double beta() const { return beta_; }
  double kernel_exponent() const { return s_; }  // d + beta
  double c_beta_value() const { return c_beta_; }
  double plane_gradient() const;  // |grad D_beta| of the exact plane case, c_beta^{-1/beta}

  // Throws ResolutionError when delta(X) <= 2 * sample spacing.
  SmoothDistanceEval evaluate(const Vector& X, int order) const;

  // Order-0 R_beta without the resolution guard (weight evaluations for the
  // elliptic assembly; the value reflects the discrete sigma near atoms).
  double r_beta_raw(const Vector& X) const;
  double weight(const Vector& X, double exponent) const;  // D_beta(X)^exponent, raw path

  // Direct summation (no tree), used by the tree-consistency invariant.
  Jet2 r_beta_direct(const Vector& X, int order) const;

  // R_beta restricted to atoms within the given radius of X (tail-control checks).
  double r_beta_truncated(const Vector& X, double radius) const;

  PlaneFit best_plane(const Vector& X) const;

  // Jet of R_{beta,X}(Y) = c_beta dist(Y, P_X)^{-beta} at Y = X.
  Jet2 plane_kernel_jet(const PlaneFit& fit, const Vector& X, int order) const;

  // delta^{beta+|kappa|} |d^kappa R_beta(X) - c_X d^kappa R_{beta,X}(X)|
  double flatness_deficit(const Vector& X, const std::vector<int>& kappa) const;
  double flatness_deficit(const Vector& X, const std::vector<int>& kappa,
                          const PlaneFit& fit) const;

  DemIntegrands dem_integrands(const Vector& X) const;
  // Same integrands assembled from an existing order-2 evaluation.
  DemIntegrands dem_from_eval(const SmoothDistanceEval& ev) const;

 private:
  Jet2 r_beta_tree(const Vector& X, int order) const;
  void accumulate_kernel(const Vector& u, double w, int order, Jet2& out) const;
  void tail_jet(const Vector& X, int order, Jet2& out) const;
  Jet2 d_from_r(const Jet2& R, int order) const;

  const BoundarySample* sample_;
  double beta_;
  double s_;  // d + beta
  double theta_;
  double mac_tol_;
  double c_beta_;  // only meaningful for integer d
  mutable std::shared_ptr<const SmoothDistanceField> aux_d1_, aux_dhalf_;
};

// Probe batch text io: rows `X... delta D grad... hess...` (hessian row-major).
// Input files carry at least the n probe columns; extra columns are ignored.
Matrix read_probes(const std::string& path, int n);
void write_probe_batch(const SmoothDistanceField& field, const Matrix& probes,
                       const std::string& path);

}  // namespace urlab
