#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <optional>
#include <string>

#include "urlab/grid.hpp"
#include "urlab/smooth_distance.hpp"
#include "urlab/types.hpp"

namespace urlab {

// L = -div(D_beta^{d+1-n} A grad); the coefficient field defaults to the
// identity. For d < n-1 only A = I is admitted.
struct OperatorSpec {
  double beta = 1.0;
  double d = 1.0;
  int n = 2;
  std::function<Matrix(const Vector&)> coeff;  // empty = identity

  bool identity() const { return !coeff; }
  Matrix coeff_at(const Vector& X) const { return coeff ? coeff(X) : Matrix::Identity(n, n); }
  double weight_exponent() const { return d + 1.0 - n; }
};

using WeightFn = std::function<double(const Vector&)>;

// D_beta^{d+1-n} through the field's raw kernel sum.
WeightFn weight_from_field(const SmoothDistanceField& field, const OperatorSpec& spec);
// The exact plane-case weight (c_beta^{-1/beta} delta)^{d+1-n}.
WeightFn weight_from_oracle(const BoundarySample& sample, const OperatorSpec& spec,
                            double c_beta_value);

struct AssembledSystem {
  Eigen::SparseMatrix<double> A;  // interior x interior, symmetric
  Eigen::SparseMatrix<double> B;  // interior x all-nodes coupling to Dirichlet data
  std::vector<long> row_of_node;  // -1 when not a free unknown
  std::vector<std::size_t> node_of_row;
  const Grid* grid = nullptr;
  double lambda_min = 0.0, lambda_max = 0.0;  // measured ellipticity of the coefficient
  bool m_matrix = true;  // false once cross stencils appear
};

// Finite-volume assembly: face conductances carry the weight at the face
// midpoint times the coefficient normal component (harmonic mean across the
// face for node-based coefficients); off-diagonal coefficient entries use
// centered cross stencils. `frozen` marks extra Dirichlet nodes.
AssembledSystem assemble(const OperatorSpec& spec, const Grid& grid, const WeightFn& weight,
                         const std::function<bool(const Vector&)>& frozen = nullptr);

struct SolveReport {
  double residual = 0.0;           // relative euclidean residual
  double weighted_residual = 0.0;  // residual in the weight-scaled norm
  int iterations = 0;
  std::string solver;
  bool positive = false;
};

// CG with incomplete-Cholesky preconditioning (deterministic), relative
// tolerance 1e-9 by default.
ScalarField solve_dirichlet(const AssembledSystem& sys,
                            const std::function<double(const Vector&)>& boundary_values,
                            const std::function<double(const Vector&)>& source,
                            SolveReport* report = nullptr, double tol = 1e-9, int max_iter = -1);

// Discrete Green function: unit point load at the node nearest Y, zero data
// on the boundary band; outer_data (when present) is imposed on the outer
// box faces, the truncation surrogate for the unbounded domain.
ScalarField green_function(const OperatorSpec& spec, const Grid& grid, const WeightFn& weight,
                           const Vector& pole, SolveReport* report = nullptr,
                           const std::function<double(const Vector&)>& outer_data = nullptr,
                           double tol = 1e-9);

// Positive solution vanishing on the boundary ball: Lu = 0 in B(x,2r), u = 0
// on the boundary part, u = outer_data outside B(x,2r).
ScalarField solve_boundary_ball(const OperatorSpec& spec, const Grid& grid, const WeightFn& weight,
                                const Vector& x, double r,
                                const std::function<double(const Vector&)>& outer_data,
                                SolveReport* report = nullptr, double tol = 1e-9);

struct GradientBoundResult {
  double sup = 0.0;
  std::size_t argmax_node = 0;
  Vector argmax;
};

// sup of delta |grad u| / u over valid nodes with delta >= 4h.
GradientBoundResult gradient_bound_check(const ScalarField& u);

// Derived fields for the Carleson integrands.
struct DerivedFields {
  std::vector<ScalarField> grad;
  ScalarField grad_norm;       // |grad u|
  ScalarField grad_sq;         // |grad u|^2
  ScalarField hess_norm;       // |grad^2 u|
  ScalarField grad_grad_norm;  // |grad |grad u||
  ScalarField grad_grad_sq;    // |grad (|grad u|^2)|
};
DerivedFields derive_fields(const ScalarField& u);

// Mask nodes within `radius` of the pole out of a field (in place).
void mask_near(ScalarField& f, const Vector& pole, double radius);

}  // namespace urlab
