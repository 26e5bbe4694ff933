#include "urlab/elliptic.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>

namespace urlab {

WeightFn weight_from_field(const SmoothDistanceField& field, const OperatorSpec& spec) {
  const double expo = spec.weight_exponent();
  if (expo == 0.0) return [](const Vector&) { return 1.0; };
  return [&field, expo](const Vector& X) { return field.weight(X, expo); };
}

WeightFn weight_from_oracle(const BoundarySample& sample, const OperatorSpec& spec,
                            double c_beta_value) {
  const double expo = spec.weight_exponent();
  const double c = std::pow(c_beta_value, -1.0 / spec.beta);
  if (expo == 0.0) return [](const Vector&) { return 1.0; };
  if (!sample.oracle) throw ParameterError("weight_from_oracle: sample has no oracle");
  const auto oracle = sample.oracle;
  return [oracle, c, expo](const Vector& X) { return std::pow(c * oracle(X), expo); };
}

AssembledSystem assemble(const OperatorSpec& spec, const Grid& grid, const WeightFn& weight,
                         const std::function<bool(const Vector&)>& frozen) {
  if (spec.n != grid.n()) throw DimensionError("assemble: operator/grid dimension mismatch");
  if (spec.d < spec.n - 1 && !spec.identity())
    throw ParameterError("assemble: d < n-1 admits only the identity coefficient");

  const int n = grid.n();
  const double h = grid.h();
  const double hpow = std::pow(h, n - 2);

  AssembledSystem sys;
  sys.grid = &grid;
  sys.row_of_node.assign(grid.size(), -1);

  auto is_free = [&](std::size_t i) {
    if (grid.cls(i) != NodeClass::Interior) return false;
    return !(frozen && frozen(grid.node(i)));
  };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (is_free(i)) {
      sys.row_of_node[i] = static_cast<long>(sys.node_of_row.size());
      sys.node_of_row.push_back(i);
    }
  }
  const long nfree = static_cast<long>(sys.node_of_row.size());
  if (nfree == 0) throw ParameterError("assemble: no free unknowns in the grid");

  std::vector<Eigen::Triplet<double>> ta, tb;
  double lmin = std::numeric_limits<double>::infinity(), lmax = 0.0;

  auto couple = [&](std::size_t i, std::size_t j, double coef) {
    // row for i (free), column j free or Dirichlet-coupled
    const long ri = sys.row_of_node[i];
    if (sys.row_of_node[j] >= 0)
      ta.emplace_back(ri, sys.row_of_node[j], coef);
    else
      tb.emplace_back(ri, static_cast<long>(j), coef);
  };

  for (long r = 0; r < nfree; ++r) {
    const std::size_t i = sys.node_of_row[r];
    const Vector Xi = grid.node(i);
    if (!spec.identity()) {
      const Matrix A = spec.coeff_at(Xi);
      if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + A.cwiseAbs().maxCoeff()))
        throw ParameterError("assemble: coefficient matrix must be symmetric");
      Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
      lmin = std::min(lmin, eig.eigenvalues().minCoeff());
      lmax = std::max(lmax, eig.eigenvalues().maxCoeff());
      if (eig.eigenvalues().minCoeff() <= 0)
        throw EllipticityError("assemble: coefficient matrix not positive definite");
    } else {
      lmin = std::min(lmin, 1.0);
      lmax = std::max(lmax, 1.0);
    }

    // axis fluxes through the faces
    for (int a = 0; a < n; ++a) {
      for (int dir = -1; dir <= 1; dir += 2) {
        std::size_t j;
        if (!grid.neighbor(i, a, dir, j))
          throw ParameterError("assemble: interior node touching the lattice edge");
        if (grid.cls(j) == NodeClass::Exterior) continue;  // no flux into the exterior
        Vector face = Xi;
        face[a] += 0.5 * dir * h;
        double aa = 1.0;
        if (!spec.identity()) {
          const double ai = spec.coeff_at(Xi)(a, a);
          const double aj = spec.coeff_at(grid.node(j))(a, a);
          aa = 2.0 * ai * aj / (ai + aj);  // harmonic mean across the face
        }
        const double c = hpow * weight(face) * aa;
        ta.emplace_back(r, r, c);
        couple(i, j, -c);
      }
    }

    // centered cross stencils for the off-diagonal coefficient entries
    if (!spec.identity()) {
      const Matrix M = spec.coeff_at(Xi);
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          if (a == b || M(a, b) == 0.0) continue;
          sys.m_matrix = false;
          const double kap = hpow * weight(Xi) * M(a, b) / 4.0;
          std::size_t pa, ma;
          if (!grid.neighbor(i, a, +1, pa) || !grid.neighbor(i, a, -1, ma)) continue;
          std::size_t pp, pm, mp, mm;
          if (!grid.neighbor(pa, b, +1, pp) || !grid.neighbor(pa, b, -1, pm) ||
              !grid.neighbor(ma, b, +1, mp) || !grid.neighbor(ma, b, -1, mm))
            continue;
          couple(i, pp, -kap);
          couple(i, pm, +kap);
          couple(i, mp, +kap);
          couple(i, mm, -kap);
        }
      }
    }
  }

  sys.A.resize(nfree, nfree);
  sys.A.setFromTriplets(ta.begin(), ta.end());
  sys.B.resize(nfree, static_cast<long>(grid.size()));
  sys.B.setFromTriplets(tb.begin(), tb.end());
  sys.lambda_min = lmin;
  sys.lambda_max = lmax;
  return sys;
}

ScalarField solve_dirichlet(const AssembledSystem& sys,
                            const std::function<double(const Vector&)>& boundary_values,
                            const std::function<double(const Vector&)>& source,
                            SolveReport* report, double tol, int max_iter) {
  const Grid& grid = *sys.grid;
  const long nfree = sys.A.rows();

  Vector g = Vector::Zero(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (sys.row_of_node[i] < 0 && grid.cls(i) != NodeClass::Exterior && boundary_values)
      g[i] = boundary_values(grid.node(i));

  Vector rhs = -(sys.B * g);
  if (source) {
    const double hn = std::pow(grid.h(), grid.n());
    for (long r = 0; r < nfree; ++r) rhs[r] += hn * source(grid.node(sys.node_of_row[r]));
  }

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double>>
      cg;
  cg.setTolerance(tol);
  if (max_iter > 0) cg.setMaxIterations(max_iter);
  cg.compute(sys.A);
  if (cg.info() != Eigen::Success)
    throw ConvergenceError("solve_dirichlet: preconditioner setup failed");
  const Vector x = cg.solve(rhs);
  if (cg.info() != Eigen::Success)
    throw ConvergenceError("solve_dirichlet: CG did not converge, residual " +
                           std::to_string(cg.error()));

  ScalarField u(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (sys.row_of_node[i] >= 0) {
      u.values[i] = x[sys.row_of_node[i]];
      u.valid[i] = 1;
    } else if (grid.cls(i) != NodeClass::Exterior) {
      u.values[i] = g[i];
      u.valid[i] = 1;
    }
  }
  if (report) {
    report->iterations = static_cast<int>(cg.iterations());
    const Vector res = sys.A * x - rhs;
    report->residual = res.norm() / std::max(1e-300, rhs.norm());
    // weight-scaled residual: rescale by the diagonal, the discrete analogue
    // of the weighted energy norm
    const Vector dinv = sys.A.diagonal().cwiseInverse();
    report->weighted_residual = (dinv.asDiagonal() * res).norm() /
                                std::max(1e-300, (dinv.asDiagonal() * rhs).norm());
    report->solver = "cg+ichol";
    report->positive = (x.minCoeff() >= -1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff()));
  }
  return u;
}

ScalarField green_function(const OperatorSpec& spec, const Grid& grid, const WeightFn& weight,
                           const Vector& pole, SolveReport* report,
                           const std::function<double(const Vector&)>& outer_data, double tol) {
  // nearest node to the pole
  std::vector<int> c(grid.n());
  for (int j = 0; j < grid.n(); ++j) {
    c[j] = static_cast<int>(std::llround((pole[j] - grid.lo()[j]) / grid.h()));
    c[j] = std::clamp(c[j], 0, grid.dims()[j] - 1);
  }
  const std::size_t pole_node = grid.index(c);
  if (grid.cls(pole_node) != NodeClass::Interior)
    throw PlacementError("green_function: pole on a Dirichlet or exterior node");
  if (grid.delta(pole_node) < 8.0 * grid.h())
    throw PlacementError("green_function: pole too close to the boundary (needs delta >= 8h)");

  const AssembledSystem sys = assemble(spec, grid, weight);
  const long prow = sys.row_of_node[pole_node];

  Vector g = Vector::Zero(grid.size());
  if (outer_data)
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (sys.row_of_node[i] < 0 && grid.on_outer_face(i)) g[i] = outer_data(grid.node(i));
  Vector rhs = -(sys.B * g);
  rhs[prow] += 1.0;

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double>>
      cg;
  cg.setTolerance(tol);
  cg.compute(sys.A);
  const Vector x = cg.solve(rhs);
  if (cg.info() != Eigen::Success)
    throw ConvergenceError("green_function: CG did not converge, residual " +
                           std::to_string(cg.error()));
  ScalarField u(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (sys.row_of_node[i] >= 0) {
      u.values[i] = x[sys.row_of_node[i]];
      u.valid[i] = 1;
    } else if (grid.cls(i) != NodeClass::Exterior) {
      u.values[i] = g[i];
      u.valid[i] = 1;
    }
  }
  if (report) {
    report->iterations = static_cast<int>(cg.iterations());
    report->residual = cg.error();
    report->weighted_residual = cg.error();
    report->solver = "cg+ichol";
    report->positive = x.minCoeff() >= -1e-10 * std::max(1.0, x.maxCoeff());
  }
  return u;
}

ScalarField solve_boundary_ball(const OperatorSpec& spec, const Grid& grid, const WeightFn& weight,
                                const Vector& x, double r,
                                const std::function<double(const Vector&)>& outer_data,
                                SolveReport* report, double tol) {
  if (!outer_data) throw TrivialityError("solve_boundary_ball: outer data required");
  auto frozen = [x, r](const Vector& X) { return (X - x).norm() >= 2.0 * r; };
  const AssembledSystem sys = assemble(spec, grid, weight, frozen);
  bool nontrivial = false;
  auto data = [&](const Vector& X) {
    if ((X - x).norm() >= 2.0 * r) {
      const double v = outer_data(X);
      if (v < 0) throw ParameterError("solve_boundary_ball: outer data must be >= 0");
      if (v > 0) nontrivial = true;
      return v;
    }
    return 0.0;  // boundary band inside the ball
  };
  ScalarField u = solve_dirichlet(sys, data, nullptr, report, tol);
  if (!nontrivial)
    throw TrivialityError("solve_boundary_ball: outer data vanishes on the sphere");
  return u;
}

GradientBoundResult gradient_bound_check(const ScalarField& u) {
  const Grid& g = *u.grid;
  const std::vector<ScalarField> grad = gradient(u);
  GradientBoundResult out;
  bool found = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.delta(i) < 4.0 * g.h()) continue;
    bool ok = u.valid[i];
    double s = 0;
    for (const ScalarField& c : grad) {
      ok = ok && c.valid[i];
      if (ok) s += c.values[i] * c.values[i];
    }
    if (!ok) continue;
    if (u.values[i] <= 0.0)
      throw PositivityError("gradient_bound_check: nonpositive u at a tested node");
    const double val = g.delta(i) * std::sqrt(s) / u.values[i];
    if (val > out.sup) {
      out.sup = val;
      out.argmax_node = i;
      found = true;
    }
  }
  if (found) out.argmax = g.node(out.argmax_node);
  return out;
}

DerivedFields derive_fields(const ScalarField& u) {
  DerivedFields f;
  f.grad = gradient(u);
  f.grad_norm = magnitude(f.grad);
  f.grad_sq = squared_magnitude(f.grad);
  f.hess_norm = hessian_norm(u);
  f.grad_grad_norm = magnitude(gradient(f.grad_norm));
  f.grad_grad_sq = magnitude(gradient(f.grad_sq));
  return f;
}

void mask_near(ScalarField& f, const Vector& pole, double radius) {
  const Grid& g = *f.grid;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (f.valid[i] && (g.node(i) - pole).norm() < radius) f.valid[i] = 0;
}

}  // namespace urlab
