#include "urlab/urdiag.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace urlab {

namespace {

// distance from a point to the sample for the plane-to-set sup: oracle when
// available, atoms + tail otherwise
double set_distance(const BoundarySample& s, const Vector& y) {
  return s.oracle ? s.oracle(y) : sample_distance(s, y);
}

struct PlaneParam {
  Vector point;
  Matrix frame;   // n x d
  Matrix normal;  // n x (n-d)
};

// bilateral objective of the cube against a candidate plane
double beta_objective(const BoundarySample& s, const std::vector<int>& atoms, const Vector& xq,
                      double radius, double scale, const PlaneParam& P) {
  double sup_set = 0.0;
  for (int i : atoms) {
    const Vector y = s.points.row(i).transpose() - P.point;
    sup_set = std::max(sup_set, (P.normal.transpose() * y).norm());
  }
  // lattice of pitch scale/32 on P ∩ 2B_Q
  const int d = static_cast<int>(P.frame.cols());
  const double pitch = scale / 32.0;
  const int m = static_cast<int>(std::floor(radius / pitch));
  double sup_plane = 0.0;
  // project the ball center onto the plane to anchor the lattice
  const Vector anchor = P.point + P.frame * (P.frame.transpose() * (xq - P.point));
  std::vector<int> c(d, -m);
  while (true) {
    Vector p = anchor;
    for (int j = 0; j < d; ++j) p += (c[j] * pitch) * P.frame.col(j);
    if ((p - xq).norm() <= radius) sup_plane = std::max(sup_plane, set_distance(s, p));
    int j = d - 1;
    while (j >= 0 && c[j] == m) {
      c[j] = -m;
      --j;
    }
    if (j < 0) break;
    ++c[j];
  }
  return (sup_set + sup_plane) / scale;
}

PlaneParam lsq_seed(const BoundarySample& s, const std::vector<int>& atoms, int d, int n) {
  PlaneParam P;
  Vector m = Vector::Zero(n);
  double w = 0;
  for (int i : atoms) {
    m += s.weights[i] * s.points.row(i).transpose();
    w += s.weights[i];
  }
  m /= w;
  Matrix C = Matrix::Zero(n, n);
  for (int i : atoms) {
    const Vector y = s.points.row(i).transpose() - m;
    C += s.weights[i] * (y * y.transpose());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(C);
  P.point = m;
  P.frame = eig.eigenvectors().rightCols(d);
  P.normal = eig.eigenvectors().leftCols(n - d);
  return P;
}

}  // namespace

double bbeta_inf(const BoundarySample& sample, const ChristForest& forest, int cube_id,
                 double* seed_value) {
  const ChristCube& q = forest.cubes[cube_id];
  const double scale = q.scale();
  const double radius = 2.0 * scale;  // 2B_Q
  const int n = sample.n;
  const double dr = std::round(sample.d);
  if (std::abs(sample.d - dr) > 1e-9) throw ParameterError("bbeta_inf: d must be an integer");
  const int d = static_cast<int>(dr);

  std::vector<int> atoms;
  for (int i = 0; i < sample.count(); ++i)
    if ((sample.points.row(i).transpose() - q.center).norm() <= radius) atoms.push_back(i);
  if (static_cast<int>(atoms.size()) < d + 1)
    throw FitError("bbeta_inf: fewer than d+1 atoms in 2B_Q");

  PlaneParam P = lsq_seed(sample, atoms, d, n);
  double best = beta_objective(sample, atoms, q.center, radius, scale, P);
  if (seed_value) *seed_value = best;

  // deterministic compass search over normal offsets and frame/normal tilts,
  // budget 200 objective evaluations
  const int n_off = n - d;
  const int n_tilt = d * (n - d);
  std::vector<double> theta(n_off + n_tilt, 0.0);
  const PlaneParam P0 = P;
  auto realize = [&](const std::vector<double>& th) {
    PlaneParam R = P0;
    Vector shift = Vector::Zero(n);
    for (int j = 0; j < n_off; ++j) shift += th[j] * P0.normal.col(j);
    R.point = P0.point + shift;
    // tilt: mix tangent directions into the normals, re-orthonormalize
    Matrix N = P0.normal;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < n_off; ++b) N.col(b) += th[n_off + a * n_off + b] * P0.frame.col(a);
    // Gram-Schmidt on [N | frame]
    Matrix full(n, n);
    full.leftCols(n_off) = N;
    full.rightCols(d) = P0.frame;
    const Eigen::HouseholderQR<Matrix> qr(full);
    Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
    R.normal = Q.leftCols(n_off);
    R.frame = Q.rightCols(d);
    return R;
  };

  double step_off = 0.2 * scale;
  double step_tilt = 0.2;
  int evals = 0;
  while (evals < 200) {
    bool improved = false;
    for (size_t j = 0; j < theta.size() && evals < 200; ++j) {
      const double step = j < static_cast<size_t>(n_off) ? step_off : step_tilt;
      for (int dir = -1; dir <= 1 && evals < 200; dir += 2) {
        std::vector<double> cand = theta;
        cand[j] += dir * step;
        const double v =
            beta_objective(sample, atoms, q.center, radius, scale, realize(cand));
        ++evals;
        if (v < best - 1e-15) {
          best = v;
          theta = cand;
          improved = true;
        }
      }
    }
    if (!improved) {
      step_off *= 0.5;
      step_tilt *= 0.5;
      if (step_off < 1e-4 * scale) break;
    }
  }
  return best;
}

BetaReport bwgl_report(const BoundarySample& sample, const ChristForest& forest, double epsilon,
                       int threads) {
  if (epsilon <= 0) throw ParameterError("bwgl_report: epsilon must be > 0");
  BetaReport rep;
  rep.epsilon = epsilon;
  std::vector<char> bad(forest.cubes.size(), 0);
  rep.entries.resize(forest.cubes.size());
  parallel_for(forest.cubes.size(), threads, [&](std::size_t idx) {
    const ChristCube& q = forest.cubes[idx];
    BetaEntry e;
    e.cube_id = q.id;
    e.k = q.k;
    try {
      e.bbeta = bbeta_inf(sample, forest, q.id, &e.seed_value);
    } catch (const FitError&) {
      // resolution exhausted: a cube this small carries no plane information,
      // count it bad
      e.bbeta = std::numeric_limits<double>::infinity();
    }
    e.bad = e.bbeta > epsilon;
    bad[q.id] = e.bad ? 1 : 0;
    rep.entries[idx] = e;
  });
  for (int root : forest.roots) {
    const double ratio = packing_sum(
        forest, [&](const ChristCube& q) { return bad[q.id] != 0; }, root);
    rep.root_ratios.emplace_back(root, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  return rep;
}

void write_beta_csv(const BetaReport& report, const ChristForest& forest,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_beta_csv: cannot open " + path);
  out << "cube_id,k,bbeta,is_bad\n";
  char buf[64];
  for (const BetaEntry& e : report.entries) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.bbeta);
    out << e.cube_id << "," << e.k << "," << buf << "," << (e.bad ? 1 : 0) << "\n";
  }
  for (const auto& [root, ratio] : report.root_ratios) {
    std::snprintf(buf, sizeof(buf), "%.17g", ratio);
    out << "# root " << root << " bad_mass_ratio " << buf << " (epsilon "
        << report.epsilon << ")\n";
  }
  (void)forest;
}

EikonalReport eikonal_distance_check(const ScalarField& G, double osc_tol, double zero_tol) {
  const Grid& grid = *G.grid;
  EikonalReport rep;

  std::vector<Vector> zeros;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (G.valid[i] && std::abs(G.values[i]) <= zero_tol) zeros.push_back(grid.node(i));
  if (zeros.empty()) throw DomainError("eikonal_distance_check: empty zero set");

  // exact brute-force distance to the zero set per node
  std::vector<double> dz(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vector X = grid.node(i);
    double dist = std::numeric_limits<double>::infinity();
    for (const Vector& z : zeros) dist = std::min(dist, (X - z).norm());
    dz[i] = dist;
  }

  // |grad G| oscillation away from the zero set (the gradient is not defined
  // across it)
  const ScalarField gn = magnitude(gradient(G));
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, mean = 0.0;
  long count = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!gn.valid[i] || dz[i] < 4.0 * grid.h() || grid.delta(i) < 4.0 * grid.h()) continue;
    lo = std::min(lo, gn.values[i]);
    hi = std::max(hi, gn.values[i]);
    mean += gn.values[i];
    ++count;
  }
  if (count == 0) throw DomainError("eikonal_distance_check: empty gradient mask");
  mean /= static_cast<double>(count);
  rep.c = mean;
  rep.oscillation = (hi - lo) / std::max(1e-300, mean);
  rep.is_const_grad = rep.oscillation < osc_tol && mean > 0;
  if (!rep.is_const_grad) return rep;

  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!G.valid[i] || grid.cls(i) != NodeClass::Interior) continue;
    rep.max_deviation = std::max(rep.max_deviation, std::abs(G.values[i] - rep.c * dz[i]));
  }
  return rep;
}

ConvexBodySpec make_unit_disk_chart() {
  ConvexBodySpec b;
  b.n = 2;
  b.phi = [](const Vector& y) { return std::sqrt(1.0 - y[0] * y[0]) - 1.0; };
  b.phi_grad = [](const Vector& y) {
    Vector g(1);
    g[0] = -y[0] / std::sqrt(1.0 - y[0] * y[0]);
    return g;
  };
  b.phi_hess = [](const Vector& y) {
    Matrix h(1, 1);
    const double s = 1.0 - y[0] * y[0];
    h(0, 0) = -1.0 / (s * std::sqrt(s));
    return h;
  };
  b.lambdas = Vector::Ones(1);
  return b;
}

ConvexBodySpec make_plane_chart(int n) {
  ConvexBodySpec b;
  b.n = n;
  b.phi = [](const Vector&) { return 0.0; };
  b.phi_grad = [n](const Vector&) { return Vector::Zero(n - 1); };
  b.phi_hess = [n](const Vector&) { return Matrix::Zero(n - 1, n - 1); };
  b.lambdas = Vector::Zero(n - 1);
  return b;
}

ConvexBodySpec make_paraboloid_chart(const Vector& lambdas) {
  ConvexBodySpec b;
  b.n = static_cast<int>(lambdas.size()) + 1;
  if ((lambdas.array() < 0).any())
    throw ParameterError("paraboloid chart: curvatures must be >= 0");
  const Vector l = lambdas;
  b.phi = [l](const Vector& y) { return -0.5 * y.dot(l.asDiagonal() * y); };
  b.phi_grad = [l](const Vector& y) { return Vector(-(l.asDiagonal() * y)); };
  b.phi_hess = [l](const Vector&) { return Matrix(-Matrix(l.asDiagonal())); };
  b.lambdas = lambdas;
  return b;
}

double convex_body_distance(const ConvexBodySpec& body, const Vector& X) {
  const int m = body.n - 1;
  const Vector Xy = X.head(m);
  const double Xs = X[body.n - 1];
  // minimize F(y) = 1/2 |(y, phi(y)) - X|^2 by damped Newton from y = Xy
  Vector y = Xy;
  for (int it = 0; it < 200; ++it) {
    const double p = body.phi(y);
    const Vector g = body.phi_grad(y);
    const Matrix H = body.phi_hess(y);
    const Vector grad = (y - Xy) - (Xs - p) * g;
    Matrix hess = Matrix::Identity(m, m) + g * g.transpose() - (Xs - p) * H;
    // Levenberg damping keeps the step well-defined away from convexity
    double mu = 0.0;
    Eigen::LLT<Matrix> llt(hess);
    while (llt.info() != Eigen::Success && mu < 1e6) {
      mu = mu == 0.0 ? 1e-8 : mu * 10.0;
      llt.compute(hess + mu * Matrix::Identity(m, m));
    }
    const Vector step = llt.solve(grad);
    // backtracking on the objective
    auto F = [&](const Vector& yy) {
      const double ps = body.phi(yy);
      return 0.5 * ((yy - Xy).squaredNorm() + (Xs - ps) * (Xs - ps));
    };
    const double f0 = F(y);
    double t = 1.0;
    Vector ynew = y - t * step;
    int back = 0;
    while (F(ynew) > f0 - 1e-12 * step.norm() && back < 60) {
      t *= 0.5;
      ynew = y - t * step;
      ++back;
    }
    if (back >= 60) throw ProjectionError("convex_body_distance: line search failed");
    const double moved = (ynew - y).norm();
    y = ynew;
    if (moved < 1e-10) break;
    if (it == 199) throw ProjectionError("convex_body_distance: Newton did not converge");
  }
  const double p = body.phi(y);
  Vector q(body.n);
  q.head(m) = y;
  q[body.n - 1] = p;
  return (X - q).norm();
}

ConvexHessianReport convex_distance_hessian(const ConvexBodySpec& body, double t,
                                            const Matrix& coeff) {
  if (t <= 0) throw ParameterError("convex_distance_hessian: t must be > 0");
  const int n = body.n;
  Vector X = Vector::Zero(n);
  X[n - 1] = t;

  ConvexHessianReport rep;
  rep.closed_form = Matrix::Zero(n, n);
  for (int i = 0; i < n - 1; ++i) {
    const double li = body.lambdas[i];
    rep.closed_form(i, i) = li / ((1.0 + t * li) * (1.0 + t * li));
  }

  const double h = 5e-3 * (1.0 + t);
  rep.fd_hessian = Matrix::Zero(n, n);
  const double d0 = convex_body_distance(body, X);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      double val;
      if (a == b) {
        const Vector e = Vector::Unit(n, a);
        val = (convex_body_distance(body, X + h * e) - 2.0 * d0 +
               convex_body_distance(body, X - h * e)) /
              (h * h);
      } else {
        const Vector ea = Vector::Unit(n, a), eb = Vector::Unit(n, b);
        val = (convex_body_distance(body, X + h * (ea + eb)) -
               convex_body_distance(body, X + h * (ea - eb)) -
               convex_body_distance(body, X + h * (eb - ea)) +
               convex_body_distance(body, X - h * (ea + eb))) /
              (4.0 * h * h);
      }
      rep.fd_hessian(a, b) = rep.fd_hessian(b, a) = val;
    }
  }
  rep.discrepancy = (rep.fd_hessian - rep.closed_form).cwiseAbs().maxCoeff();
  rep.L_delta = -(coeff.array() * rep.fd_hessian.array()).sum();
  return rep;
}

}  // namespace urlab
