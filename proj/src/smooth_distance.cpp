#include "urlab/smooth_distance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "urlab/quadrature.hpp"

namespace urlab {

namespace {

struct QuadNode {
  double v;  // in (0,1), kept exact near 0
  double w;
};

// tanh-sinh nodes for (0,1); fixed level keeps evaluations deterministic.
// Only the near-0 representation is stored exactly; ray substitutions place
// the far field at v -> 0.
const std::vector<QuadNode>& unit_quad_nodes() {
  static const std::vector<QuadNode> nodes = [] {
    std::vector<QuadNode> out;
    const double h = 1.0 / 16.0;
    const int k_max = static_cast<int>(std::ceil(std::asinh(2.0 / kPi * 700.0) / h));
    for (int k = 0; k <= k_max; ++k) {
      const double t = k * h;
      const double sh = 0.5 * kPi * std::sinh(t);
      const double ch = std::cosh(sh);
      const double w = h * 0.5 * kPi * std::cosh(t) / (ch * ch);
      if (0.5 * w < 1e-320) break;
      const double om = 2.0 / (std::exp(2.0 * sh) + 1.0);  // 1 - tanh(sh)
      if (k == 0) {
        out.push_back({0.5, 0.5 * w});
      } else if (0.5 * om > 0.0) {
        out.push_back({0.5 * om, 0.5 * w});  // near 0
        const double near1 = 1.0 - 0.5 * om;
        if (near1 < 1.0) out.push_back({near1, 0.5 * w});
      }
    }
    return out;
  }();
  return nodes;
}

}  // namespace

SmoothDistanceField::SmoothDistanceField(const BoundarySample& sample, double beta, double theta,
                                         double mac_tol)
    : sample_(&sample), beta_(beta), s_(sample.d + beta), theta_(theta), mac_tol_(mac_tol) {
  if (beta <= 0) throw ParameterError("SmoothDistanceField: beta must be > 0");
  const double dr = std::round(sample.d);
  c_beta_ = (std::abs(sample.d - dr) < 1e-9 && dr >= 1) ? c_beta(static_cast<int>(dr), beta)
                                                        : std::numeric_limits<double>::quiet_NaN();
}

double SmoothDistanceField::plane_gradient() const {
  if (!std::isfinite(c_beta_))
    throw ParameterError("plane_gradient: c_beta needs integer d >= 1");
  return std::pow(c_beta_, -1.0 / beta_);
}

void SmoothDistanceField::accumulate_kernel(const Vector& u, double w, int order,
                                            Jet2& out) const {
  const double r2 = u.squaredNorm();
  const double r = std::sqrt(r2);
  const double K = w * std::pow(r, -s_);
  out.value += K;
  if (order >= 1) out.grad -= (s_ * K / r2) * u;
  if (order >= 2) {
    const double c2 = s_ * K / r2;
    out.hess -= c2 * Matrix::Identity(u.size(), u.size());
    out.hess += (c2 * (s_ + 2.0) / r2) * (u * u.transpose());
  }
}

Jet2 SmoothDistanceField::r_beta_direct(const Vector& X, int order) const {
  Jet2 out;
  out.order = order;
  const int n = sample_->n;
  out.grad = Vector::Zero(n);
  out.hess = Matrix::Zero(n, n);
  for (int i = 0; i < sample_->count(); ++i)
    accumulate_kernel(X - sample_->points.row(i).transpose(), sample_->weights[i], order, out);
  tail_jet(X, order, out);
  return out;
}

Jet2 SmoothDistanceField::r_beta_tree(const Vector& X, int order) const {
  Jet2 out;
  out.order = order;
  const int n = sample_->n;
  out.grad = Vector::Zero(n);
  out.hess = Matrix::Zero(n, n);
  const ClusterTree& tree = *sample_->tree;
  const double bound_c = std::pow(s_ + order + 2.0, 2.0);
  // explicit stack; acceptance requires the monopole second-moment bound to
  // clear mac_tol, with a hard 4*radius proximity fallback
  std::vector<int> stack{tree.root()};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    const ClusterTree::Node& nd = tree.nodes()[id];
    const double R = (X - nd.centroid).norm();
    const double q = nd.radius / std::max(R, 1e-300);
    const bool far_enough = R > 4.0 * nd.radius && q <= theta_ &&
                            bound_c * q * q / std::pow(1.0 - q, s_ + order + 2.0) <= mac_tol_;
    if (far_enough) {
      accumulate_kernel(X - nd.centroid, nd.weight, order, out);
    } else if (nd.leaf()) {
      for (int i = nd.begin; i < nd.end; ++i) {
        const int a = tree.order()[i];
        accumulate_kernel(X - sample_->points.row(a).transpose(), sample_->weights[a], order, out);
      }
    } else {
      stack.push_back(nd.right);
      stack.push_back(nd.left);
    }
  }
  tail_jet(X, order, out);
  return out;
}

void SmoothDistanceField::tail_jet(const Vector& X, int order, Jet2& out) const {
  if (!sample_->tail) return;
  const FlatTail& t = *sample_->tail;
  const int n = sample_->n;
  const Vector v = X - t.origin;
  for (int sign = -1; sign <= 1; sign += 2) {
    for (const QuadNode& qn : unit_quad_nodes()) {
      if (qn.v < 1e-100) continue;  // the kernel decays faster than 1/v^2 grows
      // sigma = L + (1-v)/v sends v -> 0 to the far end of the ray
      const double sigma = sign * (t.half_extent + (1.0 - qn.v) / qn.v);
      const double jac = qn.w / (qn.v * qn.v);
      Jet2 tmp;
      tmp.order = order;
      tmp.grad = Vector::Zero(n);
      tmp.hess = Matrix::Zero(n, n);
      accumulate_kernel(v - sigma * t.axis, jac, order, tmp);
      out.value += tmp.value;
      if (order >= 1) out.grad += tmp.grad;
      if (order >= 2) out.hess += tmp.hess;
    }
  }
}

Jet2 SmoothDistanceField::d_from_r(const Jet2& R, int order) const {
  Jet2 D;
  D.order = order;
  const double p = -1.0 / beta_;
  D.value = std::pow(R.value, p);
  if (order >= 1) D.grad = p * std::pow(R.value, p - 1.0) * R.grad;
  if (order >= 2)
    D.hess = p * std::pow(R.value, p - 1.0) * R.hess +
             p * (p - 1.0) * std::pow(R.value, p - 2.0) * (R.grad * R.grad.transpose());
  return D;
}

double SmoothDistanceField::r_beta_raw(const Vector& X) const {
  return r_beta_tree(X, 0).value;
}

double SmoothDistanceField::weight(const Vector& X, double exponent) const {
  if (exponent == 0.0) return 1.0;
  return std::pow(r_beta_raw(X), -exponent / beta_);
}

SmoothDistanceEval SmoothDistanceField::evaluate(const Vector& X, int order) const {
  SmoothDistanceEval ev;
  ev.delta = dist_to_boundary(*sample_, X);
  if (ev.delta <= 2.0 * sample_->spacing) {
    const auto [atom, dist] = sample_->tree->nearest(X);
    throw ResolutionError("eval_smooth_distance: probe within kernel resolution of atom " +
                          std::to_string(atom) + " (dist " + std::to_string(dist) + ")");
  }
  ev.R = r_beta_tree(X, order);
  ev.D = d_from_r(ev.R, order);
  return ev;
}

double SmoothDistanceField::r_beta_truncated(const Vector& X, double radius) const {
  double sum = 0.0;
  for (int i = 0; i < sample_->count(); ++i) {
    const Vector u = X - sample_->points.row(i).transpose();
    if (u.norm() <= radius) sum += sample_->weights[i] * std::pow(u.norm(), -s_);
  }
  return sum;
}

PlaneFit SmoothDistanceField::best_plane(const Vector& X) const {
  const double dr = std::round(sample_->d);
  if (std::abs(sample_->d - dr) > 1e-9) throw ParameterError("best_plane: d must be an integer");
  const int d = static_cast<int>(dr);
  const int n = sample_->n;
  const double delta = dist_to_boundary(*sample_, X);
  if (delta <= 0) throw ParameterError("best_plane: probe on the boundary");
  const double radius = 100.0 * delta;

  // Orientation weights carry the Hessian-order kernel |X-y|^{-d-beta-2}:
  // with the bare |X-y|^{-d-beta} weight the second moment of a curved set is
  // dominated by the far field and the fitted plane loses the local tangent.
  double wsum = 0.0;
  Vector m = Vector::Zero(n);
  std::vector<std::pair<int, double>> local;
  for (int i = 0; i < sample_->count(); ++i) {
    const Vector y = sample_->points.row(i).transpose();
    const double dist = (y - X).norm();
    if (dist > radius) continue;
    const double w = sample_->weights[i] * std::pow(dist, -s_ - 2.0);
    local.emplace_back(i, w);
    wsum += w;
    m += w * y;
  }
  if (static_cast<int>(local.size()) < d + 1)
    throw FitError("best_plane: fewer than d+1 atoms within 100 delta");
  m /= wsum;
  Matrix C = Matrix::Zero(n, n);
  for (const auto& [i, w] : local) {
    const Vector y = sample_->points.row(i).transpose() - m;
    C += w * (y * y.transpose());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(C);
  PlaneFit fit;
  fit.point = m;
  fit.frame = eig.eigenvectors().rightCols(d);    // largest spread directions
  fit.normal = eig.eigenvectors().leftCols(n - d);
  // deterministic signs: normals point toward X, tangents have positive
  // leading coefficient
  for (int j = 0; j < fit.normal.cols(); ++j) {
    const double dot = fit.normal.col(j).dot(X - m);
    if (dot < 0 || (dot == 0 && fit.normal.col(j).sum() < 0)) fit.normal.col(j) *= -1.0;
  }
  for (int j = 0; j < fit.frame.cols(); ++j) {
    int imax = 0;
    fit.frame.col(j).cwiseAbs().maxCoeff(&imax);
    if (fit.frame(imax, j) < 0) fit.frame.col(j) *= -1.0;
  }

  if (!aux_d1_) aux_d1_ = std::make_shared<SmoothDistanceField>(*sample_, 1.0, theta_, mac_tol_);
  if (!aux_dhalf_)
    aux_dhalf_ = std::make_shared<SmoothDistanceField>(*sample_, 0.5, theta_, mac_tol_);
  fit.D1 = aux_d1_->evaluate(X, 0).D.value;
  fit.Dhalf = aux_dhalf_->evaluate(X, 0).D.value;
  const double c1 = c_beta(d, 1.0);
  const double chalf = c_beta(d, 0.5);
  fit.c_x = (c1 / (chalf * chalf)) * fit.D1 / fit.Dhalf;
  return fit;
}

Jet2 SmoothDistanceField::plane_kernel_jet(const PlaneFit& fit, const Vector& X, int order) const {
  if (!std::isfinite(c_beta_)) throw ParameterError("plane_kernel_jet: c_beta needs integer d");
  const int n = sample_->n;
  const Matrix PN = fit.normal * fit.normal.transpose();
  const Vector w = PN * (X - fit.point);
  const double rho = w.norm();
  if (rho <= 0) throw ParameterError("plane_kernel_jet: probe on the fitted plane");
  Jet2 out;
  out.order = order;
  out.value = c_beta_ * std::pow(rho, -beta_);
  out.grad = Vector::Zero(n);
  out.hess = Matrix::Zero(n, n);
  if (order >= 1) out.grad = -beta_ * c_beta_ * std::pow(rho, -beta_ - 2.0) * w;
  if (order >= 2)
    out.hess = -beta_ * c_beta_ *
               (std::pow(rho, -beta_ - 2.0) * PN -
                (beta_ + 2.0) * std::pow(rho, -beta_ - 4.0) * (w * w.transpose()));
  return out;
}

double SmoothDistanceField::flatness_deficit(const Vector& X, const std::vector<int>& kappa) const {
  return flatness_deficit(X, kappa, best_plane(X));
}

double SmoothDistanceField::flatness_deficit(const Vector& X, const std::vector<int>& kappa,
                                             const PlaneFit& fit) const {
  int order = 0;
  for (int k : kappa) order += k;
  if (order > 2) throw ParameterError("flatness_deficit: |kappa| <= 2");
  const SmoothDistanceEval ev = evaluate(X, order);
  const Jet2 pl = plane_kernel_jet(fit, X, order);
  double lhs = 0.0, rhs = 0.0;
  if (order == 0) {
    lhs = ev.R.value;
    rhs = pl.value;
  } else if (order == 1) {
    int i = 0;
    while (kappa[i] == 0) ++i;
    lhs = ev.R.grad[i];
    rhs = pl.grad[i];
  } else {
    int i = -1, j = -1;
    for (size_t k = 0; k < kappa.size(); ++k) {
      if (kappa[k] == 2) i = j = static_cast<int>(k);
      if (kappa[k] == 1) (i < 0 ? i : j) = static_cast<int>(k);
    }
    lhs = ev.R.hess(i, j);
    rhs = pl.hess(i, j);
  }
  return std::pow(ev.delta, beta_ + order) * std::abs(lhs - fit.c_x * rhs);
}

DemIntegrands SmoothDistanceField::dem_integrands(const Vector& X) const {
  return dem_from_eval(evaluate(X, 2));
}

DemIntegrands SmoothDistanceField::dem_from_eval(const SmoothDistanceEval& ev) const {
  const Vector& g = ev.D.grad;
  const Matrix& H = ev.D.hess;
  const double delta = ev.delta;
  const double gn = g.norm();
  DemIntegrands out;
  const Vector Hg = H * g;
  out.g2 = delta * 2.0 * Hg.norm();
  out.g1 = gn > 0 ? delta * Hg.norm() / gn : 0.0;
  out.threshold = 0.5 * plane_gradient();
  out.ind = gn < out.threshold ? 1.0 : 0.0;
  const double expo = sample_->d + 1.0 - sample_->n;
  const double div = expo * std::pow(ev.D.value, expo - 1.0) * g.squaredNorm() +
                     std::pow(ev.D.value, expo) * H.trace();
  out.wdiv = std::pow(delta, sample_->n - sample_->d) * std::abs(div);
  return out;
}

Matrix read_probes(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw Error("read_probes: cannot open " + path);
  std::vector<double> coords;
  std::string line;
  long rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    for (int j = 0; j < n; ++j) {
      double v;
      if (!(ls >> v)) throw ParameterError("read_probes: short row in " + path);
      coords.push_back(v);
    }
    ++rows;
  }
  Matrix out(rows, n);
  for (long i = 0; i < rows; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = coords[i * n + j];
  return out;
}

void write_probe_batch(const SmoothDistanceField& field, const Matrix& probes,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_probe_batch: cannot open " + path);
  const int n = field.sample().n;
  char buf[64];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << " ";
  };
  for (int p = 0; p < probes.rows(); ++p) {
    const Vector X = probes.row(p).transpose();
    for (int j = 0; j < n; ++j) emit(X[j]);
    try {
      const SmoothDistanceEval ev = field.evaluate(X, 2);
      emit(ev.delta);
      emit(ev.D.value);
      for (int j = 0; j < n; ++j) emit(ev.D.grad[j]);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) emit(ev.D.hess(i, j));
    } catch (const ResolutionError&) {
      emit(dist_to_boundary(field.sample(), X));
      for (int j = 0; j < 1 + n + n * n; ++j) emit(std::nan(""));
    }
    out << "\n";
  }
}

}  // namespace urlab
