#include "urlab/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace urlab {

std::string to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::plane: return "plane";
    case BoundaryKind::lipschitz_graph: return "lipschitz_graph";
    case BoundaryKind::circle: return "circle";
    case BoundaryKind::four_corner_cantor: return "four_corner_cantor";
    case BoundaryKind::low_dim_plane: return "low_dim_plane";
    case BoundaryKind::custom: return "custom";
  }
  return "custom";
}

BoundaryKind boundary_kind_from_string(const std::string& s) {
  if (s == "plane") return BoundaryKind::plane;
  if (s == "lipschitz_graph") return BoundaryKind::lipschitz_graph;
  if (s == "circle") return BoundaryKind::circle;
  if (s == "four_corner_cantor") return BoundaryKind::four_corner_cantor;
  if (s == "low_dim_plane") return BoundaryKind::low_dim_plane;
  if (s == "custom") return BoundaryKind::custom;
  throw ParameterError("unknown boundary kind: " + s);
}

void finalize_sample(BoundarySample& sample, bool record_ahlfors) {
  if (sample.count() == 0) throw ParameterError("boundary sample has no atoms");
  if ((sample.weights.array() <= 0).any())
    throw ParameterError("boundary weights must be positive");
  sample.tree = std::make_shared<ClusterTree>(sample.points, sample.weights);
  if (sample.diam <= 0) {
    Vector lo = sample.points.colwise().minCoeff();
    Vector hi = sample.points.colwise().maxCoeff();
    sample.diam = (hi - lo).norm();
  }
  if (record_ahlfors && sample.count() > 4) {
    AhlforsReport rep = verify_ahlfors(sample, 64);
    sample.ahlfors_constant = rep.c_sigma;
  }
}

double graph_flat_from(double extent) {
  // Largest even integer <= 3/4 extent; the triangle wave vanishes there, so
  // the graph continues as the flat line the tail model assumes.
  double f = 2.0 * std::floor(0.375 * extent);
  return std::max(2.0, f);
}

double graph_profile(double x, double slope, double flat_from) {
  if (std::abs(x) >= flat_from) return 0.0;
  // 1-Lipschitz triangle wave with zeros at even integers, peaks 1 at odd.
  const double m = std::fabs(std::remainder(x, 2.0));  // in [0,1]
  return slope * m;
}

BoundarySample make_plane(const PlaneParams& p) {
  if (p.spacing <= 0 || p.extent <= 0) throw ParameterError("plane: extent and spacing must be > 0");
  if (p.d < 1 || p.d >= p.n) throw DimensionError("plane: need 1 <= d < n");
  if (p.d > 2) throw ParameterError("plane: only d = 1, 2 supported");
  const int m = static_cast<int>(std::llround(2.0 * p.extent / p.spacing)) + 1;
  BoundarySample s;
  s.kind = BoundaryKind::plane;
  s.d = p.d;
  s.n = p.n;
  s.spacing = p.spacing;
  if (p.d == 1) {
    s.points = Matrix::Zero(m, p.n);
    for (int i = 0; i < m; ++i) s.points(i, 0) = -p.extent + i * p.spacing;
    s.weights = Vector::Constant(m, p.spacing);
    FlatTail tail;
    tail.origin = Vector::Zero(p.n);
    tail.axis = Vector::Unit(p.n, 0);
    tail.half_extent = p.extent + 0.5 * p.spacing;
    s.tail = tail;
  } else {
    s.points = Matrix::Zero(static_cast<long>(m) * m, p.n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        s.points(static_cast<long>(i) * m + j, 0) = -p.extent + i * p.spacing;
        s.points(static_cast<long>(i) * m + j, 1) = -p.extent + j * p.spacing;
      }
    s.weights = Vector::Constant(s.points.rows(), p.spacing * p.spacing);
  }
  const int d = p.d, n = p.n;
  s.oracle = [d, n](const Vector& X) { return X.tail(n - d).norm(); };
  if (p.n - p.d == 1) {
    s.upper_excess = [n](const Vector& X) { return X[n - 1]; };
  }
  s.diam = 2.0 * p.extent * std::sqrt(static_cast<double>(p.d));
  finalize_sample(s);
  return s;
}

BoundarySample make_low_dim_plane(double extent, double spacing, int n) {
  PlaneParams p;
  p.extent = extent;
  p.spacing = spacing;
  p.d = 1;
  p.n = n;
  BoundarySample s = make_plane(p);
  s.kind = BoundaryKind::low_dim_plane;
  return s;
}

BoundarySample make_lipschitz_graph(const GraphParams& p) {
  if (p.spacing <= 0 || p.extent <= 0) throw ParameterError("graph: extent and spacing must be > 0");
  if (p.slope < 0) throw ParameterError("graph: Lipschitz constant must be >= 0");
  if (p.n != 2) throw DimensionError("graph: only n = 2 supported");
  const int m = static_cast<int>(std::llround(2.0 * p.extent / p.spacing)) + 1;
  const double flat_from = graph_flat_from(p.extent);
  BoundarySample s;
  s.kind = BoundaryKind::lipschitz_graph;
  s.d = 1;
  s.n = 2;
  s.spacing = p.spacing;
  s.points = Matrix::Zero(m, 2);
  s.weights = Vector::Zero(m);
  const double arc = std::sqrt(1.0 + p.slope * p.slope);
  for (int i = 0; i < m; ++i) {
    const double x = -p.extent + i * p.spacing;
    s.points(i, 0) = x;
    s.points(i, 1) = graph_profile(x, p.slope, flat_from);
    s.weights[i] = p.spacing * (std::abs(x) < flat_from ? arc : 1.0);
  }
  FlatTail tail;
  tail.origin = Vector::Zero(2);
  tail.axis = Vector::Unit(2, 0);
  tail.half_extent = p.extent + 0.5 * p.spacing;
  s.tail = tail;
  const double M = p.slope;
  s.upper_excess = [M, flat_from](const Vector& X) {
    return X[1] - graph_profile(X[0], M, flat_from);
  };
  s.diam = 2.0 * p.extent * arc;
  finalize_sample(s);
  return s;
}

BoundarySample make_circle(const CircleParams& p) {
  if (p.radius <= 0 || p.count < 3) throw ParameterError("circle: need radius > 0 and count >= 3");
  BoundarySample s;
  s.kind = BoundaryKind::circle;
  s.d = 1;
  s.n = 2;
  s.points = Matrix::Zero(p.count, 2);
  for (int i = 0; i < p.count; ++i) {
    const double th = 2.0 * kPi * i / p.count;
    s.points(i, 0) = p.radius * std::cos(th);
    s.points(i, 1) = p.radius * std::sin(th);
  }
  s.weights = Vector::Constant(p.count, 2.0 * kPi * p.radius / p.count);
  s.spacing = 2.0 * kPi * p.radius / p.count;
  const double R = p.radius;
  s.oracle = [R](const Vector& X) { return std::abs(X.norm() - R); };
  s.diam = 2.0 * p.radius;
  finalize_sample(s);
  return s;
}

BoundarySample make_four_corner_cantor(const CantorParams& p) {
  if (p.generation < 1) throw ParameterError("cantor: generation must be >= 1");
  if (p.generation > 10) throw ParameterError("cantor: generation too deep");
  const int g = p.generation;
  const long count = 1L << (2 * g);  // 4^g
  BoundarySample s;
  s.kind = BoundaryKind::four_corner_cantor;
  s.d = 1;
  s.n = 2;
  s.points = Matrix::Zero(count, 2);
  s.weights = Vector::Constant(count, std::pow(0.25, g));
  // atom = center of its generation-g square; squares sit at the four corners
  // of their parent with contraction ratio 1/4
  const double corner[4][2] = {{0.0, 0.0}, {0.75, 0.0}, {0.0, 0.75}, {0.75, 0.75}};
  for (long idx = 0; idx < count; ++idx) {
    double x = 0.0, y = 0.0, side = 1.0;
    long rest = idx;
    for (int level = 0; level < g; ++level) {
      const int digit = static_cast<int>((rest >> (2 * (g - 1 - level))) & 3);
      x += corner[digit][0] * side;
      y += corner[digit][1] * side;
      side *= 0.25;
    }
    s.points(idx, 0) = x + 0.5 * side;
    s.points(idx, 1) = y + 0.5 * side;
  }
  s.spacing = std::pow(0.25, g);
  s.diam = std::sqrt(2.0);
  finalize_sample(s);
  return s;
}

double sample_distance(const BoundarySample& sample, const Vector& X) {
  double best = sample.tree ? sample.tree->nearest(X).second
                            : std::sqrt((sample.points.rowwise() - X.transpose())
                                            .rowwise()
                                            .squaredNorm()
                                            .minCoeff());
  if (sample.tail) {
    const FlatTail& t = *sample.tail;
    const Vector v = X - t.origin;
    const double a = v.dot(t.axis);
    const double rho2 = std::max(0.0, v.squaredNorm() - a * a);
    // two rays |s| > half_extent
    const double gap = std::max(0.0, t.half_extent - std::abs(a));
    best = std::min(best, std::sqrt(rho2 + gap * gap));
  }
  return best;
}

double dist_to_boundary(const BoundarySample& sample, const Vector& X) {
  if (!X.allFinite()) throw ParameterError("dist_to_boundary: non-finite probe");
  if (sample.oracle) return sample.oracle(X);
  return sample_distance(sample, X);
}

AhlforsReport verify_ahlfors(const BoundarySample& sample, int trials, unsigned seed,
                             double declared_d) {
  if (trials < 1) throw ParameterError("verify_ahlfors: trials must be >= 1");
  const double d = declared_d > 0 ? declared_d : sample.d;
  AhlforsReport rep;
  rep.trials = trials;
  rep.r_lo = std::max(10.0 * sample.spacing, 1e-12);
  rep.r_hi = sample.diam / 4.0;
  if (rep.r_hi <= rep.r_lo) rep.r_hi = 2.0 * rep.r_lo;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, sample.count() - 1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Vector x = sample.points.row(pick(rng)).transpose();
    const double r = rep.r_lo * std::pow(rep.r_hi / rep.r_lo, u01(rng));
    double mass = 0.0;
    for (int i = 0; i < sample.count(); ++i)
      if ((sample.points.row(i).transpose() - x).norm() <= r) mass += sample.weights[i];
    if (sample.tail) {
      // the rays carry 1-D measure; add the lengths inside the ball
      const FlatTail& tl = *sample.tail;
      const Vector v = x - tl.origin;
      const double a = v.dot(tl.axis);
      const double rho2 = std::max(0.0, v.squaredNorm() - a * a);
      if (r * r > rho2) {
        const double q = std::sqrt(r * r - rho2);
        const double L = tl.half_extent;
        mass += std::max(0.0, (a + q) - std::max(L, a - q));
        mass += std::max(0.0, std::min(-L, a + q) - (a - q));
      }
    }
    const double ratio = mass / std::pow(r, d);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  rep.min_ratio = lo;
  rep.max_ratio = hi;
  rep.c_sigma = std::max(hi, lo > 0 ? 1.0 / lo : std::numeric_limits<double>::infinity());
  rep.regularity_ok = (lo >= 1e-3 && hi <= 1e3);
  return rep;
}

void write_boundary(const BoundarySample& sample, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_boundary: cannot open " + path);
  out << sample.n << " " << sample.d << " " << sample.count() << "\n";
  char buf[64];
  for (int i = 0; i < sample.count(); ++i) {
    for (int j = 0; j < sample.n; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", sample.points(i, j));
      out << buf << " ";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", sample.weights[i]);
    out << buf << "\n";
  }
}

BoundarySample read_boundary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_boundary: cannot open " + path);
  int n = 0, count = 0;
  double d = 0;
  in >> n >> d >> count;
  if (!in || n < 2 || count < 1 || d <= 0 || d >= n)
    throw ParameterError("read_boundary: bad header in " + path);
  BoundarySample s;
  s.kind = BoundaryKind::custom;
  s.n = n;
  s.d = d;
  s.points = Matrix::Zero(count, n);
  s.weights = Vector::Zero(count);
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < n; ++j) in >> s.points(i, j);
    in >> s.weights[i];
  }
  if (!in) throw ParameterError("read_boundary: truncated file " + path);
  // nominal pitch: nearest-neighbor distance of the first atom
  s.tree = std::make_shared<ClusterTree>(s.points, s.weights);
  if (count > 1) {
    double best = std::numeric_limits<double>::infinity();
    const Vector x0 = s.points.row(0).transpose();
    for (int i = 1; i < count; ++i) best = std::min(best, (s.points.row(i).transpose() - x0).norm());
    s.spacing = best;
  }
  finalize_sample(s);
  return s;
}

}  // namespace urlab
