#include "urlab/quadrature.hpp"

#include <cmath>

namespace urlab {

namespace {

// Node sum of the tanh-sinh rule on (a,b) at step h, without the leading h:
//   x(t) = tanh(pi/2 sinh(t)),  w(t) = (pi/2) cosh(t) / cosh^2(pi/2 sinh(t)).
// odd_only visits k = 1,3,5,... (the nodes new to step h relative to 2h).
double node_sum(const std::function<double(double)>& f, double a, double b, double h,
                bool odd_only) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  const int k_max = static_cast<int>(std::ceil(std::asinh(2.0 / kPi * 700.0) / h));
  for (int k = odd_only ? 1 : 0; k <= k_max; k += odd_only ? 2 : 1) {
    const double t = k * h;
    const double sh = 0.5 * kPi * std::sinh(t);
    const double ch = std::cosh(sh);
    const double w = 0.5 * kPi * std::cosh(t) / (ch * ch);
    if (w < 1e-320) break;
    if (k == 0) {
      sum += w * f(mid);
    } else {
      // 1 - tanh(sh) without cancellation, so endpoint mass is not dropped
      const double om = 2.0 / (std::exp(2.0 * sh) + 1.0);
      const double xp = b - half * om;
      const double xm = a + half * om;
      if (xp > a && xp < b) sum += w * f(xp);
      if (xm > a && xm < b) sum += w * f(xm);
    }
  }
  return sum * half;
}

}  // namespace

double integrate_tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           double rel_tol, int max_level) {
  if (!(b > a)) throw ParameterError("integrate_tanh_sinh: empty interval");
  double h = 1.0;
  double value = h * node_sum(f, a, b, h, false);
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    const double updated = 0.5 * value + h * node_sum(f, a, b, h, true);
    const double err = std::abs(updated - value);
    value = updated;
    if (err <= rel_tol * std::max(1e-300, std::abs(value)) && level >= 3) break;
  }
  return value;
}

double integrate_ray(const std::function<double(double)>& f, double a, double rel_tol) {
  // s = a + (1-v)/v, ds = -dv/v^2; the v -> 0 end carries the far field and
  // the tanh-sinh nodes resolve it without cancellation
  auto g = [&](double v) {
    if (v < 1e-160) return 0.0;  // decaying integrands only
    const double s = a + (1.0 - v) / v;
    const double fs = f(s);
    return fs == 0.0 ? 0.0 : fs / (v * v);
  };
  return integrate_tanh_sinh(g, 0.0, 1.0, rel_tol);
}

double unit_sphere_area(int d) {
  if (d < 1) throw ParameterError("unit_sphere_area: d must be >= 1");
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

double c_beta(int d, double beta) {
  if (beta <= 0.0) throw ParameterError("c_beta: beta must be > 0");
  if (d < 1) throw ParameterError("c_beta: d must be a positive integer");
  // Radial reduction with r = cot(theta):
  //   int_0^inf r^{d-1} (1+r^2)^{-(d+beta)/2} dr = int_0^{pi/2} cos^{d-1} sin^{beta-1} dtheta.
  // The beta < 1 singularity sits at theta = 0 where sin keeps full relative
  // accuracy under the tanh-sinh node placement.
  auto g = [=](double theta) {
    return std::pow(std::cos(theta), d - 1) * std::pow(std::sin(theta), beta - 1.0);
  };
  const double radial = integrate_tanh_sinh(g, 0.0, 0.5 * kPi, 1e-13);
  return unit_sphere_area(d) * radial;
}

}  // namespace urlab
