#pragma once

#include <functional>

#include "urlab/types.hpp"

namespace urlab {

// Tanh-sinh (double exponential) quadrature on (a,b). Handles integrable
// endpoint singularities; refines by level doubling until two consecutive
// levels agree to rel_tol or max_level is reached.
double integrate_tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           double rel_tol = 1e-12, int max_level = 12);

// Integral over (a, +inf) via the substitution s = a + u/(1-u).
double integrate_ray(const std::function<double(double)>& f, double a, double rel_tol = 1e-12);

// Surface area of the unit sphere S^{d-1} in R^d (2 for d=1).
double unit_sphere_area(int d);

// c_beta = int_{R^d} (1+|y|^2)^{-(d+beta)/2} dy, by radial reduction to a
// 1-D quadrature. d >= 1 integer, beta > 0.
double c_beta(int d, double beta);

}  // namespace urlab
