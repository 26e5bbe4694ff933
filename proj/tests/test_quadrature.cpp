#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "urlab/quadrature.hpp"

using namespace urlab;

TEST_CASE("tanh-sinh handles smooth and endpoint-singular integrands") {
  CHECK(integrate_tanh_sinh([](double x) { return x * x; }, 0.0, 1.0) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // integrable endpoint singularity
  CHECK(integrate_tanh_sinh([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0) ==
        doctest::Approx(2.0).epsilon(1e-10));
  CHECK(integrate_ray([](double s) { return std::exp(-s); }, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(integrate_ray([](double s) { return 1.0 / (1.0 + s * s); }, 1.0) ==
        doctest::Approx(kPi / 4.0).epsilon(1e-10));
}

TEST_CASE("c_beta closed forms") {
  CHECK(c_beta(1, 1.0) == doctest::Approx(kPi).epsilon(1e-8));
  CHECK(c_beta(1, 2.0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(c_beta(2, 2.0) == doctest::Approx(kPi).epsilon(1e-8));
}

TEST_CASE("c_beta against the gamma-function identity") {
  // independent oracle: c_beta = pi^{d/2} Gamma(beta/2) / Gamma((d+beta)/2)
  for (int d = 1; d <= 3; ++d) {
    for (double beta : {0.5, 1.0, 1.5, 2.0, 3.0}) {
      const double oracle =
          std::pow(kPi, 0.5 * d) * std::tgamma(0.5 * beta) / std::tgamma(0.5 * (d + beta));
      CHECK(c_beta(d, beta) == doctest::Approx(oracle).epsilon(1e-8));
    }
  }
}

TEST_CASE("c_beta rejects bad parameters") {
  CHECK_THROWS_AS(c_beta(1, 0.0), ParameterError);
  CHECK_THROWS_AS(c_beta(1, -1.0), ParameterError);
  CHECK_THROWS_AS(c_beta(0, 1.0), ParameterError);
}
