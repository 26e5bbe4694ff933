#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>

namespace urlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error hierarchy. Parameter/dimension problems are invalid_argument-like,
// numerical failures carry enough context to name the failing stage.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParameterError : Error {
  using Error::Error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct ResolutionError : Error {
  using Error::Error;
};
struct SearchError : Error {
  using Error::Error;
};
struct ConnectivityError : Error {
  using Error::Error;
};
struct ConvergenceError : Error {
  using Error::Error;
};
struct EllipticityError : Error {
  using Error::Error;
};
struct PlacementError : Error {
  using Error::Error;
};
struct PositivityError : Error {
  using Error::Error;
};
struct TrivialityError : Error {
  using Error::Error;
};
struct FitError : Error {
  using Error::Error;
};
struct ProjectionError : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};

inline constexpr double kPi = 3.14159265358979323846;

// Chunked worker loop for pure per-index jobs; results written to preassigned
// slots stay deterministic for any thread count.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace urlab
