#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "urlab/geometry.hpp"
#include "urlab/types.hpp"

namespace urlab {

enum class NodeClass : uint8_t { Exterior = 0, Dirichlet = 1, Interior = 2 };

// Regular lattice over the domain box. Dirichlet nodes are exactly those on
// the outer box faces or within the h_bc band of the boundary.
class Grid {
 public:
  Grid(const DomainBox& domain, double h, double h_bc = -1.0);

  int n() const { return n_; }
  double h() const { return h_; }
  double h_bc() const { return h_bc_; }
  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }
  const std::vector<int>& dims() const { return dims_; }
  std::size_t size() const { return total_; }
  const DomainBox& domain() const { return *domain_; }

  Vector node(std::size_t idx) const;
  std::vector<int> coords(std::size_t idx) const;
  std::size_t index(const std::vector<int>& c) const;
  // false when the step leaves the lattice
  bool neighbor(std::size_t idx, int axis, int dir, std::size_t& out) const;
  bool on_outer_face(std::size_t idx) const;

  NodeClass cls(std::size_t idx) const { return cls_[idx]; }
  double delta(std::size_t idx) const { return delta_[idx]; }

 private:
  const DomainBox* domain_;
  int n_;
  double h_, h_bc_;
  Vector lo_, hi_;
  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 0;
  std::vector<NodeClass> cls_;
  std::vector<double> delta_;
};

// Scalar lattice field with a validity mask.
struct ScalarField {
  const Grid* grid = nullptr;
  Vector values;
  std::vector<uint8_t> valid;

  ScalarField() = default;
  explicit ScalarField(const Grid& g)
      : grid(&g), values(Vector::Zero(g.size())), valid(g.size(), 0) {}
  double operator[](std::size_t i) const { return values[i]; }
};

// Evaluate fn on Interior+Dirichlet nodes (valid there, masked on Exterior).
ScalarField sample_field(const Grid& grid, const std::function<double(const Vector&)>& fn);

// Centered first difference along axis; valid where the stencil is complete,
// the node is Interior and delta >= 2h.
ScalarField derive(const ScalarField& u, int axis);
// Centered second difference (a == b) or the 4-point cross (a != b).
ScalarField second_derive(const ScalarField& u, int a, int b);
std::vector<ScalarField> gradient(const ScalarField& u);

// Pointwise combinations; validity is the intersection of the inputs.
ScalarField magnitude(const std::vector<ScalarField>& comps);
ScalarField squared_magnitude(const std::vector<ScalarField>& comps);
// ln(a/b), masked where a <= 0 or b <= 0; throws PositivityError if requested.
ScalarField log_ratio(const ScalarField& a, const ScalarField& b, bool throw_on_nonpositive);

// Frobenius norm of the Hessian field of u.
ScalarField hessian_norm(const ScalarField& u);

// Flat binary field format: header (dims, h, corners, RLE mask), then values
// row-major as little-endian 64-bit floats. The sidecar carries provenance.
void write_field(const ScalarField& f, const std::string& path, const std::string& sidecar_text);
// Reads values+mask; geometry must match the supplied grid.
ScalarField read_field(const Grid& grid, const std::string& path);

}  // namespace urlab
