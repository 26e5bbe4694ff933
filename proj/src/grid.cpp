#include "urlab/grid.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace urlab {

Grid::Grid(const DomainBox& domain, double h, double h_bc)
    : domain_(&domain), n_(domain.boundary->n), h_(h), h_bc_(h_bc > 0 ? h_bc : h),
      lo_(domain.lo), hi_(domain.hi) {
  if (h <= 0) throw ParameterError("Grid: h must be > 0");
  dims_.resize(n_);
  strides_.resize(n_);
  total_ = 1;
  for (int j = 0; j < n_; ++j) {
    const double q = (hi_[j] - lo_[j]) / h;
    dims_[j] = static_cast<int>(std::llround(q)) + 1;
    if (std::abs(q - std::round(q)) > 1e-9)
      throw ParameterError("Grid: box extent must be a multiple of h");
  }
  for (int j = n_ - 1; j >= 0; --j) {
    strides_[j] = total_;
    total_ *= dims_[j];
  }
  cls_.resize(total_);
  delta_.resize(total_);
  for (std::size_t i = 0; i < total_; ++i) {
    const Vector X = node(i);
    const double d = domain.delta(X);
    delta_[i] = d;
    if (on_outer_face(i)) {
      cls_[i] = NodeClass::Dirichlet;
    } else if (d < h_bc_) {
      // strict comparison keeps lattice rows at distance exactly h free, so
      // aligned boundaries stay stencil-exact for linear solutions
      cls_[i] = NodeClass::Dirichlet;
    } else if (!domain.in_domain(X)) {
      cls_[i] = NodeClass::Exterior;
    } else {
      cls_[i] = NodeClass::Interior;
    }
  }
}

Vector Grid::node(std::size_t idx) const {
  Vector X(n_);
  for (int j = 0; j < n_; ++j) {
    const std::size_t c = (idx / strides_[j]) % dims_[j];
    X[j] = lo_[j] + static_cast<double>(c) * h_;
  }
  return X;
}

std::vector<int> Grid::coords(std::size_t idx) const {
  std::vector<int> c(n_);
  for (int j = 0; j < n_; ++j) c[j] = static_cast<int>((idx / strides_[j]) % dims_[j]);
  return c;
}

std::size_t Grid::index(const std::vector<int>& c) const {
  std::size_t idx = 0;
  for (int j = 0; j < n_; ++j) idx += static_cast<std::size_t>(c[j]) * strides_[j];
  return idx;
}

bool Grid::neighbor(std::size_t idx, int axis, int dir, std::size_t& out) const {
  const int c = static_cast<int>((idx / strides_[axis]) % dims_[axis]);
  const int nc = c + dir;
  if (nc < 0 || nc >= dims_[axis]) return false;
  out = idx + static_cast<std::size_t>(dir) * strides_[axis];
  return true;
}

bool Grid::on_outer_face(std::size_t idx) const {
  for (int j = 0; j < n_; ++j) {
    const std::size_t c = (idx / strides_[j]) % dims_[j];
    if (c == 0 || c + 1 == static_cast<std::size_t>(dims_[j])) return true;
  }
  return false;
}

ScalarField sample_field(const Grid& grid, const std::function<double(const Vector&)>& fn) {
  ScalarField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.cls(i) == NodeClass::Exterior) continue;
    f.values[i] = fn(grid.node(i));
    f.valid[i] = 1;
  }
  return f;
}

namespace {

bool stencil_ok(const ScalarField& u, std::size_t i) {
  const Grid& g = *u.grid;
  return g.cls(i) == NodeClass::Interior && g.delta(i) >= 2.0 * g.h();
}

}  // namespace

ScalarField derive(const ScalarField& u, int axis) {
  const Grid& g = *u.grid;
  ScalarField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!u.valid[i] || !stencil_ok(u, i)) continue;
    std::size_t p, m;
    if (!g.neighbor(i, axis, +1, p) || !g.neighbor(i, axis, -1, m)) continue;
    if (!u.valid[p] || !u.valid[m]) continue;
    out.values[i] = (u.values[p] - u.values[m]) / (2.0 * g.h());
    out.valid[i] = 1;
  }
  return out;
}

ScalarField second_derive(const ScalarField& u, int a, int b) {
  const Grid& g = *u.grid;
  ScalarField out(g);
  const double h = g.h();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!u.valid[i] || !stencil_ok(u, i)) continue;
    if (a == b) {
      std::size_t p, m;
      if (!g.neighbor(i, a, +1, p) || !g.neighbor(i, a, -1, m)) continue;
      if (!u.valid[p] || !u.valid[m]) continue;
      out.values[i] = (u.values[p] - 2.0 * u.values[i] + u.values[m]) / (h * h);
      out.valid[i] = 1;
    } else {
      std::size_t pa, ma, pp, pm, mp, mm;
      if (!g.neighbor(i, a, +1, pa) || !g.neighbor(i, a, -1, ma)) continue;
      if (!g.neighbor(pa, b, +1, pp) || !g.neighbor(pa, b, -1, pm)) continue;
      if (!g.neighbor(ma, b, +1, mp) || !g.neighbor(ma, b, -1, mm)) continue;
      if (!(u.valid[pp] && u.valid[pm] && u.valid[mp] && u.valid[mm])) continue;
      out.values[i] =
          (u.values[pp] - u.values[pm] - u.values[mp] + u.values[mm]) / (4.0 * h * h);
      out.valid[i] = 1;
    }
  }
  return out;
}

std::vector<ScalarField> gradient(const ScalarField& u) {
  std::vector<ScalarField> g;
  for (int j = 0; j < u.grid->n(); ++j) g.push_back(derive(u, j));
  return g;
}

ScalarField magnitude(const std::vector<ScalarField>& comps) {
  ScalarField out(*comps.front().grid);
  for (std::size_t i = 0; i < out.valid.size(); ++i) {
    double s = 0;
    bool ok = true;
    for (const ScalarField& c : comps) {
      if (!c.valid[i]) {
        ok = false;
        break;
      }
      s += c.values[i] * c.values[i];
    }
    if (ok) {
      out.values[i] = std::sqrt(s);
      out.valid[i] = 1;
    }
  }
  return out;
}

ScalarField squared_magnitude(const std::vector<ScalarField>& comps) {
  ScalarField out = magnitude(comps);
  for (std::size_t i = 0; i < out.valid.size(); ++i)
    if (out.valid[i]) out.values[i] *= out.values[i];
  return out;
}

ScalarField log_ratio(const ScalarField& a, const ScalarField& b, bool throw_on_nonpositive) {
  ScalarField out(*a.grid);
  for (std::size_t i = 0; i < out.valid.size(); ++i) {
    if (!a.valid[i] || !b.valid[i]) continue;
    if (a.values[i] <= 0.0 || b.values[i] <= 0.0) {
      if (throw_on_nonpositive && a.grid->cls(i) == NodeClass::Interior)
        throw PositivityError("log_ratio: nonpositive value at an interior node");
      continue;
    }
    out.values[i] = std::log(a.values[i] / b.values[i]);
    out.valid[i] = 1;
  }
  return out;
}

ScalarField hessian_norm(const ScalarField& u) {
  const int n = u.grid->n();
  std::vector<ScalarField> comps;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) comps.push_back(second_derive(u, a, b));
  return magnitude(comps);
}

void write_field(const ScalarField& f, const std::string& path, const std::string& sidecar_text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("write_field: cannot open " + path);
  const Grid& g = *f.grid;
  const char magic[4] = {'U', 'R', 'L', 'F'};
  out.write(magic, 4);
  const int32_t n = g.n();
  out.write(reinterpret_cast<const char*>(&n), 4);
  for (int j = 0; j < g.n(); ++j) {
    const int32_t d = g.dims()[j];
    out.write(reinterpret_cast<const char*>(&d), 4);
  }
  const double h = g.h();
  out.write(reinterpret_cast<const char*>(&h), 8);
  for (int j = 0; j < g.n(); ++j) out.write(reinterpret_cast<const char*>(&g.lo()[j]), 8);
  for (int j = 0; j < g.n(); ++j) out.write(reinterpret_cast<const char*>(&g.hi()[j]), 8);
  // run-length encoded validity mask
  std::vector<std::pair<uint8_t, uint32_t>> runs;
  for (std::size_t i = 0; i < f.valid.size(); ++i) {
    if (!runs.empty() && runs.back().first == f.valid[i] && runs.back().second < UINT32_MAX)
      ++runs.back().second;
    else
      runs.push_back({f.valid[i], 1});
  }
  const uint64_t nruns = runs.size();
  out.write(reinterpret_cast<const char*>(&nruns), 8);
  for (const auto& [v, len] : runs) {
    out.write(reinterpret_cast<const char*>(&v), 1);
    out.write(reinterpret_cast<const char*>(&len), 4);
  }
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * 8));
  std::ofstream side(path + ".txt");
  side << sidecar_text;
}

ScalarField read_field(const Grid& grid, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_field: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, "URLF", 4) != 0) throw Error("read_field: bad magic in " + path);
  int32_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 4);
  if (n != grid.n()) throw DimensionError("read_field: dimension mismatch");
  for (int j = 0; j < n; ++j) {
    int32_t d = 0;
    in.read(reinterpret_cast<char*>(&d), 4);
    if (d != grid.dims()[j]) throw DimensionError("read_field: grid dims mismatch");
  }
  double h = 0;
  in.read(reinterpret_cast<char*>(&h), 8);
  Vector lo(n), hi(n);
  for (int j = 0; j < n; ++j) in.read(reinterpret_cast<char*>(&lo[j]), 8);
  for (int j = 0; j < n; ++j) in.read(reinterpret_cast<char*>(&hi[j]), 8);
  uint64_t nruns = 0;
  in.read(reinterpret_cast<char*>(&nruns), 8);
  ScalarField f(grid);
  std::size_t pos = 0;
  for (uint64_t r = 0; r < nruns; ++r) {
    uint8_t v = 0;
    uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&v), 1);
    in.read(reinterpret_cast<char*>(&len), 4);
    for (uint32_t k = 0; k < len && pos < f.valid.size(); ++k) f.valid[pos++] = v;
  }
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * 8));
  if (!in) throw Error("read_field: truncated file " + path);
  return f;
}

}  // namespace urlab
