#include "urlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace urlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParameterError("config: empty key");
    cfg.kv_[key] = value;
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

std::string ExperimentConfig::get(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ParameterError("config: missing key '" + key + "'");
  return it->second;
}

std::string ExperimentConfig::get_or(const std::string& key, const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double ExperimentConfig::get_double(const std::string& key) const {
  return std::stod(get(key));
}

double ExperimentConfig::get_double_or(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : std::stod(it->second);
}

int ExperimentConfig::get_int_or(const std::string& key, int fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : std::stoi(it->second);
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& key) const {
  std::istringstream in(get(key));
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  if (out.empty()) throw ParameterError("config: key '" + key + "' holds no numbers");
  return out;
}

std::vector<std::string> ExperimentConfig::get_strings(const std::string& key) const {
  std::istringstream in(get(key));
  std::vector<std::string> out;
  std::string v;
  while (in >> v) out.push_back(v);
  return out;
}

std::string ExperimentConfig::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : kv_) out += k + " = " + v + "\n";
  return out;
}

std::string ExperimentConfig::hash() const {
  uint64_t h = 1469598103934665603ull;
  for (const char c : canonical_text()) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::function<Matrix(const Vector&)> make_coeff(const std::string& name, int n) {
  if (name == "identity" || name.empty()) return nullptr;
  if (name == "log_oscillating") {
    return [n](const Vector& X) {
      const double t = std::max(X[n - 1], 1e-12);
      return Matrix((1.0 + 0.5 * std::sin(std::log(t))) * Matrix::Identity(n, n));
    };
  }
  if (name == "integrable_decay") {
    return [n](const Vector& X) {
      const double t = std::max(X[n - 1], 0.0);
      return Matrix((1.0 + t / (1.0 + t)) * Matrix::Identity(n, n));
    };
  }
  if (name == "anisotropic") {
    return [n](const Vector&) {
      Matrix A = Matrix::Identity(n, n);
      A(n - 1, n - 1) = 2.0;
      return A;
    };
  }
  if (name == "cross") {
    return [n](const Vector&) {
      Matrix A = Matrix::Identity(n, n);
      A(0, n - 1) = A(n - 1, 0) = 0.2;
      return A;
    };
  }
  throw ParameterError("unknown coefficient name: " + name);
}

BoundarySample boundary_from_config(const ExperimentConfig& cfg) {
  const BoundaryKind kind = boundary_kind_from_string(cfg.get("boundary.kind"));
  switch (kind) {
    case BoundaryKind::plane: {
      PlaneParams p;
      p.extent = cfg.get_double_or("boundary.extent", 8.0);
      p.spacing = cfg.get_double_or("boundary.spacing", 0.01);
      p.d = cfg.get_int_or("boundary.d", 1);
      p.n = cfg.get_int_or("boundary.n", 2);
      return make_plane(p);
    }
    case BoundaryKind::low_dim_plane:
      return make_low_dim_plane(cfg.get_double_or("boundary.extent", 4.0),
                                cfg.get_double_or("boundary.spacing", 0.01),
                                cfg.get_int_or("boundary.n", 3));
    case BoundaryKind::lipschitz_graph: {
      GraphParams p;
      p.extent = cfg.get_double_or("boundary.extent", 4.0);
      p.spacing = cfg.get_double_or("boundary.spacing", 0.01);
      p.slope = cfg.get_double_or("boundary.slope", 0.3);
      return make_lipschitz_graph(p);
    }
    case BoundaryKind::circle:
      return make_circle(
          {cfg.get_double_or("boundary.radius", 1.0), cfg.get_int_or("boundary.count", 628)});
    case BoundaryKind::four_corner_cantor:
      return make_four_corner_cantor({cfg.get_int_or("boundary.generation", 5)});
    case BoundaryKind::custom:
      return read_boundary(cfg.get("boundary.file"));
  }
  throw ParameterError("boundary_from_config: unreachable");
}

DomainBox domain_from_config(const ExperimentConfig& cfg, const BoundarySample& sample) {
  const std::vector<double> lo = cfg.get_doubles("grid.lo");
  const std::vector<double> hi = cfg.get_doubles("grid.hi");
  if (static_cast<int>(lo.size()) != sample.n || static_cast<int>(hi.size()) != sample.n)
    throw ParameterError("grid corners must have boundary dimension");
  Vector l(sample.n), h(sample.n);
  for (int j = 0; j < sample.n; ++j) {
    l[j] = lo[j];
    h[j] = hi[j];
  }
  const std::string side = cfg.get_or("domain.side", "complement");
  return DomainBox(l, h, sample,
                   side == "one_side" ? Side::one_side : Side::complement);
}

OperatorSpec operator_from_config(const ExperimentConfig& cfg, const BoundarySample& sample) {
  OperatorSpec spec;
  spec.beta = cfg.get_double_or("operator.beta", 1.0);
  spec.d = sample.d;
  spec.n = sample.n;
  spec.coeff = make_coeff(cfg.get_or("operator.coeff", "identity"), sample.n);
  return spec;
}

void write_svg_slice(const ScalarField& f, const std::string& path) {
  const Grid& g = *f.grid;
  const int nx = g.dims()[0];
  const int ny = g.dims()[1];
  const int fixed = g.n() == 3 ? g.dims()[2] / 2 : 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::vector<int> c(g.n(), 0);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      c[0] = i;
      c[1] = j;
      if (g.n() == 3) c[2] = fixed;
      const std::size_t idx = g.index(c);
      if (!f.valid[idx]) continue;
      lo = std::min(lo, f.values[idx]);
      hi = std::max(hi, f.values[idx]);
    }
  if (!(hi > lo)) hi = lo + 1.0;
  const int cell = 4;
  std::ofstream out(path);
  if (!out) throw Error("write_svg_slice: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << nx * cell << "\" height=\""
      << ny * cell << "\">\n";
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      c[0] = i;
      c[1] = j;
      if (g.n() == 3) c[2] = fixed;
      const std::size_t idx = g.index(c);
      if (!f.valid[idx]) continue;
      const int shade =
          static_cast<int>(255.0 * (f.values[idx] - lo) / (hi - lo));
      out << "<rect x=\"" << i * cell << "\" y=\"" << (ny - 1 - j) * cell << "\" width=\"" << cell
          << "\" height=\"" << cell << "\" fill=\"rgb(" << shade << "," << shade << "," << shade
          << ")\"/>\n";
    }
  out << "</svg>\n";
}

namespace {

struct Stage {
  std::ofstream manifest;
  std::string dir;
  std::vector<std::string> files;

  void note(const std::string& line) { manifest << line << "\n"; }
  std::string file(const std::string& name) {
    files.push_back(dir + "/" + name);
    return files.back();
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void run_gen_boundary(const ExperimentConfig& cfg, const BoundarySample& sample, Stage& st) {
  write_boundary(sample, st.file("boundary.txt"));
  st.note("boundary.kind = " + to_string(sample.kind));
  st.note("boundary.count = " + std::to_string(sample.count()));
  st.note("boundary.ahlfors_constant = " + fmt(sample.ahlfors_constant));
  (void)cfg;
}

ScalarField solve_from_config(const ExperimentConfig& cfg, const BoundarySample& sample,
                              const DomainBox& domain, const Grid& grid,
                              const OperatorSpec& spec, const SmoothDistanceField& field,
                              Stage* st) {
  const std::string mode = cfg.get_or("solve.mode", "green");
  // flat kinds carry the exact closed-form weight; everything else goes
  // through the kernel sums
  const bool flat = sample.kind == BoundaryKind::plane ||
                    sample.kind == BoundaryKind::low_dim_plane;
  const WeightFn weight = flat ? weight_from_oracle(sample, spec, field.c_beta_value())
                               : weight_from_field(field, spec);
  SolveReport rep;
  ScalarField u;
  if (mode == "green") {
    const std::vector<double> pv = cfg.get_doubles("solve.pole");
    Vector pole(sample.n);
    for (int j = 0; j < sample.n; ++j) pole[j] = pv[j];
    u = green_function(spec, grid, weight, pole, &rep);
  } else if (mode == "ball") {
    const std::vector<double> cv = cfg.get_doubles("solve.ball_center");
    Vector x(sample.n);
    for (int j = 0; j < sample.n; ++j) x[j] = cv[j];
    const double r = cfg.get_double("solve.ball_radius");
    u = solve_boundary_ball(spec, grid, weight, x, r,
                            [](const Vector& X) { return X[X.size() - 1]; }, &rep);
  } else if (mode == "analytic_linear") {
    u = sample_field(grid, [&](const Vector& X) { return X[X.size() - 1]; });
    rep.solver = "analytic";
  } else if (mode == "analytic_radial") {
    const int d = static_cast<int>(std::llround(sample.d));
    u = sample_field(grid, [&](const Vector& X) { return X.tail(X.size() - d).norm(); });
    rep.solver = "analytic";
  } else {
    throw ParameterError("unknown solve.mode: " + mode);
  }
  if (st) {
    st->note("solve.mode = " + mode);
    st->note("solve.solver = " + rep.solver);
    st->note("solve.residual = " + fmt(rep.residual));
    st->note("solve.weighted_residual = " + fmt(rep.weighted_residual));
    st->note("solve.iterations = " + std::to_string(rep.iterations));
    st->note("solve.positive = " + std::string(rep.positive ? "true" : "false"));
  }
  (void)domain;
  return u;
}

ChristForest forest_from_config(const ExperimentConfig& cfg, const BoundarySample& sample) {
  const int k_min = cfg.get_int_or(
      "forest.k_min", static_cast<int>(std::floor(-std::log2(0.5 * sample.diam))));
  const int k_max = cfg.get_int_or(
      "forest.k_max",
      std::max(k_min, static_cast<int>(std::floor(-std::log2(4.0 * sample.spacing)))));
  return build_christ_cubes(sample, k_min, k_max);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& verb,
                                const std::string& out_root) {
  ExperimentResult result;
  namespace fs = std::filesystem;
  Stage st;
  try {
    st.dir = out_root + "/bundle-" + cfg.hash();
    fs::create_directories(st.dir);
    st.manifest.open(st.dir + "/manifest.txt");
    st.manifest << "urlab 0.1.0 (eigen " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION
                << "." << EIGEN_MINOR_VERSION << ")\n";
    st.note("verb = " + verb);
    st.note("config_hash = " + cfg.hash());
    st.manifest << "--- config ---\n" << cfg.canonical_text() << "--- run ---\n";
    result.bundle_dir = st.dir;

    const BoundarySample sample = boundary_from_config(cfg);
    st.note("achieved.C_sigma = " + fmt(sample.ahlfors_constant));

    if (verb == "gen-boundary") {
      run_gen_boundary(cfg, sample, st);
      result.files = st.files;
      return result;
    }

    const double beta = cfg.get_double_or("operator.beta", 1.0);
    const SmoothDistanceField field(sample, beta);
    const OperatorSpec spec = operator_from_config(cfg, sample);

    if (verb == "bwgl") {
      const ChristForest forest = forest_from_config(cfg, sample);
      st.note("achieved.a0 = " + fmt(forest.a0));
      const BetaReport rep = bwgl_report(sample, forest, cfg.get_double_or("bwgl.epsilon", 0.1),
                                         cfg.get_int_or("threads", 1));
      write_beta_csv(rep, forest, st.file("bwgl.csv"));
      write_forest(forest, st.file("forest.txt"));
      st.note("bwgl.max_ratio = " + fmt(rep.max_ratio));
      result.files = st.files;
      return result;
    }

    const DomainBox domain = domain_from_config(cfg, sample);
    {
      // comparability constant over a probe sweep at mixed depths
      double lo = 1e300, hi = 0.0;
      const double diag = (domain.hi - domain.lo).norm();
      for (int t = 1; t <= 20; ++t) {
        const Vector x = sample.points.row((t * 7919) % sample.count()).transpose();
        Vector X = x;
        X[sample.n - 1] += 0.02 * t * diag / 20.0;
        if (!domain.in_domain(X)) continue;
        const double delta = dist_to_boundary(sample, X);
        if (delta <= 2.5 * sample.spacing) continue;
        const double ratio = field.evaluate(X, 0).D.value / delta;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
      if (hi > 0)
        st.note("achieved.C_beta = " + fmt(std::max(hi, 1.0 / lo)));
    }
    {
      // corkscrew constant at a representative boundary ball
      try {
        const CorkscrewResult cs =
            find_corkscrew(domain, sample.points.row(sample.count() / 2).transpose(),
                           0.25 * (domain.hi - domain.lo).minCoeff());
        st.note("achieved.epsilon = " + fmt(cs.epsilon));
      } catch (const SearchError&) {
        st.note("achieved.epsilon = none");
      }
    }

    if (verb == "solve") {
      const Grid grid(domain, cfg.get_double("grid.h"));
      const ScalarField u = solve_from_config(cfg, sample, domain, grid, spec, field, &st);
      write_field(u, st.file("field.bin"),
                  "urlab field\n" + cfg.canonical_text() + "tolerance 1e-9\n");
      if (cfg.get_int_or("out.svg", 0)) write_svg_slice(u, st.file("field.svg"));
      result.files = st.files;
      return result;
    }

    if (verb == "functional") {
      const Grid grid(domain, cfg.get_double("grid.h"));
      const ScalarField u = solve_from_config(cfg, sample, domain, grid, spec, field, &st);
      const ChristForest forest = forest_from_config(cfg, sample);
      const std::vector<double> scales = cfg.get_doubles("carleson.scales");
      std::optional<Vector> pole;
      if (cfg.has("solve.pole")) {
        const std::vector<double> pv = cfg.get_doubles("solve.pole");
        Vector p(sample.n);
        for (int j = 0; j < sample.n; ++j) p[j] = pv[j];
        pole = p;
      }
      for (const std::string& tag : cfg.get_strings("functional.tags")) {
        const IntegrandKind kind = integrand_kind_from_string(tag);
        const IntegrandResult f =
            build_integrand(kind, grid, &u, &field, spec, pole ? &*pole : nullptr);
        if (f.counterexample_regime)
          st.note("warning: " + tag + " requested in the d < n-1 counterexample regime");
        const CarlesonReport rep =
            carleson_norm(f.f, sample, forest, scales, pole ? &*pole : nullptr);
        write_carleson_csv(rep, st.file(tag + ".csv"));
        st.note("carleson." + tag + ".sup = " + fmt(rep.sup));
      }
      result.files = st.files;
      return result;
    }

    if (verb == "dichotomy") {
      const std::vector<double> ladder = cfg.get_doubles("ladder.h");
      for (std::size_t i = 1; i < ladder.size(); ++i)
        if (ladder[i] >= ladder[i - 1])
          throw ParameterError("ladder.h must be strictly decreasing");
      const std::vector<double> scales = cfg.get_doubles("carleson.scales");
      const ChristForest forest = forest_from_config(cfg, sample);
      const std::string tag = cfg.get_or("functional.tag", "grad_sq_grad_u");
      const IntegrandKind kind = integrand_kind_from_string(tag);
      std::vector<std::pair<double, double>> sups;
      std::ofstream trend(st.file("trend.csv"));
      trend << "h,sup\n";
      for (double h : ladder) {
        const Grid grid(domain, h);
        const ScalarField u = solve_from_config(cfg, sample, domain, grid, spec, field, nullptr);
        std::optional<Vector> pole;
        if (cfg.has("solve.pole")) {
          const std::vector<double> pv = cfg.get_doubles("solve.pole");
          Vector p(sample.n);
          for (int j = 0; j < sample.n; ++j) p[j] = pv[j];
          pole = p;
        }
        const IntegrandResult f =
            build_integrand(kind, grid, &u, &field, spec, pole ? &*pole : nullptr);
        const CarlesonReport rep =
            carleson_norm(f.f, sample, forest, scales, pole ? &*pole : nullptr);
        sups.emplace_back(h, rep.sup);
        trend << fmt(h) << "," << fmt(rep.sup) << "\n";
      }
      const TrendResult t = classify_trend(sups);
      trend << "# trend {\"divergent\": " << (t.divergent ? "true" : "false")
            << ", \"growth_min\": " << fmt(t.growth_min)
            << ", \"growth_max\": " << fmt(t.growth_max) << ", \"slope\": " << fmt(t.slope)
            << "}\n";
      st.note(std::string("dichotomy.divergent = ") + (t.divergent ? "true" : "false"));
      result.files = st.files;
      return result;
    }

    throw ParameterError("unknown verb: " + verb);
  } catch (const ParameterError& e) {
    result.exit_code = 2;
    result.message = e.what();
  } catch (const DimensionError& e) {
    result.exit_code = 2;
    result.message = e.what();
  } catch (const Error& e) {
    result.exit_code = 3;
    result.message = e.what();
  }
  return result;
}

}  // namespace urlab
