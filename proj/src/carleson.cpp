#include "urlab/carleson.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace urlab {

std::string to_string(IntegrandKind kind) {
  switch (kind) {
    case IntegrandKind::hess_u: return "hess_u";
    case IntegrandKind::grad_abs_grad_u: return "grad_abs_grad_u";
    case IntegrandKind::grad_sq_grad_u: return "grad_sq_grad_u";
    case IntegrandKind::logratio_grad: return "logratio_grad";
    case IntegrandKind::logratio_hess: return "logratio_hess";
    case IntegrandKind::dkp_coeff: return "dkp_coeff";
    case IntegrandKind::dem_g1: return "dem_g1";
    case IntegrandKind::dem_g2: return "dem_g2";
    case IntegrandKind::dem_ind: return "dem_ind";
    case IntegrandKind::weight_div: return "weight_div";
  }
  return "?";
}

IntegrandKind integrand_kind_from_string(const std::string& s) {
  for (IntegrandKind k :
       {IntegrandKind::hess_u, IntegrandKind::grad_abs_grad_u, IntegrandKind::grad_sq_grad_u,
        IntegrandKind::logratio_grad, IntegrandKind::logratio_hess, IntegrandKind::dkp_coeff,
        IntegrandKind::dem_g1, IntegrandKind::dem_g2, IntegrandKind::dem_ind,
        IntegrandKind::weight_div})
    if (to_string(k) == s) return k;
  throw ParameterError("unknown integrand tag: " + s);
}

namespace {

// centers = Christ-cube centers at the generation nearest to scale r
std::vector<Vector> centers_for_scale(const ChristForest& forest, double r) {
  int best_k = forest.k_min;
  double best = std::numeric_limits<double>::infinity();
  for (int k = forest.k_min; k <= forest.k_max; ++k) {
    const double diff = std::abs(std::pow(2.0, -k) - r);
    if (diff < best) {
      best = diff;
      best_k = k;
    }
  }
  std::vector<Vector> out;
  for (int id : forest.generation(best_k)) out.push_back(forest.cubes[id].center);
  return out;
}


template <typename ValueAt>
CarlesonReport ball_sums(const Grid& grid, const BoundarySample& sample,
                         const ChristForest& forest, const std::vector<double>& scales,
                         const Vector* pole, ValueAt&& value_at) {
  CarlesonReport rep;
  rep.scales = scales;
  rep.h = grid.h();
  const double d = sample.d;
  const int n = grid.n();
  const double hn = std::pow(grid.h(), n);

  for (double r : scales) {
    for (const Vector& x : centers_for_scale(forest, r)) {
      BallEntry e;
      e.center = x;
      e.r = r;
      if (pole && (*pole - x).norm() < 2.0 * r) {
        e.absent = true;
        rep.table.push_back(e);
        continue;
      }
      // bounding sub-lattice of the ball; an empty range on any axis means
      // the ball left the box entirely
      std::vector<int> lo(n), hi(n);
      bool empty = false;
      for (int j = 0; j < n; ++j) {
        lo[j] = std::max(0, static_cast<int>(std::ceil((x[j] - r - grid.lo()[j]) / grid.h())));
        hi[j] = std::min(grid.dims()[j] - 1,
                         static_cast<int>(std::floor((x[j] + r - grid.lo()[j]) / grid.h())));
        if ((x[j] - r < grid.lo()[j] - 1e-12 && x[j] + r < grid.lo()[j] - 1e-12) ||
            hi[j] < lo[j])
          empty = true;
      }
      if (empty) {
        e.absent = true;
        rep.table.push_back(e);
        continue;
      }
      double sum = 0.0;
      long cells = 0;
      bool truncated = false;
      std::vector<int> c = lo;
      while (!truncated) {
        const std::size_t idx = grid.index(c);
        const Vector X = grid.node(idx);
        if ((X - x).norm() < r) {
          // a ball clipped by the box where Omega continues is reported
          // absent, not zero
          if (grid.on_outer_face(idx) && grid.domain().in_domain(X) &&
              grid.delta(idx) >= grid.h_bc())
            truncated = true;
          if (grid.cls(idx) == NodeClass::Interior) {
            const double fv = value_at(idx, X);
            if (std::isfinite(fv)) {
              const double delta = grid.delta(idx);
              sum += fv * fv * std::pow(delta, d - n) * hn;
              ++cells;
            }
          }
        }
        int j = n - 1;
        while (j >= 0 && c[j] == hi[j]) {
          c[j] = lo[j];
          --j;
        }
        if (j < 0) break;
        ++c[j];
      }
      if (cells == 0 || truncated) {
        e.absent = true;
        e.value = 0.0;
        e.cells = 0;
      } else {
        e.value = sum / std::pow(r, d);
        e.cells = cells;
      }
      rep.table.push_back(e);
    }
  }
  for (std::size_t i = 0; i < rep.table.size(); ++i) {
    if (!rep.table[i].absent && rep.table[i].value > rep.sup) {
      rep.sup = rep.table[i].value;
      rep.argmax = static_cast<int>(i);
    }
  }
  return rep;
}

}  // namespace

CarlesonReport carleson_norm(const ScalarField& f, const BoundarySample& sample,
                             const ChristForest& forest, const std::vector<double>& scales,
                             const Vector* pole) {
  return ball_sums(*f.grid, sample, forest, scales, pole,
                   [&](std::size_t idx, const Vector&) {
                     return f.valid[idx] ? f.values[idx]
                                         : std::numeric_limits<double>::quiet_NaN();
                   });
}

CarlesonReport carleson_norm_fn(const Grid& grid,
                                const std::function<double(const Vector&, double)>& f,
                                const BoundarySample& sample, const ChristForest& forest,
                                const std::vector<double>& scales, const Vector* pole) {
  return ball_sums(grid, sample, forest, scales, pole,
                   [&](std::size_t idx, const Vector& X) { return f(X, grid.delta(idx)); });
}

IntegrandResult build_integrand(IntegrandKind kind, const Grid& grid, const ScalarField* u,
                                const SmoothDistanceField* field, const OperatorSpec& spec,
                                const Vector* pole) {
  IntegrandResult out;
  out.f = ScalarField(grid);
  const int n = grid.n();
  const double d = spec.d;

  auto needs_u = [&] {
    if (!u) throw ParameterError("build_integrand: tag needs a solution field");
  };
  auto needs_field = [&] {
    if (!field) throw ParameterError("build_integrand: tag needs a smooth-distance field");
  };

  switch (kind) {
    case IntegrandKind::hess_u: {
      needs_u();
      if (d < n - 1) out.counterexample_regime = true;
      const ScalarField hess = hessian_norm(*u);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!hess.valid[i] || !u->valid[i] || u->values[i] <= 0) continue;
        const double delta = grid.delta(i);
        out.f.values[i] = delta * delta * hess.values[i] / u->values[i];
        out.f.valid[i] = 1;
      }
      break;
    }
    case IntegrandKind::grad_abs_grad_u:
    case IntegrandKind::grad_sq_grad_u: {
      needs_u();
      const DerivedFields df = derive_fields(*u);
      const bool sq = (kind == IntegrandKind::grad_sq_grad_u);
      const ScalarField& top = sq ? df.grad_grad_sq : df.grad_grad_norm;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!top.valid[i] || !u->valid[i] || u->values[i] <= 0) continue;
        const double delta = grid.delta(i);
        const double uu = u->values[i];
        out.f.values[i] = sq ? delta * delta * delta * top.values[i] / (uu * uu)
                             : delta * delta * top.values[i] / uu;
        out.f.valid[i] = 1;
      }
      break;
    }
    case IntegrandKind::logratio_grad:
    case IntegrandKind::logratio_hess: {
      needs_u();
      needs_field();
      ScalarField Dv(grid);
      const double guard = std::max(2.0 * grid.h(), 2.5 * field->sample().spacing);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.cls(i) != NodeClass::Interior || grid.delta(i) < guard) continue;
        Dv.values[i] = field->evaluate(grid.node(i), 0).D.value;
        Dv.valid[i] = 1;
      }
      const ScalarField lr = log_ratio(*u, Dv, false);
      if (kind == IntegrandKind::logratio_grad) {
        const ScalarField gn = magnitude(gradient(lr));
        for (std::size_t i = 0; i < grid.size(); ++i) {
          if (!gn.valid[i] || !Dv.valid[i]) continue;
          out.f.values[i] = Dv.values[i] * gn.values[i];
          out.f.valid[i] = 1;
        }
      } else {
        const ScalarField hn = hessian_norm(lr);
        for (std::size_t i = 0; i < grid.size(); ++i) {
          if (!hn.valid[i] || !Dv.valid[i]) continue;
          out.f.values[i] = Dv.values[i] * Dv.values[i] * hn.values[i];
          out.f.valid[i] = 1;
        }
      }
      break;
    }
    case IntegrandKind::dkp_coeff: {
      // |grad A| by centered differences of the coefficient entries; entrywise
      // sup norm matches the DKP examples
      const double h = grid.h();
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.cls(i) != NodeClass::Interior || grid.delta(i) < 2.0 * h) continue;
        const Vector X = grid.node(i);
        double worst = 0.0;
        for (int a = 0; a < n; ++a) {
          Vector Xp = X, Xm = X;
          Xp[a] += 0.5 * h;
          Xm[a] -= 0.5 * h;
          const Matrix diff = (spec.coeff_at(Xp) - spec.coeff_at(Xm)) / h;
          worst = std::max(worst, diff.cwiseAbs().maxCoeff());
        }
        out.f.values[i] = grid.delta(i) * worst;
        out.f.valid[i] = 1;
      }
      break;
    }
    case IntegrandKind::dem_g1:
    case IntegrandKind::dem_g2:
    case IntegrandKind::dem_ind:
    case IntegrandKind::weight_div: {
      needs_field();
      const double guard = std::max(2.0 * grid.h(), 2.5 * field->sample().spacing);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.cls(i) != NodeClass::Interior || grid.delta(i) < guard) continue;
        const DemIntegrands dem = field->dem_integrands(grid.node(i));
        switch (kind) {
          case IntegrandKind::dem_g1: out.f.values[i] = dem.g1; break;
          case IntegrandKind::dem_g2: out.f.values[i] = dem.g2; break;
          case IntegrandKind::dem_ind: out.f.values[i] = dem.ind; break;
          default: out.f.values[i] = dem.wdiv; break;
        }
        out.f.valid[i] = 1;
      }
      break;
    }
  }
  if (pole) mask_near(out.f, *pole, 4.0 * grid.h());
  return out;
}

TrendResult classify_trend(const std::vector<std::pair<double, double>>& ladder) {
  TrendResult t;
  if (ladder.size() < 2) return t;
  double gmin = std::numeric_limits<double>::infinity(), gmax = 0.0;
  for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
    const double a = ladder[i].second, b = ladder[i + 1].second;
    const double growth = (a > 1e-12) ? b / a : 1.0;
    gmin = std::min(gmin, growth);
    gmax = std::max(gmax, growth);
  }
  t.growth_min = gmin;
  t.growth_max = gmax;
  const double first = ladder.front().second, last = ladder.back().second;
  t.divergent = (last > 1e-12) && gmin >= 1.08 && (first <= 1e-12 || last / first >= 1.25);
  // slope of sup against log(1/h)
  double sxx = 0, sxy = 0, sx = 0, sy = 0;
  const double m = static_cast<double>(ladder.size());
  for (const auto& [h, v] : ladder) {
    const double lx = std::log(1.0 / h);
    sx += lx;
    sy += v;
    sxx += lx * lx;
    sxy += lx * v;
  }
  const double denom = m * sxx - sx * sx;
  if (denom > 0) t.slope = (m * sxy - sx * sy) / denom;
  return t;
}

DkpReport dkp_check(const OperatorSpec& spec, const DomainBox& domain,
                    const BoundarySample& sample, const std::vector<double>& h_ladder,
                    const std::vector<double>& scales) {
  DkpReport rep;
  for (double h : h_ladder) {
    const Grid grid(domain, h);
    const IntegrandResult f = build_integrand(IntegrandKind::dkp_coeff, grid, nullptr, nullptr,
                                              spec, nullptr);
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (f.f.valid[i]) rep.sup_coeff = std::max(rep.sup_coeff, f.f.values[i]);
    const int k_min = static_cast<int>(std::floor(-std::log2(0.5 * sample.diam)));
    const int k_max =
        std::max(k_min, static_cast<int>(std::floor(-std::log2(*std::min_element(
                            scales.begin(), scales.end())))));
    const ChristForest forest = build_christ_cubes(sample, k_min, k_max);
    const CarlesonReport cr = carleson_norm(f.f, sample, forest, scales);
    rep.ladder.emplace_back(h, cr.sup);
  }
  const TrendResult t = classify_trend(rep.ladder);
  rep.dkp = !t.divergent;
  rep.growth_min = t.growth_min;
  rep.growth_max = t.growth_max;
  return rep;
}

std::vector<CaccioppoliEntry> caccioppoli_check(const ScalarField& u,
                                                const SmoothDistanceField& field,
                                                const OperatorSpec& spec,
                                                const std::vector<WhitneyCube>& cubes,
                                                double min_side, const Vector* pole) {
  const Grid& grid = *u.grid;
  const int n = grid.n();
  const double d = spec.d;
  const double hn = std::pow(grid.h(), n);
  const double guard = std::max(2.0 * grid.h(), 2.5 * field.sample().spacing);

  // collect the cubes first so the expensive field pass can restrict to the
  // union of their dilates
  std::vector<const WhitneyCube*> active;
  for (const WhitneyCube& w : cubes) {
    if (w.side < min_side) continue;
    const Vector c = w.center();
    const double rstar = 2.0 * w.side;
    bool inside = true;
    for (int j = 0; j < n; ++j)
      inside = inside && (c[j] - rstar >= grid.lo()[j] - 1e-12) &&
               (c[j] + rstar <= grid.hi()[j] + 1e-12);
    if (!inside) continue;
    if (pole && (*pole - c).norm() < rstar + 4.0 * grid.h()) continue;
    active.push_back(&w);
  }

  // D, wdiv over the needed region (one order-2 evaluation per node; the
  // log-ratio derivatives need a one-ring margin)
  ScalarField Dv(grid);
  ScalarField wdiv(grid);
  {
    std::vector<uint8_t> need(grid.size(), 0);
    const double margin = 3.0 * grid.h();
    for (const WhitneyCube* w : active) {
      const Vector c = w->center();
      const double rad = 2.0 * w->side + margin;
      std::vector<int> lo(n), hi(n);
      for (int j = 0; j < n; ++j) {
        lo[j] = std::max(0, static_cast<int>(std::floor((c[j] - rad - grid.lo()[j]) / grid.h())));
        hi[j] = std::min(grid.dims()[j] - 1,
                         static_cast<int>(std::ceil((c[j] + rad - grid.lo()[j]) / grid.h())));
      }
      std::vector<int> cc = lo;
      while (true) {
        need[grid.index(cc)] = 1;
        int j = n - 1;
        while (j >= 0 && cc[j] == hi[j]) {
          cc[j] = lo[j];
          --j;
        }
        if (j < 0) break;
        ++cc[j];
      }
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!need[i] || grid.cls(i) != NodeClass::Interior || grid.delta(i) < guard) continue;
      const SmoothDistanceEval ev = field.evaluate(grid.node(i), 2);
      Dv.values[i] = ev.D.value;
      Dv.valid[i] = 1;
      wdiv.values[i] = field.dem_from_eval(ev).wdiv;
      wdiv.valid[i] = 1;
    }
  }
  const ScalarField lr = log_ratio(u, Dv, false);
  const ScalarField lr_grad = magnitude(gradient(lr));
  const ScalarField lr_hess = hessian_norm(lr);
  const IntegrandResult coeff =
      spec.identity() ? IntegrandResult{}
                      : build_integrand(IntegrandKind::dkp_coeff, grid, nullptr, nullptr, spec);

  std::vector<CaccioppoliEntry> out;
  for (const WhitneyCube* wp : active) {
    const WhitneyCube& w = *wp;
    const Vector c = w.center();
    const double rstar = 2.0 * w.side;
    CaccioppoliEntry e;
    e.cube = w;
    long lhs_cells = 0;
    std::vector<int> lo(n), hi(n);
    for (int j = 0; j < n; ++j) {
      lo[j] = std::max(0, static_cast<int>(std::ceil((c[j] - rstar - grid.lo()[j]) / grid.h())));
      hi[j] = std::min(grid.dims()[j] - 1,
                       static_cast<int>(std::floor((c[j] + rstar - grid.lo()[j]) / grid.h())));
    }
    std::vector<int> cc = lo;
    while (true) {
      const std::size_t i = grid.index(cc);
      const Vector X = grid.node(i);
      const double dist_c = (X - c).norm();
      const bool in_cube = ((X - w.corner).minCoeff() >= -1e-12) &&
                           ((w.corner + Vector::Constant(n, w.side) - X).minCoeff() >= -1e-12);
      const bool in_star = dist_c < rstar;
      if (in_cube && lr_hess.valid[i] && Dv.valid[i]) {
        e.lhs += lr_hess.values[i] * lr_hess.values[i] * std::pow(Dv.values[i], d + 4 - n) * hn;
        ++lhs_cells;
      }
      if (in_star && Dv.valid[i]) {
        if (lr_grad.valid[i])
          e.rhs_grad +=
              lr_grad.values[i] * lr_grad.values[i] * std::pow(Dv.values[i], d + 2 - n) * hn;
        if (wdiv.valid[i])
          e.rhs_wdiv += wdiv.values[i] * wdiv.values[i] * std::pow(Dv.values[i], d - n) * hn;
        if (!spec.identity() && coeff.f.valid[i])
          e.rhs_coeff +=
              coeff.f.values[i] * coeff.f.values[i] * std::pow(Dv.values[i], d - n) * hn;
      }
      int j = n - 1;
      while (j >= 0 && cc[j] == hi[j]) {
        cc[j] = lo[j];
        --j;
      }
      if (j < 0) break;
      ++cc[j];
    }
    if (lhs_cells == 0) continue;
    const double rhs = e.rhs_grad + e.rhs_wdiv + e.rhs_coeff;
    e.constant = rhs > 0 ? e.lhs / rhs : (e.lhs > 0 ? std::numeric_limits<double>::infinity() : 0);
    out.push_back(e);
  }
  return out;
}

void write_carleson_csv(const CarlesonReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_carleson_csv: cannot open " + path);
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  if (!report.table.empty()) {
    const int n = static_cast<int>(report.table.front().center.size());
    for (int j = 0; j < n; ++j) out << "c" << j << ",";
    out << "r,value,cells_used\n";
    for (const BallEntry& e : report.table) {
      if (e.absent) continue;
      for (int j = 0; j < n; ++j) out << num(e.center[j]) << ",";
      out << num(e.r) << "," << num(e.value) << "," << e.cells << "\n";
    }
  }
  out << "# summary {\"sup\": " << num(report.sup) << ", \"argmax\": [";
  if (report.argmax >= 0) {
    const BallEntry& a = report.table[report.argmax];
    for (int j = 0; j < a.center.size(); ++j) out << (j ? ", " : "") << num(a.center[j]);
    out << "], \"argmax_r\": " << num(a.r);
  } else {
    out << "], \"argmax_r\": 0";
  }
  out << ", \"h\": " << num(report.h) << ", \"trend_slope\": " << num(report.trend_slope)
      << "}\n";
}

}  // namespace urlab
