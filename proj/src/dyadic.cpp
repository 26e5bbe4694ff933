#include "urlab/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace urlab {

namespace {

// Partition the atom set `members` into clusters of coverage radius < scale.
// Seeds: weighted medoid first, then farthest-point; one Lloyd polish keeps
// centers representative so aligned structures (self-similar squares) land in
// single cubes.
struct Cluster {
  int center_atom;
  std::vector<int> members;
};

std::vector<Cluster> split_cell(const BoundarySample& s, const std::vector<int>& members,
                                double scale) {
  const double cover = 0.999 * scale;
  std::vector<int> centers;

  // medoid seed: atom nearest the weighted centroid
  Vector centroid = Vector::Zero(s.n);
  double wsum = 0;
  for (int i : members) {
    centroid += s.weights[i] * s.points.row(i).transpose();
    wsum += s.weights[i];
  }
  centroid /= wsum;
  int seed = members.front();
  double best = std::numeric_limits<double>::infinity();
  for (int i : members) {
    const double dd = (s.points.row(i).transpose() - centroid).norm();
    if (dd < best || (dd == best && i < seed)) {
      best = dd;
      seed = i;
    }
  }
  centers.push_back(seed);

  std::vector<double> dist(members.size());
  auto refresh = [&](int new_center) {
    const Vector c = s.points.row(new_center).transpose();
    for (size_t j = 0; j < members.size(); ++j) {
      const double dd = (s.points.row(members[j]).transpose() - c).norm();
      if (centers.size() == 1 || dd < dist[j]) dist[j] = dd;
    }
  };
  refresh(seed);
  while (true) {
    size_t far = 0;
    for (size_t j = 1; j < members.size(); ++j)
      if (dist[j] > dist[far]) far = j;
    if (dist[far] < cover) break;
    centers.push_back(members[far]);
    refresh(members[far]);
  }

  auto assign = [&](const std::vector<int>& ctrs) {
    std::vector<Cluster> cl(ctrs.size());
    for (size_t c = 0; c < ctrs.size(); ++c) cl[c].center_atom = ctrs[c];
    for (int i : members) {
      const Vector y = s.points.row(i).transpose();
      size_t bestc = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (size_t c = 0; c < ctrs.size(); ++c) {
        const double dd = (s.points.row(ctrs[c]).transpose() - y).norm();
        if (dd < bd || (dd == bd && ctrs[c] < ctrs[bestc])) {
          bd = dd;
          bestc = c;
        }
      }
      cl[bestc].members.push_back(i);
    }
    cl.erase(std::remove_if(cl.begin(), cl.end(),
                            [](const Cluster& c) { return c.members.empty(); }),
             cl.end());
    return cl;
  };

  std::vector<Cluster> clusters = assign(centers);
  // Lloyd polish: recenter on the member medoid, reassign, keep if coverage
  // still clears the target
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<int> recentered;
    for (const Cluster& cl : clusters) {
      Vector c = Vector::Zero(s.n);
      double w = 0;
      for (int i : cl.members) {
        c += s.weights[i] * s.points.row(i).transpose();
        w += s.weights[i];
      }
      c /= w;
      int med = cl.members.front();
      double bd = std::numeric_limits<double>::infinity();
      for (int i : cl.members) {
        const double dd = (s.points.row(i).transpose() - c).norm();
        if (dd < bd || (dd == bd && i < med)) {
          bd = dd;
          med = i;
        }
      }
      recentered.push_back(med);
    }
    std::sort(recentered.begin(), recentered.end());
    recentered.erase(std::unique(recentered.begin(), recentered.end()), recentered.end());
    std::vector<Cluster> next = assign(recentered);
    bool ok = true;
    for (const Cluster& cl : next) {
      const Vector c = s.points.row(cl.center_atom).transpose();
      for (int i : cl.members)
        if ((s.points.row(i).transpose() - c).norm() >= cover) ok = false;
    }
    if (!ok) break;
    clusters = std::move(next);
  }
  for (Cluster& cl : clusters) std::sort(cl.members.begin(), cl.members.end());
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster& a, const Cluster& b) { return a.center_atom < b.center_atom; });
  return clusters;
}

}  // namespace

void ChristForest::index_generations() {
  by_generation_.assign(generations(), {});
  for (const ChristCube& q : cubes) by_generation_[q.k - k_min].push_back(q.id);
}

ChristForest build_christ_cubes(const BoundarySample& sample, int k_min, int k_max) {
  if (k_max < k_min) throw ParameterError("build_christ_cubes: k_max < k_min");
  if (std::pow(2.0, -k_min) < 0.5 * sample.diam)
    throw ParameterError("build_christ_cubes: 2^{-k_min} must cover diam/2");
  if (std::pow(2.0, -k_max) < 4.0 * sample.spacing && sample.count() > 1)
    throw ResolutionError("build_christ_cubes: sample too sparse for requested k_max");

  ChristForest forest;
  forest.sample = &sample;
  forest.k_min = k_min;
  forest.k_max = k_max;

  std::vector<int> all(sample.count());
  for (int i = 0; i < sample.count(); ++i) all[i] = i;

  std::vector<int> frontier;  // cube ids of the previous generation
  for (int k = k_min; k <= k_max; ++k) {
    const double scale = std::pow(2.0, -k);
    std::vector<int> next;
    const bool rooting = (k == k_min);
    const int parents = rooting ? 1 : static_cast<int>(frontier.size());
    for (int p = 0; p < parents; ++p) {
      const std::vector<int>& cell = rooting ? all : forest.cubes[frontier[p]].members;
      const int parent_id = rooting ? -1 : frontier[p];
      for (const Cluster& cl : split_cell(sample, cell, scale)) {
        ChristCube q;
        q.id = static_cast<int>(forest.cubes.size());
        q.k = k;
        q.center = sample.points.row(cl.center_atom).transpose();
        q.members = cl.members;
        q.sigma_mass = 0;
        for (int i : cl.members) q.sigma_mass += sample.weights[i];
        q.parent = parent_id;
        forest.cubes.push_back(q);
        if (parent_id >= 0) forest.cubes[parent_id].children.push_back(q.id);
        if (rooting) forest.roots.push_back(q.id);
        next.push_back(q.id);
      }
    }
    frontier = std::move(next);
  }

  // achieved a0: nearest non-member atom to each center, in units of 2^{-k}
  double a0 = 1.0;
  std::vector<char> is_member(sample.count());
  for (const ChristCube& q : forest.cubes) {
    std::fill(is_member.begin(), is_member.end(), 0);
    for (int i : q.members) is_member[i] = 1;
    double nearest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < sample.count(); ++i) {
      if (is_member[i]) continue;
      nearest = std::min(nearest, (sample.points.row(i).transpose() - q.center).norm());
    }
    if (std::isfinite(nearest)) a0 = std::min(a0, nearest / q.scale());
  }
  forest.a0 = a0;
  forest.index_generations();
  return forest;
}

double packing_sum(const ChristForest& forest, const std::function<bool(const ChristCube&)>& pred,
                   int q0_id) {
  if (q0_id < 0 || q0_id >= static_cast<int>(forest.cubes.size()))
    throw ParameterError("packing_sum: cube id out of range");
  const ChristCube& q0 = forest.cubes[q0_id];
  double sum = 0;
  std::vector<int> stack{q0_id};
  while (!stack.empty()) {
    const ChristCube& q = forest.cubes[stack.back()];
    stack.pop_back();
    if (pred(q)) sum += q.sigma_mass;
    for (int c : q.children) stack.push_back(c);
  }
  return sum / q0.sigma_mass;
}

void write_forest(const ChristForest& forest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_forest: cannot open " + path);
  char buf[64];
  for (const ChristCube& q : forest.cubes) {
    out << q.id << " " << q.k << " ";
    for (int j = 0; j < q.center.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", q.center[j]);
      out << buf << " ";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", q.sigma_mass);
    out << buf << " " << q.parent << "\n";
  }
}

}  // namespace urlab
