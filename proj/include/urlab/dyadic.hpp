#pragma once

#include <functional>
#include <string>
#include <vector>

#include "urlab/boundary.hpp"
#include "urlab/types.hpp"

namespace urlab {

// Christ-David pseudo-cube: a set of atoms with a center and dyadic scale.
struct ChristCube {
  int id = -1;
  int k = 0;  // generation, scale 2^{-k}
  Vector center;
  std::vector<int> members;  // atom indices, sorted
  double sigma_mass = 0.0;
  int parent = -1;
  std::vector<int> children;
  double scale() const { return std::pow(2.0, -k); }
};

class ChristForest {
 public:
  std::vector<ChristCube> cubes;
  std::vector<int> roots;
  int k_min = 0, k_max = 0;
  double a0 = 0.0;  // achieved inner constant, min over cubes
  const BoundarySample* sample = nullptr;

  const std::vector<int>& generation(int k) const { return by_generation_.at(k - k_min); }
  int generations() const { return k_max - k_min + 1; }
  void index_generations();

 private:
  std::vector<std::vector<int>> by_generation_;
};

// Farthest-point sampling of centers per generation (medoid-seeded, one Lloyd
// polish), atoms assigned to the nearest center within their parent.
ChristForest build_christ_cubes(const BoundarySample& sample, int k_min, int k_max);

// (sum of sigma_mass over Q <= Q0 with predicate(Q)) / sigma_mass(Q0).
double packing_sum(const ChristForest& forest, const std::function<bool(const ChristCube&)>& pred,
                   int q0_id);

// Text export: one row `id k x_Q... sigma_mass parent_id` per cube.
void write_forest(const ChristForest& forest, const std::string& path);

}  // namespace urlab
