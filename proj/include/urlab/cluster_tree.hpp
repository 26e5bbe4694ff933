#pragma once

#include <utility>
#include <vector>

#include "urlab/types.hpp"

namespace urlab {

// Binary cluster tree over a weighted point set (rows of `points`).
// Each node stores the weighted centroid, total weight and covering radius,
// which is all the far-field monopole evaluation and nearest-atom queries need.
class ClusterTree {
 public:
  struct Node {
    int begin = 0, end = 0;  // range in order()
    int left = -1, right = -1;
    Vector centroid;
    double weight = 0.0;
    double radius = 0.0;
    bool leaf() const { return left < 0; }
  };

  ClusterTree() = default;
  // The tree keeps its own copy of the points: samples are freely copyable
  // and the shared tree must not dangle.
  ClusterTree(Matrix points, const Vector& weights, int leaf_size = 8);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<int>& order() const { return order_; }
  int root() const { return nodes_.empty() ? -1 : 0; }
  bool empty() const { return nodes_.empty(); }

  // Index of the nearest point to X and its distance.
  std::pair<int, double> nearest(const Vector& X) const;

 private:
  int build(int begin, int end, int leaf_size);
  void nearest_rec(int node, const Vector& X, int& best, double& best_d) const;

  Matrix points_;
  const Vector* weights_ref_ = nullptr;  // build-time only
  std::vector<Node> nodes_;
  std::vector<int> order_;
};

}  // namespace urlab
