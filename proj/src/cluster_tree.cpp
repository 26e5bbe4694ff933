#include "urlab/cluster_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace urlab {

ClusterTree::ClusterTree(Matrix points, const Vector& weights, int leaf_size)
    : points_(std::move(points)) {
  if (points_.rows() == 0) return;
  if (points_.rows() != weights.size())
    throw ParameterError("ClusterTree: points/weights size mismatch");
  order_.resize(points_.rows());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * points_.rows() / std::max(1, leaf_size) + 8);

  // weights are captured per node as the running monopole mass
  weights_ref_ = &weights;
  build(0, static_cast<int>(points_.rows()), std::max(1, leaf_size));
  weights_ref_ = nullptr;
}

int ClusterTree::build(int begin, int end, int leaf_size) {
  const Matrix& pts = points_;
  const Vector& w = *weights_ref_;
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  {
    Node& nd = nodes_[id];
    nd.begin = begin;
    nd.end = end;
    nd.centroid = Vector::Zero(pts.cols());
    for (int i = begin; i < end; ++i) {
      const double wi = w[order_[i]];
      nd.weight += wi;
      nd.centroid += wi * pts.row(order_[i]).transpose();
    }
    if (nd.weight > 0) nd.centroid /= nd.weight;
    double r2 = 0;
    for (int i = begin; i < end; ++i)
      r2 = std::max(r2, (pts.row(order_[i]).transpose() - nd.centroid).squaredNorm());
    nd.radius = std::sqrt(r2);
  }
  if (end - begin > leaf_size) {
    // split along the widest axis at the median, ties by index for determinism
    Vector lo = pts.row(order_[begin]).transpose(), hi = lo;
    for (int i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(pts.row(order_[i]).transpose());
      hi = hi.cwiseMax(pts.row(order_[i]).transpose());
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                       const double pa = pts(a, axis), pb = pts(b, axis);
                       return pa < pb || (pa == pb && a < b);
                     });
    const int left = build(begin, mid, leaf_size);
    const int right = build(mid, end, leaf_size);
    nodes_[id].left = left;
    nodes_[id].right = right;
  }
  return id;
}

std::pair<int, double> ClusterTree::nearest(const Vector& X) const {
  if (nodes_.empty()) throw ParameterError("ClusterTree::nearest on empty tree");
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  nearest_rec(0, X, best, best_d);
  return {best, best_d};
}

void ClusterTree::nearest_rec(int node, const Vector& X, int& best, double& best_d) const {
  const Node& nd = nodes_[node];
  const double gap = (X - nd.centroid).norm() - nd.radius;
  if (gap >= best_d) return;
  if (nd.leaf()) {
    for (int i = nd.begin; i < nd.end; ++i) {
      const double d = (points_.row(order_[i]).transpose() - X).norm();
      if (d < best_d || (d == best_d && order_[i] < best)) {
        best_d = d;
        best = order_[i];
      }
    }
    return;
  }
  const Node& l = nodes_[nd.left];
  const Node& r = nodes_[nd.right];
  const double dl = (X - l.centroid).norm() - l.radius;
  const double dr = (X - r.centroid).norm() - r.radius;
  if (dl <= dr) {
    nearest_rec(nd.left, X, best, best_d);
    nearest_rec(nd.right, X, best, best_d);
  } else {
    nearest_rec(nd.right, X, best, best_d);
    nearest_rec(nd.left, X, best, best_d);
  }
}

}  // namespace urlab
