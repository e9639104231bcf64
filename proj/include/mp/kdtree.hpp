#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mp {

/// Static 3-d kd-tree for exact nearest-neighbor queries. Returns the same
/// minimum distance a brute-force scan would (pruning never skips the true
/// nearest point).
class KdTree3 {
 public:
  explicit KdTree3(std::span<const Eigen::Vector3d> points)
      : points_(points.begin(), points.end()) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(points_.size());
    if (!points_.empty()) root_ = build(0, int(points_.size()));
  }

  bool empty() const { return points_.empty(); }

  /// (index of nearest point, squared distance).
  std::pair<int, double> nearest(const Eigen::Vector3d& query) const {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    search(root_, query, best, best_d2);
    return {best, best_d2};
  }

 private:
  struct Node {
    int point = -1;
    int axis = 0;
    int left = -1, right = -1;
  };

  int build(int lo, int hi) {
    if (lo >= hi) return -1;
    // Split on the widest axis of this subset.
    Eigen::AlignedBox3d box;
    for (int i = lo; i < hi; ++i) box.extend(points_[order_[i]]);
    int axis = 0;
    box.sizes().maxCoeff(&axis);

    const int mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    Node node;
    node.point = order_[mid];
    node.axis = axis;
    const int self = int(nodes_.size());
    nodes_.push_back(node);
    const int left = build(lo, mid);
    const int right = build(mid + 1, hi);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
  }

  void search(int id, const Eigen::Vector3d& q, int& best, double& best_d2) const {
    if (id < 0) return;
    const Node& node = nodes_[id];
    const Eigen::Vector3d& p = points_[node.point];
    const double d2 = (p - q).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = node.point;
    }
    const double delta = q[node.axis] - p[node.axis];
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search(near, q, best, best_d2);
    if (delta * delta < best_d2) search(far, q, best, best_d2);
  }

  std::vector<Eigen::Vector3d> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace mp
