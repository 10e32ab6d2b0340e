#include "genreg/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace genreg {

KdTree::KdTree(const PointCloud& cloud) : points_(cloud.points), order_(cloud.size()) {
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<std::int32_t>(points_.size()), 0);
  }
}

std::int32_t KdTree::build(std::int32_t begin, std::int32_t end, int depth) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::int32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all coincident: keep as leaf
  (void)depth;

  const std::int32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::int32_t a, std::int32_t b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid, depth + 1);
  const std::int32_t right = build(mid, end, depth + 1);
  Node& n = nodes_[id];
  n.axis = axis;
  n.split = split;
  n.left = left;
  n.right = right;
  return id;
}

void KdTree::search(std::int32_t node_id, const Vec3& q, NearestHit& best) const {
  const Node& n = nodes_[node_id];
  if (n.left < 0) {
    for (std::int32_t i = n.begin; i < n.end; ++i) {
      const std::int32_t idx = order_[i];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (best.index < 0 || d2 < best.squared_distance ||
          (d2 == best.squared_distance && idx < best.index)) {
        best = {idx, d2};
      }
    }
    return;
  }
  // Left child holds coordinates <= split, right child >= split.
  const double diff = q[n.axis] - n.split;
  const std::int32_t near = diff <= 0 ? n.left : n.right;
  const std::int32_t far = diff <= 0 ? n.right : n.left;
  search(near, q, best);
  if (best.index < 0 || diff * diff <= best.squared_distance) search(far, q, best);
}

NearestHit KdTree::nearest(const Vec3& q) const {
  NearestHit best;
  if (!nodes_.empty()) search(0, q, best);
  return best;
}

}  // namespace genreg
