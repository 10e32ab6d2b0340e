#pragma once

#include <cstdint>
#include <vector>

#include "genreg/geometry.hpp"

namespace genreg {

struct NearestHit {
  std::int64_t index = -1;  // -1 when the tree is empty
  double squared_distance = 0.0;
};

/// Exact 3D nearest-neighbour index. Equal distances resolve to the lowest
/// point index, so results do not depend on the build order.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(const PointCloud& cloud);

  NearestHit nearest(const Vec3& q) const;
  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::int32_t begin, end;  // range in order_
    std::int32_t left = -1, right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::int32_t begin, std::int32_t end, int depth);
  void search(std::int32_t node, const Vec3& q, NearestHit& best) const;

  std::vector<Vec3> points_;
  std::vector<std::int32_t> order_;
  std::vector<Node> nodes_;
  static constexpr std::int32_t kLeafSize = 12;
};

}  // namespace genreg
