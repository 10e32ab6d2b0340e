#include "genreg/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "genreg/kdtree.hpp"

namespace genreg {

void ViewFeatureStack::validate() const {
  if (k < 1) throw std::invalid_argument("view stack: K must be at least 1");
  const auto expected = static_cast<std::size_t>(k) * static_cast<std::size_t>(k);
  if (views.size() != expected)
    throw std::invalid_argument("view stack: K=" + std::to_string(k) + " requires " +
                                std::to_string(expected) + " views, got " +
                                std::to_string(views.size()));
  for (const auto& v : views) {
    if (v.rows() != rows() || v.dim() != dim())
      throw std::invalid_argument("view stack: views disagree on point count or dimension");
  }
}

std::size_t TransferredFeatures::covered_count() const {
  return static_cast<std::size_t>(std::count(covered.begin(), covered.end(), 1));
}

FeatureField l2_normalize_rows(const FeatureField& f) {
  FeatureField out = f;
  const Eigen::Index n = f.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = f.descriptors.row(i).cast<double>().norm();
    if (norm > 0.0) {
      out.descriptors.row(i) = (f.descriptors.row(i).cast<double>() / norm).cast<float>();
    }
  }
  return out;
}

ViewFeatureStack l2_normalize_rows(const ViewFeatureStack& s) {
  ViewFeatureStack out;
  out.k = s.k;
  out.views.reserve(s.views.size());
  for (const auto& v : s.views) out.views.push_back(l2_normalize_rows(v));
  return out;
}

TransferredFeatures lift_image_features(const LiftedPixelFeatures& lifted, const PointCloud& cloud,
                                        double max_dist) {
  if (!(max_dist > 0.0)) throw std::invalid_argument("max_dist must be positive");
  if (lifted.pixel_points.size() != static_cast<std::size_t>(lifted.pixel_descriptors.rows()))
    throw std::invalid_argument("lifted pixels and descriptors disagree in count");

  TransferredFeatures out{FeatureField(static_cast<Eigen::Index>(cloud.size()),
                                       lifted.pixel_descriptors.dim()),
                          std::vector<std::uint8_t>(cloud.size(), 0)};
  if (lifted.pixel_points.empty()) return out;

  const KdTree tree(lifted.pixel_points);
  const double max_d2 = max_dist * max_dist;
  const auto n = static_cast<std::int64_t>(cloud.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < n; ++i) {
    const NearestHit hit = tree.nearest(cloud.points[i]);
    if (hit.index >= 0 && hit.squared_distance <= max_d2) {
      out.field.descriptors.row(i) = lifted.pixel_descriptors.descriptors.row(hit.index);
      out.covered[i] = 1;
    }
  }
  return out;
}

TransferredStack lift_image_stack(std::span<const LiftedPixelFeatures> per_view, int k,
                                  const PointCloud& cloud, double max_dist) {
  TransferredStack out;
  out.stack.k = k;
  out.covered.assign(cloud.size(), 0);
  for (const auto& view : per_view) {
    TransferredFeatures t = lift_image_features(view, cloud, max_dist);
    for (std::size_t i = 0; i < cloud.size(); ++i) out.covered[i] |= t.covered[i];
    out.stack.views.push_back(std::move(t.field));
  }
  out.stack.validate();
  return out;
}

std::vector<std::uint8_t> coverage_from_stack(const ViewFeatureStack& s) {
  std::vector<std::uint8_t> covered(static_cast<std::size_t>(s.rows()), 0);
  for (const auto& v : s.views) {
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      if (!covered[i] && (v.descriptors.row(i).array() != 0.0f).any()) covered[i] = 1;
    }
  }
  return covered;
}

FeatureField best_view_descriptors(const ViewFeatureStack& s) {
  FeatureField out(s.rows(), s.dim());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double best_norm = -1.0;
    for (const auto& v : s.views) {
      const double norm = v.descriptors.row(i).cast<double>().squaredNorm();
      if (norm > best_norm) {
        best_norm = norm;
        out.descriptors.row(i) = v.descriptors.row(i);
      }
    }
  }
  return out;
}

}  // namespace genreg
