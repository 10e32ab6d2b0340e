#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "genreg/geometry.hpp"

namespace genreg {

using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One descriptor per point (rows), stored as float32 to match the interchange format.
struct FeatureField {
  FeatureMatrix descriptors;

  FeatureField() = default;
  explicit FeatureField(FeatureMatrix m) : descriptors(std::move(m)) {}
  FeatureField(Eigen::Index n, Eigen::Index d) : descriptors(FeatureMatrix::Zero(n, d)) {}

  Eigen::Index rows() const { return descriptors.rows(); }
  Eigen::Index dim() const { return descriptors.cols(); }
};

/// K² per-view-pair descriptor fields over the same N points.
struct ViewFeatureStack {
  int k = 1;
  std::vector<FeatureField> views;

  std::size_t view_count() const { return views.size(); }
  Eigen::Index rows() const { return views.empty() ? 0 : views.front().rows(); }
  Eigen::Index dim() const { return views.empty() ? 0 : views.front().dim(); }
  /// Throws std::invalid_argument unless V = K² and all views share N and d.
  void validate() const;
};

/// Dense per-pixel features lifted to 3D for one view pair.
struct LiftedPixelFeatures {
  PointCloud pixel_points;
  FeatureField pixel_descriptors;
};

struct TransferredFeatures {
  FeatureField field;
  std::vector<std::uint8_t> covered;  // 1 where the nearest pixel lies within max_dist

  std::size_t covered_count() const;
};

struct TransferredStack {
  ViewFeatureStack stack;
  std::vector<std::uint8_t> covered;  // covered in at least one view
};

FeatureField l2_normalize_rows(const FeatureField& f);
ViewFeatureStack l2_normalize_rows(const ViewFeatureStack& s);

/// Nearest lifted pixel per cloud point (exact, lowest pixel index on ties).
/// Points farther than max_dist keep a zero descriptor and are marked uncovered.
TransferredFeatures lift_image_features(const LiftedPixelFeatures& lifted, const PointCloud& cloud,
                                        double max_dist);

TransferredStack lift_image_stack(std::span<const LiftedPixelFeatures> per_view, int k,
                                  const PointCloud& cloud, double max_dist);

/// A point counts as covered when any view holds a nonzero descriptor for it.
std::vector<std::uint8_t> coverage_from_stack(const ViewFeatureStack& s);

/// Per point, the descriptor of the first view with the largest norm.
FeatureField best_view_descriptors(const ViewFeatureStack& s);

}  // namespace genreg
