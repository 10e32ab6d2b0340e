#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "genreg/correspondence.hpp"
#include "genreg/geometry.hpp"

namespace genreg {

struct Correspondence {
  std::int64_t src = 0;
  std::int64_t tgt = 0;
  double confidence = 0.0;

  bool operator==(const Correspondence&) const = default;
};

using CorrespondenceSet = std::vector<Correspondence>;

class PoseError : public std::invalid_argument {
 public:
  enum class Kind { TooFewPairs, Degenerate, IndexOutOfRange };
  PoseError(Kind kind, const std::string& what) : std::invalid_argument(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Pairs (i, j) where j is the row argmax of i and i the column argmax of j.
/// Ties resolve to the lowest index. Output sorted by src index.
CorrespondenceSet mutual_nn_match(const RowMatrixXd& scores);

/// Closed-form least-squares rigid fit (centroids + SVD of the cross-covariance,
/// with reflection correction). Requires ≥ 3 pairs that are not collinear: the
/// second singular value of the centered source set must be ≥ 1e-9 × the first.
RigidTransform horn_fit(std::span<const Vec3> src, std::span<const Vec3> tgt);
RigidTransform horn_fit(const CorrespondenceSet& c, const PointCloud& src, const PointCloud& tgt);

/// Σ‖R p_i + t − q_i‖² over the pairs.
double sum_squared_residual(const RigidTransform& t, std::span<const Vec3> src,
                            std::span<const Vec3> tgt);

inline constexpr double kCollinearityRatio = 1e-9;

struct RobustConfig {
  double d_comp = 0.05;     // pairwise length-consistency threshold (m)
  double d_inlier = 0.05;   // residual inlier threshold (m)
  int n_hypotheses = 1000;
  int n_seeds = 100;        // top-ranked correspondences used as hypothesis seeds
  int k_neighbors = 30;     // per-seed partner pool, ranked by second-order compatibility
  int min_inliers = 10;
  std::uint64_t seed = 0;
};

struct RegistrationResult {
  bool success = false;
  RigidTransform transform;
  std::vector<std::int64_t> inliers;  // indices into the correspondence set
  std::optional<double> rre_deg;
  std::optional<double> rte_m;
  std::string diagnostic;
};

/// Binary first-order compatibility: |‖p_a−p_b‖ − ‖q_a−q_b‖| ≤ d_comp, zero diagonal.
Eigen::MatrixXf compatibility_matrix(std::span<const Vec3> src, std::span<const Vec3> tgt,
                                     double d_comp);

/// Second-order compatibility C ⊙ (C·C): for compatible pairs, the number of
/// correspondences compatible with both.
Eigen::MatrixXf second_order_compatibility(const Eigen::MatrixXf& compat);

/// Spatial-compatibility hypothesize-and-verify estimator. Never throws on
/// bad data; a result with success=false carries the reason.
RegistrationResult robust_register(const CorrespondenceSet& c, const PointCloud& src,
                                   const PointCloud& tgt, const RobustConfig& cfg);

/// Rotation error in degrees: the angle of R_gtᵀ R_est.
double rre(const Mat3& r_est, const Mat3& r_gt);
/// Translation error in meters.
double rte(const Vec3& t_est, const Vec3& t_gt);

void attach_ground_truth(RegistrationResult& r, const RigidTransform& gt);

}  // namespace genreg
