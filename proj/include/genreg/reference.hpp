#pragma once

// Serial reference kernels. Straightforward loops with no OpenMP and no
// Eigen products; the parallel kernels are tested and benchmarked against
// these.

#include <span>

#include "genreg/correspondence.hpp"
#include "genreg/fusion.hpp"
#include "genreg/kdtree.hpp"
#include "genreg/pose.hpp"

namespace genreg::reference {

RowMatrixXd similarity(const FeatureField& src, const FeatureField& tgt);
RowMatrixXd similarity_maxpool(const ViewFeatureStack& src, const ViewFeatureStack& tgt);
RowMatrixXd softmax_rows(const RowMatrixXd& s, double tau);

/// Odds-form route: odds(p) = odds(a)·odds(b)/odds(π).
RowMatrixXd noisy_and_odds(const RowMatrixXd& a, const RowMatrixXd& b, double prior);
RowMatrixXd noisy_or(const RowMatrixXd& a, const RowMatrixXd& b);

/// Exhaustive double-argmax scan.
CorrespondenceSet mutual_nn(const RowMatrixXd& scores);

/// O(N) scan, lowest index on ties.
NearestHit nearest(const PointCloud& cloud, const Vec3& q);

Eigen::MatrixXf compatibility(std::span<const Vec3> src, std::span<const Vec3> tgt, double d_comp);
Eigen::MatrixXf second_order(const Eigen::MatrixXf& compat);

}  // namespace genreg::reference
