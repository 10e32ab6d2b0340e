#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "genreg/features.hpp"

namespace genreg {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Branch { Img, Geo };

/// Cosine similarities, N_src × N_tgt.
struct SimilarityMatrix {
  RowMatrixXd values;
  Branch branch = Branch::Geo;
};

/// Row-stochastic correspondence probabilities.
struct PosteriorMatrix {
  RowMatrixXd values;
  double tau = 0.0;
};

/// S = F_src F_tgtᵀ. Rows are expected to be unit-normalized already.
SimilarityMatrix similarity_geo(const FeatureField& src, const FeatureField& tgt);

/// S_ij = max over views k of <src[k]_i, tgt[k]_j>.
SimilarityMatrix similarity_img_maxpool(const ViewFeatureStack& src, const ViewFeatureStack& tgt);

/// Row-wise softmax of S/τ with row-max subtraction.
PosteriorMatrix posterior_softmax(const SimilarityMatrix& s, double tau);

/// Rows whose `covered` flag is 0 become the uniform row 1/N_tgt.
void replace_uncovered_rows(PosteriorMatrix& p, std::span<const std::uint8_t> covered);

}  // namespace genreg
