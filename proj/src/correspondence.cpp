#include "genreg/correspondence.hpp"

#include <cmath>
#include <string>

namespace genreg {

namespace {

void check_same_dim(const FeatureField& a, const FeatureField& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("descriptor dimension mismatch: " + std::to_string(a.dim()) +
                                " vs " + std::to_string(b.dim()));
}

}  // namespace

SimilarityMatrix similarity_geo(const FeatureField& src, const FeatureField& tgt) {
  check_same_dim(src, tgt);
  const Eigen::MatrixXd tgt_d = tgt.descriptors.cast<double>();
  SimilarityMatrix out{RowMatrixXd(src.rows(), tgt.rows()), Branch::Geo};
  const Eigen::Index n = src.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd row = src.descriptors.row(i).cast<double>().transpose();
    out.values.row(i).noalias() = (tgt_d * row).transpose();
  }
  return out;
}

SimilarityMatrix similarity_img_maxpool(const ViewFeatureStack& src, const ViewFeatureStack& tgt) {
  if (src.view_count() != tgt.view_count())
    throw std::invalid_argument("view count mismatch: " + std::to_string(src.view_count()) +
                                " vs " + std::to_string(tgt.view_count()));
  if (src.view_count() == 0) throw std::invalid_argument("empty view stack");
  if (src.dim() != tgt.dim()) throw std::invalid_argument("image descriptor dimension mismatch");

  std::vector<Eigen::MatrixXd> tgt_views;
  tgt_views.reserve(tgt.view_count());
  for (const auto& v : tgt.views) tgt_views.push_back(v.descriptors.cast<double>());

  SimilarityMatrix out{RowMatrixXd(src.rows(), tgt.rows()), Branch::Img};
  const Eigen::Index n = src.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd best;
    for (std::size_t k = 0; k < src.view_count(); ++k) {
      const Eigen::VectorXd row = src.views[k].descriptors.row(i).cast<double>().transpose();
      const Eigen::RowVectorXd sims = (tgt_views[k] * row).transpose();
      best = k == 0 ? sims : best.cwiseMax(sims).eval();
    }
    out.values.row(i) = best;
  }
  return out;
}

PosteriorMatrix posterior_softmax(const SimilarityMatrix& s, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("softmax temperature must be positive");
  PosteriorMatrix out{RowMatrixXd(s.values.rows(), s.values.cols()), tau};
  const Eigen::Index n = s.values.rows();
  const Eigen::Index m = s.values.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    if (m == 0) continue;
    const double row_max = s.values.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double e = std::exp((s.values(i, j) - row_max) / tau);
      out.values(i, j) = e;
      sum += e;
    }
    out.values.row(i) /= sum;
  }
  return out;
}

void replace_uncovered_rows(PosteriorMatrix& p, std::span<const std::uint8_t> covered) {
  if (covered.size() != static_cast<std::size_t>(p.values.rows()))
    throw std::invalid_argument("coverage mask length does not match posterior rows");
  const Eigen::Index m = p.values.cols();
  if (m == 0) return;
  const double uniform = 1.0 / static_cast<double>(m);
  for (Eigen::Index i = 0; i < p.values.rows(); ++i) {
    if (!covered[i]) p.values.row(i).setConstant(uniform);
  }
}

}  // namespace genreg
