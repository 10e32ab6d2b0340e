#include "genreg/reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace genreg::reference {

RowMatrixXd similarity(const FeatureField& src, const FeatureField& tgt) {
  if (src.dim() != tgt.dim()) throw std::invalid_argument("dimension mismatch");
  RowMatrixXd out(src.rows(), tgt.rows());
  for (Eigen::Index i = 0; i < src.rows(); ++i) {
    for (Eigen::Index j = 0; j < tgt.rows(); ++j) {
      double dot = 0.0;
      for (Eigen::Index k = 0; k < src.dim(); ++k)
        dot += static_cast<double>(src.descriptors(i, k)) * static_cast<double>(tgt.descriptors(j, k));
      out(i, j) = dot;
    }
  }
  return out;
}

RowMatrixXd similarity_maxpool(const ViewFeatureStack& src, const ViewFeatureStack& tgt) {
  if (src.view_count() != tgt.view_count() || src.view_count() == 0)
    throw std::invalid_argument("view count mismatch");
  RowMatrixXd out = similarity(src.views[0], tgt.views[0]);
  for (std::size_t v = 1; v < src.view_count(); ++v) {
    const RowMatrixXd s = similarity(src.views[v], tgt.views[v]);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = std::max(out(i, j), s(i, j));
  }
  return out;
}

RowMatrixXd softmax_rows(const RowMatrixXd& s, double tau) {
  RowMatrixXd out(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double row_max = -INFINITY;
    for (Eigen::Index j = 0; j < s.cols(); ++j) row_max = std::max(row_max, s(i, j));
    double sum = 0.0;
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      out(i, j) = std::exp((s(i, j) - row_max) / tau);
      sum += out(i, j);
    }
    for (Eigen::Index j = 0; j < s.cols(); ++j) out(i, j) /= sum;
  }
  return out;
}

RowMatrixXd noisy_and_odds(const RowMatrixXd& a, const RowMatrixXd& b, double prior) {
  auto odds = [](double p) { return p / (1.0 - p); };
  RowMatrixXd out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double pa = std::clamp(a(i, j), kFusionClamp, 1.0 - kFusionClamp);
      const double pb = std::clamp(b(i, j), kFusionClamp, 1.0 - kFusionClamp);
      const double o = odds(pa) * odds(pb) / odds(prior);
      out(i, j) = o / (1.0 + o);
    }
  }
  return out;
}

RowMatrixXd noisy_or(const RowMatrixXd& a, const RowMatrixXd& b) {
  RowMatrixXd out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out(i, j) = 1.0 - (1.0 - a(i, j)) * (1.0 - b(i, j));
  return out;
}

CorrespondenceSet mutual_nn(const RowMatrixXd& scores) {
  CorrespondenceSet out;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      bool row_best = true, col_best = true;
      for (Eigen::Index jj = 0; jj < scores.cols() && row_best; ++jj)
        if (scores(i, jj) > scores(i, j) || (scores(i, jj) == scores(i, j) && jj < j)) row_best = false;
      for (Eigen::Index ii = 0; ii < scores.rows() && col_best; ++ii)
        if (scores(ii, j) > scores(i, j) || (scores(ii, j) == scores(i, j) && ii < i)) col_best = false;
      if (row_best && col_best) out.push_back({i, j, scores(i, j)});
    }
  }
  return out;
}

NearestHit nearest(const PointCloud& cloud, const Vec3& q) {
  NearestHit best;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double d2 = (cloud[i] - q).squaredNorm();
    if (best.index < 0 || d2 < best.squared_distance) best = {static_cast<std::int64_t>(i), d2};
  }
  return best;
}

Eigen::MatrixXf compatibility(std::span<const Vec3> src, std::span<const Vec3> tgt, double d_comp) {
  const auto n = static_cast<Eigen::Index>(src.size());
  Eigen::MatrixXf c = Eigen::MatrixXf::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      if (a != b && std::abs((src[a] - src[b]).norm() - (tgt[a] - tgt[b]).norm()) <= d_comp)
        c(a, b) = 1.0f;
  return c;
}

Eigen::MatrixXf second_order(const Eigen::MatrixXf& compat) {
  const Eigen::Index n = compat.rows();
  Eigen::MatrixXf out = Eigen::MatrixXf::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      if (compat(a, b) == 0.0f) continue;
      int common = 0;
      for (Eigen::Index k = 0; k < n; ++k)
        if (compat(a, k) != 0.0f && compat(k, b) != 0.0f) ++common;
      out(a, b) = static_cast<float>(common);
    }
  }
  return out;
}

}  // namespace genreg::reference
