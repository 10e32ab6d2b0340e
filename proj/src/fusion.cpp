#include "genreg/fusion.hpp"

#include <algorithm>
#include <string>

namespace genreg {

std::string_view to_string(FusionMode m) {
  switch (m) {
    case FusionMode::ImgOnly: return "img-only";
    case FusionMode::GeoOnly: return "geo-only";
    case FusionMode::Concat: return "concat";
    case FusionMode::NoisyOr: return "noisy-or";
    case FusionMode::NoisyAnd: return "noisy-and";
  }
  return "unknown";
}

std::optional<FusionMode> parse_fusion_mode(std::string_view s) {
  if (s == "img-only") return FusionMode::ImgOnly;
  if (s == "geo-only") return FusionMode::GeoOnly;
  if (s == "concat") return FusionMode::Concat;
  if (s == "noisy-or" || s == "or") return FusionMode::NoisyOr;
  if (s == "noisy-and" || s == "and") return FusionMode::NoisyAnd;
  return std::nullopt;
}

MatchPrior MatchPrior::uniform(Eigen::Index n_src, Eigen::Index n_tgt) {
  if (n_src <= 0 || n_tgt <= 0) throw std::invalid_argument("uniform prior needs non-empty clouds");
  return MatchPrior(1.0 / (static_cast<double>(n_src) * static_cast<double>(n_tgt)));
}

MatchPrior MatchPrior::scalar(double pi) { return MatchPrior(pi); }

MatchPrior MatchPrior::matrix(RowMatrixXd pi) { return MatchPrior(std::move(pi)); }

void MatchPrior::validate(Eigen::Index rows, Eigen::Index cols) const {
  auto in_range = [](double p) { return p > 0.0 && p < 1.0; };
  if (const auto* s = std::get_if<double>(&value_)) {
    if (!in_range(*s)) throw std::invalid_argument("prior must lie in (0, 1)");
    return;
  }
  const auto& m = std::get<RowMatrixXd>(value_);
  if (m.rows() != rows || m.cols() != cols)
    throw std::invalid_argument("prior matrix shape does not match posteriors");
  if (!m.unaryExpr(in_range).all()) throw std::invalid_argument("prior must lie in (0, 1)");
}

double noisy_and(double p_img, double p_geo, double prior) {
  const double a = std::clamp(p_img, kFusionClamp, 1.0 - kFusionClamp);
  const double b = std::clamp(p_geo, kFusionClamp, 1.0 - kFusionClamp);
  const double joint = a * b * (1.0 - prior);
  return joint / (joint + (1.0 - a) * (1.0 - b) * prior);
}

double noisy_or(double p_img, double p_geo) { return 1.0 - (1.0 - p_img) * (1.0 - p_geo); }

namespace {

void check_shapes(const PosteriorMatrix& a, const PosteriorMatrix& b) {
  if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols())
    throw std::invalid_argument("posterior shape mismatch: " + std::to_string(a.values.rows()) +
                                "x" + std::to_string(a.values.cols()) + " vs " +
                                std::to_string(b.values.rows()) + "x" +
                                std::to_string(b.values.cols()));
}

}  // namespace

FusedPosterior fuse_noisy_and(const PosteriorMatrix& p_img, const PosteriorMatrix& p_geo,
                              const MatchPrior& prior) {
  check_shapes(p_img, p_geo);
  const Eigen::Index n = p_img.values.rows();
  const Eigen::Index m = p_img.values.cols();
  prior.validate(n, m);
  FusedPosterior out{RowMatrixXd(n, m), FusionMode::NoisyAnd};
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j)
      out.values(i, j) = noisy_and(p_img.values(i, j), p_geo.values(i, j), prior.at(i, j));
  }
  return out;
}

FusedPosterior fuse_noisy_or(const PosteriorMatrix& p_img, const PosteriorMatrix& p_geo) {
  check_shapes(p_img, p_geo);
  const Eigen::Index n = p_img.values.rows();
  const Eigen::Index m = p_img.values.cols();
  FusedPosterior out{RowMatrixXd(n, m), FusionMode::NoisyOr};
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j)
      out.values(i, j) = noisy_or(p_img.values(i, j), p_geo.values(i, j));
  }
  return out;
}

FeatureField concat_fields(const FeatureField& a, const FeatureField& b) {
  if (a.rows() != b.rows())
    throw std::invalid_argument("concat: point count mismatch " + std::to_string(a.rows()) +
                                " vs " + std::to_string(b.rows()));
  FeatureField out(a.rows(), a.dim() + b.dim());
  out.descriptors.leftCols(a.dim()) = a.descriptors;
  out.descriptors.rightCols(b.dim()) = b.descriptors;
  return out;
}

FusedPosterior fuse_concat_baseline(const FeatureField& img_src, const FeatureField& img_tgt,
                                    const FeatureField& geo_src, const FeatureField& geo_tgt,
                                    double tau) {
  const FeatureField src =
      l2_normalize_rows(concat_fields(l2_normalize_rows(img_src), l2_normalize_rows(geo_src)));
  const FeatureField tgt =
      l2_normalize_rows(concat_fields(l2_normalize_rows(img_tgt), l2_normalize_rows(geo_tgt)));
  PosteriorMatrix p = posterior_softmax(similarity_geo(src, tgt), tau);
  return {std::move(p.values), FusionMode::Concat};
}

}  // namespace genreg
