#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "genreg/correspondence.hpp"

namespace genreg {

enum class FusionMode { ImgOnly, GeoOnly, Concat, NoisyOr, NoisyAnd };

std::string_view to_string(FusionMode m);
/// Accepts the canonical names plus the short forms "and" / "or".
std::optional<FusionMode> parse_fusion_mode(std::string_view s);

/// Prior match probability π_ij, either one scalar or a full matrix.
class MatchPrior {
 public:
  /// π = 1 / (N_src · N_tgt).
  static MatchPrior uniform(Eigen::Index n_src, Eigen::Index n_tgt);
  static MatchPrior scalar(double pi);
  static MatchPrior matrix(RowMatrixXd pi);

  double at(Eigen::Index i, Eigen::Index j) const {
    if (const auto* s = std::get_if<double>(&value_)) return *s;
    return std::get<RowMatrixXd>(value_)(i, j);
  }
  bool is_scalar() const { return std::holds_alternative<double>(value_); }

  /// Throws std::invalid_argument if any π ∉ (0, 1) or the matrix shape differs.
  void validate(Eigen::Index rows, Eigen::Index cols) const;

 private:
  explicit MatchPrior(std::variant<double, RowMatrixXd> v) : value_(std::move(v)) {}
  std::variant<double, RowMatrixXd> value_;
};

/// Per-pair match scores after fusion. Not row-normalized.
struct FusedPosterior {
  RowMatrixXd values;
  FusionMode mode = FusionMode::NoisyAnd;
};

inline constexpr double kFusionClamp = 1e-12;

/// Joint posterior under conditional independence of the two branches:
///   p = a·b·(1−π) / (a·b·(1−π) + (1−a)(1−b)·π),
/// i.e. odds(p) = odds(a)·odds(b)/odds(π). Inputs clamped to [ε, 1−ε].
FusedPosterior fuse_noisy_and(const PosteriorMatrix& p_img, const PosteriorMatrix& p_geo,
                              const MatchPrior& prior);

/// p = 1 − (1−a)(1−b).
FusedPosterior fuse_noisy_or(const PosteriorMatrix& p_img, const PosteriorMatrix& p_geo);

/// Scalar kernels, exposed for the oracles.
double noisy_and(double p_img, double p_geo, double prior);
double noisy_or(double p_img, double p_geo);

/// Fuse-then-match baseline: per-branch normalize, concatenate, re-normalize,
/// then cosine similarity and softmax at temperature `tau`.
FusedPosterior fuse_concat_baseline(const FeatureField& img_src, const FeatureField& img_tgt,
                                    const FeatureField& geo_src, const FeatureField& geo_tgt,
                                    double tau);

/// Row-wise concatenation [a | b] of two fields with equal point counts.
FeatureField concat_fields(const FeatureField& a, const FeatureField& b);

}  // namespace genreg
