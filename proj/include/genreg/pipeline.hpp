#pragma once

#include <cstdint>
#include <optional>

#include "genreg/features.hpp"
#include "genreg/fusion.hpp"
#include "genreg/pose.hpp"

namespace genreg {

enum class PriorMode { Uniform, Scalar };

struct PipelineConfig {
  double tau_img = 0.1;
  double tau_geo = 0.1;
  PriorMode prior = PriorMode::Uniform;
  double prior_value = 0.5;  // used when prior == Scalar
  FusionMode fusion = FusionMode::NoisyAnd;
  double voxel_size = 0.025;
  RobustConfig robust;  // d_comp = d_inlier = 2 × voxel_size by default

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Features for one registration problem. Image stacks are optional for
/// geo-only; geometric fields are optional for img-only.
struct BranchInputs {
  const FeatureField* src_geo = nullptr;
  const FeatureField* tgt_geo = nullptr;
  const ViewFeatureStack* src_img = nullptr;
  const ViewFeatureStack* tgt_img = nullptr;
  /// Source-side image coverage; when empty it is derived from the stack
  /// (a point with an all-zero descriptor in every view is uncovered).
  std::vector<std::uint8_t> src_img_covered;
};

/// Per-branch posteriors, computed once and shared across fusion modes.
struct BranchPosteriors {
  std::optional<PosteriorMatrix> img;
  std::optional<PosteriorMatrix> geo;
};

BranchPosteriors branch_posteriors(const BranchInputs& in, const PipelineConfig& cfg);

/// Fused score matrix for cfg.fusion. `pre` may carry posteriors from branch_posteriors.
FusedPosterior fused_scores(const BranchInputs& in, const PipelineConfig& cfg,
                            const BranchPosteriors* pre = nullptr);

struct PipelineResult {
  FusedPosterior fused;
  CorrespondenceSet matches;
  RegistrationResult registration;
};

/// Posteriors → fusion → mutual NN → robust estimation.
PipelineResult register_clouds(const PointCloud& src, const PointCloud& tgt, const BranchInputs& in,
                               const PipelineConfig& cfg, const BranchPosteriors* pre = nullptr);

}  // namespace genreg
