#include "genreg/pipeline.hpp"

#include <stdexcept>
#include <string>

namespace genreg {

void PipelineConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(tau_img, "tau_img");
  positive(tau_geo, "tau_geo");
  positive(voxel_size, "voxel_size");
  positive(robust.d_comp, "d_comp");
  positive(robust.d_inlier, "d_inlier");
  if (prior == PriorMode::Scalar && !(prior_value > 0.0 && prior_value < 1.0))
    throw std::invalid_argument("prior_value must lie in (0, 1)");
  if (robust.n_hypotheses < 1) throw std::invalid_argument("n_hypotheses must be at least 1");
  if (robust.n_seeds < 1) throw std::invalid_argument("n_seeds must be at least 1");
  if (robust.k_neighbors < 2) throw std::invalid_argument("k_neighbors must be at least 2");
  if (robust.min_inliers < 3) throw std::invalid_argument("min_inliers must be at least 3");
}

namespace {

bool needs_img(FusionMode m) { return m != FusionMode::GeoOnly; }
bool needs_geo(FusionMode m) { return m != FusionMode::ImgOnly; }

}  // namespace

BranchPosteriors branch_posteriors(const BranchInputs& in, const PipelineConfig& cfg) {
  BranchPosteriors out;
  if (in.src_img && in.tgt_img) {
    in.src_img->validate();
    in.tgt_img->validate();
    const auto src = l2_normalize_rows(*in.src_img);
    const auto tgt = l2_normalize_rows(*in.tgt_img);
    out.img = posterior_softmax(similarity_img_maxpool(src, tgt), cfg.tau_img);
    const auto covered = in.src_img_covered.empty() ? coverage_from_stack(*in.src_img) : in.src_img_covered;
    replace_uncovered_rows(*out.img, covered);
  }
  if (in.src_geo && in.tgt_geo) {
    out.geo = posterior_softmax(
        similarity_geo(l2_normalize_rows(*in.src_geo), l2_normalize_rows(*in.tgt_geo)), cfg.tau_geo);
  }
  return out;
}

FusedPosterior fused_scores(const BranchInputs& in, const PipelineConfig& cfg,
                            const BranchPosteriors* pre) {
  const FusionMode mode = cfg.fusion;
  if (needs_img(mode) && !(in.src_img && in.tgt_img))
    throw std::invalid_argument(std::string(to_string(mode)) + " requires image features for both clouds");
  if (needs_geo(mode) && !(in.src_geo && in.tgt_geo))
    throw std::invalid_argument(std::string(to_string(mode)) +
                                " requires geometric features for both clouds");

  if (mode == FusionMode::Concat) {
    return fuse_concat_baseline(best_view_descriptors(*in.src_img), best_view_descriptors(*in.tgt_img),
                                *in.src_geo, *in.tgt_geo, cfg.tau_geo);
  }

  BranchPosteriors local;
  if (!pre) {
    local = branch_posteriors(in, cfg);
    pre = &local;
  }
  switch (mode) {
    case FusionMode::ImgOnly: return {pre->img->values, mode};
    case FusionMode::GeoOnly: return {pre->geo->values, mode};
    case FusionMode::NoisyOr: return fuse_noisy_or(*pre->img, *pre->geo);
    case FusionMode::NoisyAnd: {
      const auto rows = pre->img->values.rows();
      const auto cols = pre->img->values.cols();
      const MatchPrior prior = cfg.prior == PriorMode::Uniform ? MatchPrior::uniform(rows, cols)
                                                               : MatchPrior::scalar(cfg.prior_value);
      return fuse_noisy_and(*pre->img, *pre->geo, prior);
    }
    case FusionMode::Concat: break;
  }
  throw std::logic_error("unhandled fusion mode");
}

PipelineResult register_clouds(const PointCloud& src, const PointCloud& tgt, const BranchInputs& in,
                               const PipelineConfig& cfg, const BranchPosteriors* pre) {
  cfg.validate();
  auto check_rows = [](Eigen::Index rows, std::size_t points, const char* what) {
    if (static_cast<std::size_t>(rows) != points)
      throw std::invalid_argument(std::string(what) + " has " + std::to_string(rows) +
                                  " rows but the cloud has " + std::to_string(points) + " points");
  };
  if (in.src_geo) check_rows(in.src_geo->rows(), src.size(), "source geometric field");
  if (in.tgt_geo) check_rows(in.tgt_geo->rows(), tgt.size(), "target geometric field");
  if (in.src_img) check_rows(in.src_img->rows(), src.size(), "source image stack");
  if (in.tgt_img) check_rows(in.tgt_img->rows(), tgt.size(), "target image stack");

  PipelineResult out;
  out.fused = fused_scores(in, cfg, pre);
  out.matches = mutual_nn_match(out.fused.values);
  out.registration = robust_register(out.matches, src, tgt, cfg.robust);
  return out;
}

}  // namespace genreg
