#pragma once

// Synthetic registration benchmark: scenes with known ground truth, simulated
// image/geometric descriptors, and the per-method evaluation loop.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "genreg/features.hpp"
#include "genreg/fusion.hpp"
#include "genreg/geometry.hpp"
#include "genreg/pipeline.hpp"
#include "genreg/pose.hpp"

namespace genreg::bench {

struct SceneSpec {
  int n_points = 500;
  double extent = 3.0;         // cube side (m)
  double overlap = 0.6;        // fraction of source points with a true correspondent
  double rotation_deg = 30.0;
  double translation_m = 0.5;
  double point_noise = 0.005;  // Gaussian σ on corresponding target points (m)
  std::uint64_t seed = 1;

  void validate() const;
};

struct Scene {
  PointCloud src;
  PointCloud tgt;
  RigidTransform gt;
  std::vector<std::pair<std::int64_t, std::int64_t>> gt_pairs;  // (src, tgt)
};

/// Descriptor simulator for one branch. Each point's clean descriptor is
///   signal·latent + sqrt(1 − signal²)·nuisance
/// where the latent is shared by true correspondents and the nuisance is
/// drawn per point and side. Every view then adds N(0, noise²/d) per
/// component and renormalizes. Outliers replace the clean descriptor with an
/// independent random direction; uncovered points (image branch) get zeros.
struct BranchSimSpec {
  int dim = 32;
  double signal = 1.0;
  double noise = 0.5;
  double outlier_fraction = 0.0;
  double coverage = 1.0;
  int k = 1;  // views per domain; V = k² (1 for the geometric branch)
  std::uint64_t seed = 1;

  void validate() const;
};

struct BranchFeatures {
  ViewFeatureStack src_img, tgt_img;
  FeatureField src_geo, tgt_geo;
  std::vector<std::uint8_t> src_img_covered, tgt_img_covered;
};

Scene gen_scene(const SceneSpec& spec);

BranchFeatures simulate_branches(const Scene& scene, const BranchSimSpec& img,
                                 const BranchSimSpec& geo);

struct SimulatedBranch {
  std::vector<FeatureField> src_views, tgt_views;  // k² views each
  std::vector<std::uint8_t> src_covered, tgt_covered;
};

/// One branch from its own counter stream (seed = spec.seed, stream id given).
SimulatedBranch simulate_branch(const Scene& scene, const BranchSimSpec& spec, std::uint64_t stream);

inline constexpr std::uint64_t kSceneStream = 0x5CE7E;
inline constexpr std::uint64_t kImgStream = 0x1316;
inline constexpr std::uint64_t kGeoStream = 0x6E0;

struct PRPoint {
  double threshold = 0.0;    // matches with confidence ≥ threshold are emitted
  double precision = 1.0;    // interpolated: best precision at this recall or beyond
  double recall = 0.0;
  double raw_precision = 1.0;
  std::int64_t n_emitted = 0;
  std::int64_t n_correct = 0;
};

struct PRCurve {
  double radius = 0.05;
  std::vector<PRPoint> points;  // first point is the empty-set sentinel (threshold = +inf)
};

/// Sweeps the confidence threshold over the mutual-NN matches of `scores`.
/// A match (i, j) is correct iff ‖T_gt(p_i) − q_j‖ ≤ radius. Recall uses
/// |gt_pairs| as denominator (capped at 1).
PRCurve pr_curve(const RowMatrixXd& scores, std::size_t n_gt_pairs, const PointCloud& src,
                 const PointCloud& tgt, const RigidTransform& gt, double radius);

/// Interpolated precision at the first curve point reaching `recall`, if any.
std::optional<double> precision_at_recall(const PRCurve& curve, double recall);

/// Whether ‖T(p) − q‖ ≤ radius.
bool match_is_correct(const Vec3& p, const Vec3& q, const RigidTransform& gt, double radius);

struct BenchConfig {
  std::vector<FusionMode> methods = {FusionMode::ImgOnly, FusionMode::GeoOnly, FusionMode::Concat,
                                     FusionMode::NoisyOr, FusionMode::NoisyAnd};
  int n_seeds = 20;
  std::uint64_t first_seed = 1;
  SceneSpec scene;
  BranchSimSpec img{.dim = 24, .signal = 0.9, .noise = 1.25, .outlier_fraction = 0.4, .coverage = 1.0, .k = 4};
  BranchSimSpec geo{.dim = 32, .signal = 0.9, .noise = 1.2, .outlier_fraction = 0.4, .coverage = 1.0, .k = 1};
  PipelineConfig pipeline;
  double radius = 0.05;
  std::vector<double> rre_thresholds = {5.0, 10.0, 45.0};
  std::vector<double> rte_thresholds = {0.05, 0.10, 0.25};
  double recall_step = 0.01;

  void validate() const;
};

struct TrialRow {
  FusionMode method = FusionMode::NoisyAnd;
  std::uint64_t seed = 0;
  bool success = false;  // estimator returned a model (identity is scored otherwise)
  double rre_deg = 0.0;
  double rte_m = 0.0;
  std::int64_t n_matches = 0;
  std::int64_t n_inliers = 0;
  std::int64_t n_correct = 0;
  double precision = 1.0;  // of all mutual-NN matches at the correctness radius
};

struct CurveRow {
  FusionMode method;
  std::uint64_t seed;
  PRCurve curve;
};

struct MethodSummary {
  FusionMode method;
  std::int64_t trials = 0;
  std::int64_t failures = 0;
  double mean_rre = 0, median_rre = 0, mean_rte = 0, median_rte = 0;
  double mean_precision = 0;
  std::vector<double> rre_accuracy;  // fraction with rre ≤ threshold, per rre_thresholds
  std::vector<double> rte_accuracy;
  std::vector<double> recall_grid;
  std::vector<std::optional<double>> mean_precision_at_recall;  // over seeds reaching the level
};

/// Noisy-AND vs Noisy-OR precision on the shared recall grid.
struct AndOrComparison {
  std::vector<double> recall;               // grid points both curves reach in ≥ half the seeds
  std::vector<std::int64_t> seeds_compared;  // seeds where both reach the level
  std::vector<double> and_precision;        // mean over those seeds
  std::vector<double> or_precision;
  std::vector<std::uint64_t> violating_seeds;  // seeds where AND < OR at some shared level
  bool holds_on_mean = true;  // false when no level is shared
};

struct Report {
  BenchConfig config;
  std::vector<TrialRow> trials;  // method-major, then seed
  std::vector<CurveRow> curves;
  std::vector<MethodSummary> summaries;
  std::optional<AndOrComparison> and_vs_or;
};

/// Runs every method on every seed. Trials run in parallel; the result is a
/// pure function of the config.
Report run_benchmark(const BenchConfig& config);

MethodSummary summarize(FusionMode method, const std::vector<TrialRow>& rows,
                        const std::vector<const PRCurve*>& curves, const BenchConfig& config);

double mean(const std::vector<double>& v);
double median(std::vector<double> v);

}  // namespace genreg::bench
