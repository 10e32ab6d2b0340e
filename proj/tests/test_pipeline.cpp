#include <gtest/gtest.h>

#include <random>

#include "genreg/bench.hpp"
#include "genreg/pipeline.hpp"
#include "test_util.hpp"

using namespace genreg;

namespace {

struct Problem {
  bench::Scene scene;
  bench::BranchFeatures features;
};

Problem noiseless_problem(std::uint64_t seed) {
  bench::BenchConfig cfg;
  cfg.scene.seed = cfg.img.seed = cfg.geo.seed = seed;
  cfg.scene.point_noise = 0;
  cfg.img.noise = cfg.geo.noise = 0;
  cfg.img.outlier_fraction = cfg.geo.outlier_fraction = 0;
  Problem p{bench::gen_scene(cfg.scene), {}};
  p.features = bench::simulate_branches(p.scene, cfg.img, cfg.geo);
  return p;
}

BranchInputs inputs(const bench::BranchFeatures& f, bool img = true, bool geo = true) {
  BranchInputs in;
  if (geo) in.src_geo = &f.src_geo, in.tgt_geo = &f.tgt_geo;
  if (img) in.src_img = &f.src_img, in.tgt_img = &f.tgt_img;
  return in;
}

}  // namespace

TEST(Pipeline, NoiselessRecoversTransform) {
  const Problem p = noiseless_problem(2);
  for (FusionMode m : {FusionMode::NoisyAnd, FusionMode::NoisyOr, FusionMode::Concat, FusionMode::ImgOnly,
                       FusionMode::GeoOnly}) {
    PipelineConfig cfg;
    cfg.fusion = m;
    const PipelineResult r = register_clouds(p.scene.src, p.scene.tgt, inputs(p.features), cfg);
    ASSERT_TRUE(r.registration.success) << to_string(m) << ": " << r.registration.diagnostic;
    EXPECT_LE(rre(r.registration.transform.rotation, p.scene.gt.rotation), 1e-6) << to_string(m);
    EXPECT_LE(rte(r.registration.transform.translation, p.scene.gt.translation), 1e-6) << to_string(m);
    EXPECT_EQ(r.fused.mode, m);
  }
}

TEST(Pipeline, GeoOnlyNeedsNoImages) {
  const Problem p = noiseless_problem(3);
  PipelineConfig cfg;
  cfg.fusion = FusionMode::GeoOnly;
  const PipelineResult r = register_clouds(p.scene.src, p.scene.tgt, inputs(p.features, false, true), cfg);
  EXPECT_TRUE(r.registration.success);
}

TEST(Pipeline, MissingBranchThrows) {
  const Problem p = noiseless_problem(4);
  PipelineConfig cfg;
  for (FusionMode m : {FusionMode::NoisyAnd, FusionMode::NoisyOr, FusionMode::Concat, FusionMode::ImgOnly}) {
    cfg.fusion = m;
    EXPECT_THROW(register_clouds(p.scene.src, p.scene.tgt, inputs(p.features, false, true), cfg),
                 std::invalid_argument)
        << to_string(m);
  }
  cfg.fusion = FusionMode::GeoOnly;
  EXPECT_THROW(register_clouds(p.scene.src, p.scene.tgt, inputs(p.features, true, false), cfg),
               std::invalid_argument);
}

TEST(Pipeline, RowMismatchThrows) {
  const Problem p = noiseless_problem(5);
  PointCloud src = p.scene.src;
  src.points.pop_back();
  EXPECT_THROW(register_clouds(src, p.scene.tgt, inputs(p.features), PipelineConfig{}), std::invalid_argument);
}

TEST(Pipeline, InvalidConfigThrows) {
  const Problem p = noiseless_problem(6);
  PipelineConfig cfg;
  cfg.tau_img = -1;
  EXPECT_THROW(register_clouds(p.scene.src, p.scene.tgt, inputs(p.features), cfg), std::invalid_argument);
}

TEST(Pipeline, UncoveredRowsAreUniform) {
  std::mt19937_64 g(7);
  ViewFeatureStack src = genreg::testing::random_stack(g, 10, 8, 2);
  const ViewFeatureStack tgt = genreg::testing::random_stack(g, 12, 8, 2);
  for (auto& v : src.views) v.descriptors.row(3).setZero();
  BranchInputs in;
  in.src_img = &src;
  in.tgt_img = &tgt;
  const BranchPosteriors b = branch_posteriors(in, PipelineConfig{});
  ASSERT_TRUE(b.img.has_value());
  EXPECT_FALSE(b.geo.has_value());
  for (Eigen::Index j = 0; j < 12; ++j) EXPECT_DOUBLE_EQ(b.img->values(3, j), 1.0 / 12);
  EXPECT_GT(b.img->values.row(2).maxCoeff(), 1.0 / 12);

  // An explicit coverage mask overrides the derived one.
  in.src_img_covered.assign(10, 1);
  in.src_img_covered[5] = 0;
  const BranchPosteriors c = branch_posteriors(in, PipelineConfig{});
  for (Eigen::Index j = 0; j < 12; ++j) EXPECT_DOUBLE_EQ(c.img->values(5, j), 1.0 / 12);
}

TEST(Pipeline, PrecomputedPosteriorsGiveSameScores) {
  const Problem p = noiseless_problem(8);
  PipelineConfig cfg;
  const BranchInputs in = inputs(p.features);
  const BranchPosteriors pre = branch_posteriors(in, cfg);
  for (FusionMode m : {FusionMode::NoisyAnd, FusionMode::NoisyOr, FusionMode::ImgOnly, FusionMode::GeoOnly}) {
    cfg.fusion = m;
    EXPECT_EQ(fused_scores(in, cfg, &pre).values, fused_scores(in, cfg).values) << to_string(m);
  }
}

TEST(Pipeline, ScalarPriorChangesAndScores) {
  const Problem p = noiseless_problem(9);
  PipelineConfig cfg;
  const BranchInputs in = inputs(p.features);
  const RowMatrixXd uniform = fused_scores(in, cfg).values;
  cfg.prior = PriorMode::Scalar;
  cfg.prior_value = 0.5;
  const RowMatrixXd half = fused_scores(in, cfg).values;
  EXPECT_GT((uniform - half).cwiseAbs().maxCoeff(), 0.0);
  // With π = 1/2 the fusion reduces to ab / (ab + (1−a)(1−b)).
  const BranchPosteriors b = branch_posteriors(in, cfg);
  const double a = b.img->values(0, 0), g = b.geo->values(0, 0);
  EXPECT_NEAR(half(0, 0), a * g / (a * g + (1 - a) * (1 - g)), 1e-12);
}
