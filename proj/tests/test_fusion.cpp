#include <gtest/gtest.h>

#include <random>

#include "genreg/correspondence.hpp"
#include "genreg/fusion.hpp"
#include "genreg/reference.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace genreg;
using genreg::testing::DiscreteTwoSignalModel;
using genreg::testing::random_field;

namespace {

PosteriorMatrix constant(Eigen::Index r, Eigen::Index c, double v) {
  return {RowMatrixXd::Constant(r, c, v), 0.1};
}

PosteriorMatrix random_posterior(std::mt19937_64& g, Eigen::Index r, Eigen::Index c) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PosteriorMatrix p{RowMatrixXd(r, c), 0.1};
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) p.values(i, j) = u(g);
  return p;
}

}  // namespace

TEST(NoisyAnd, WorkedExample) { EXPECT_NEAR(noisy_and(0.9, 0.8, 0.5), 36.0 / 37.0, 1e-15); }

TEST(NoisyAnd, PriorEvidenceIsNeutral) {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int k = 0; k < 1000; ++k) {
    const double p = u(g), pi = u(g);
    EXPECT_NEAR(noisy_and(p, pi, pi), p, 1e-12);
    EXPECT_NEAR(noisy_and(pi, p, pi), p, 1e-12);
    EXPECT_NEAR(noisy_and(pi, pi, pi), pi, 1e-12);
  }
}

TEST(NoisyAnd, MonotoneSymmetricAndBounded) {
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = u(g), b = u(g), pi = 0.001 + 0.998 * u(g), da = 0.1 * u(g);
    const double f = noisy_and(a, b, pi);
    EXPECT_GT(f, 0.0);
    EXPECT_LT(f, 1.0);
    EXPECT_EQ(f, noisy_and(b, a, pi));
    EXPECT_GE(noisy_and(std::min(1.0, a + da), b, pi), f);
  }
}

TEST(NoisyAnd, AgreementReinforcesAboveHalf) {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(0.5001, 0.999);
  for (int k = 0; k < 1000; ++k) {
    const double a = u(g), b = u(g);
    EXPECT_GT(noisy_and(a, b, 0.5), std::max(a, b));
  }
}

TEST(NoisyAnd, MatchesExactBayesOnDiscreteModel) {
  std::mt19937_64 g(4);
  for (int k = 0; k < 200; ++k) {
    const DiscreteTwoSignalModel m = DiscreteTwoSignalModel::random(g);
    for (int si = 0; si < 4; ++si)
      for (int sg = 0; sg < 4; ++sg)
        EXPECT_NEAR(noisy_and(m.branch_posterior(m.img, si), m.branch_posterior(m.geo, sg), m.prior),
                    m.joint_posterior(si, sg), 1e-12);
  }
}

TEST(NoisyAnd, ClampKeepsSaturatedInputsFinite) {
  EXPECT_TRUE(std::isfinite(noisy_and(1.0, 1.0, 1e-6)));
  EXPECT_TRUE(std::isfinite(noisy_and(0.0, 1.0, 0.5)));
  EXPECT_GT(noisy_and(0.0, 0.0, 0.5), 0.0);
}

TEST(NoisyAnd, MatrixMatchesOddsRoute) {
  std::mt19937_64 g(5);
  const PosteriorMatrix a = random_posterior(g, 30, 40), b = random_posterior(g, 30, 40);
  const double pi = 1.0 / (30 * 40);
  const FusedPosterior f = fuse_noisy_and(a, b, MatchPrior::uniform(30, 40));
  const RowMatrixXd o = reference::noisy_and_odds(a.values, b.values, pi);
  EXPECT_LE((f.values - o).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(f.mode, FusionMode::NoisyAnd);
}

TEST(NoisyAnd, MatrixPrior) {
  std::mt19937_64 g(6);
  const PosteriorMatrix a = random_posterior(g, 3, 4), b = random_posterior(g, 3, 4);
  RowMatrixXd pi = RowMatrixXd::Constant(3, 4, 0.2);
  pi(1, 2) = 0.7;
  const FusedPosterior f = fuse_noisy_and(a, b, MatchPrior::matrix(pi));
  EXPECT_DOUBLE_EQ(f.values(1, 2), noisy_and(a.values(1, 2), b.values(1, 2), 0.7));
  EXPECT_DOUBLE_EQ(f.values(0, 0), noisy_and(a.values(0, 0), b.values(0, 0), 0.2));
}

TEST(NoisyAnd, Errors) {
  EXPECT_THROW(fuse_noisy_and(constant(2, 2, .5), constant(2, 3, .5), MatchPrior::scalar(.5)),
               std::invalid_argument);
  EXPECT_THROW(fuse_noisy_and(constant(2, 2, .5), constant(2, 2, .5), MatchPrior::scalar(1.0)),
               std::invalid_argument);
  EXPECT_THROW(fuse_noisy_and(constant(2, 2, .5), constant(2, 2, .5),
                              MatchPrior::matrix(RowMatrixXd::Constant(3, 2, .5))),
               std::invalid_argument);
}

TEST(NoisyOr, Examples) {
  EXPECT_EQ(noisy_or(0.0, 0.0), 0.0);
  EXPECT_NEAR(noisy_or(0.9, 0.8), 0.98, 1e-15);
}

TEST(NoisyOr, NeverBelowEitherInputAndEquivariant) {
  std::mt19937_64 g(7);
  const PosteriorMatrix a = random_posterior(g, 10, 12), b = random_posterior(g, 10, 12);
  const FusedPosterior f = fuse_noisy_or(a, b);
  EXPECT_TRUE((f.values.array() >= a.values.array().max(b.values.array())).all());
  EXPECT_EQ(f.values, fuse_noisy_or(b, a).values);
  EXPECT_EQ(f.values, reference::noisy_or(a.values, b.values));
  PosteriorMatrix at{a.values.transpose(), 0.1}, bt{b.values.transpose(), 0.1};
  EXPECT_EQ(RowMatrixXd(f.values.transpose()), fuse_noisy_or(at, bt).values);
}

TEST(NoisyOr, MatchesBernoulliSimulation) {
  std::mt19937_64 g(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 5; ++k) {
    const double a = u(g), b = u(g);
    const double p = noisy_or(a, b);
    const double n = 1e6;
    const double mc = genreg::testing::monte_carlo_or(a, b, static_cast<std::uint64_t>(n), 100 + k);
    EXPECT_LE(std::abs(mc - p), 3 * std::sqrt(p * (1 - p) / n) + 1e-12);
  }
}

TEST(Concat, IdenticalFieldsGiveDiagonalArgmax) {
  std::mt19937_64 g(9);
  const FeatureField img = random_field(g, 30, 8), geo = random_field(g, 30, 16);
  const FusedPosterior f = fuse_concat_baseline(img, img, geo, geo, 0.1);
  for (Eigen::Index i = 0; i < 30; ++i) {
    Eigen::Index j;
    f.values.row(i).maxCoeff(&j);
    EXPECT_EQ(j, i);
  }
}

TEST(Concat, ZeroGeometryReducesToImageOnly) {
  std::mt19937_64 g(10);
  const FeatureField a = random_field(g, 20, 8), b = random_field(g, 25, 8);
  const FeatureField za(20, 5), zb(25, 5);
  const FusedPosterior f = fuse_concat_baseline(a, b, za, zb, 0.1);
  const PosteriorMatrix img = posterior_softmax(similarity_geo(a, b), 0.1);
  EXPECT_LE((f.values - img.values).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Concat, EqualsComposedPrimitives) {
  std::mt19937_64 g(11);
  const FeatureField ia = random_field(g, 15, 6, false), ib = random_field(g, 18, 6, false);
  const FeatureField ga = random_field(g, 15, 9, false), gb = random_field(g, 18, 9, false);
  auto stack = [](const FeatureField& i, const FeatureField& geo) {
    const FeatureField ni = l2_normalize_rows(i), ng = l2_normalize_rows(geo);
    FeatureField out(i.rows(), i.dim() + geo.dim());
    out.descriptors << ni.descriptors, ng.descriptors;
    return l2_normalize_rows(out);
  };
  const RowMatrixXd oracle = reference::softmax_rows(reference::similarity(stack(ia, ga), stack(ib, gb)), 0.1);
  const FusedPosterior f = fuse_concat_baseline(ia, ib, ga, gb, 0.1);
  EXPECT_LE((f.values - oracle).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(f.mode, FusionMode::Concat);
}

TEST(Concat, PointCountMismatchThrows) {
  std::mt19937_64 g(12);
  EXPECT_THROW(fuse_concat_baseline(random_field(g, 3, 2), random_field(g, 3, 2), random_field(g, 4, 2),
                                    random_field(g, 3, 2), 0.1),
               std::invalid_argument);
}

TEST(FusionModeNames, RoundTrip) {
  for (FusionMode m : {FusionMode::ImgOnly, FusionMode::GeoOnly, FusionMode::Concat, FusionMode::NoisyOr,
                       FusionMode::NoisyAnd})
    EXPECT_EQ(parse_fusion_mode(to_string(m)), m);
  EXPECT_EQ(parse_fusion_mode("and"), FusionMode::NoisyAnd);
  EXPECT_EQ(parse_fusion_mode("or"), FusionMode::NoisyOr);
  EXPECT_FALSE(parse_fusion_mode("xor"));
}
