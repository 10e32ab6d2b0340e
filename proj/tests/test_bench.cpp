#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "genreg/bench.hpp"
#include "genreg/correspondence.hpp"
#include "genreg/report.hpp"
#include "test_util.hpp"

using namespace genreg;
using namespace genreg::bench;

namespace {

BenchConfig noiseless_config(int seeds) {
  BenchConfig cfg;
  cfg.n_seeds = seeds;
  cfg.scene.point_noise = 0;
  cfg.img.noise = cfg.geo.noise = 0;
  cfg.img.outlier_fraction = cfg.geo.outlier_fraction = 0;
  cfg.img.signal = cfg.geo.signal = 1;
  return cfg;
}

std::vector<std::map<std::string, std::string>> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    for (std::string f; std::getline(h, f, ',');) header.push_back(f);
  }
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    std::istringstream r(line);
    std::map<std::string, std::string> row;
    std::size_t k = 0;
    for (std::string f; std::getline(r, f, ',');) row[header.at(k++)] = f;
    rows.push_back(row);
  }
  return rows;
}

double true_pair_mean_similarity(const Scene& s, const BranchFeatures& f) {
  double sum = 0;
  for (const auto& [i, j] : s.gt_pairs) sum += f.src_geo.descriptors.row(i).dot(f.tgt_geo.descriptors.row(j));
  return sum / static_cast<double>(s.gt_pairs.size());
}

}  // namespace

TEST(GenScene, IdentityFullOverlapCopiesSource) {
  SceneSpec spec;
  spec.n_points = 200;
  spec.overlap = 1.0;
  spec.point_noise = 0;
  spec.rotation_deg = 0;
  spec.translation_m = 0;
  const Scene s = gen_scene(spec);
  ASSERT_EQ(s.tgt.size(), s.src.size());
  for (std::size_t i = 0; i < s.src.size(); ++i) {
    EXPECT_EQ(s.tgt[i], s.src[i]);
    EXPECT_EQ(s.gt_pairs[i], (std::pair<std::int64_t, std::int64_t>(i, i)));
  }
}

TEST(GenScene, OverlapSetsPairCount) {
  SceneSpec spec;
  spec.n_points = 1000;
  spec.overlap = 0.5;
  const Scene s = gen_scene(spec);
  EXPECT_EQ(s.gt_pairs.size(), 500u);
  EXPECT_EQ(s.tgt.size(), 1000u);
  EXPECT_NEAR(rre(s.gt.rotation, Mat3::Identity()), spec.rotation_deg, 1e-9);
  EXPECT_NEAR(s.gt.translation.norm(), spec.translation_m, 1e-12);
}

TEST(GenScene, Deterministic) {
  SceneSpec spec;
  spec.seed = 42;
  const Scene a = gen_scene(spec), b = gen_scene(spec);
  EXPECT_EQ(a.src.points, b.src.points);
  EXPECT_EQ(a.tgt.points, b.tgt.points);
  EXPECT_EQ(a.gt.matrix(), b.gt.matrix());
  spec.seed = 43;
  EXPECT_NE(gen_scene(spec).src.points, a.src.points);
}

TEST(GenScene, RejectsBadSpecs) {
  SceneSpec spec;
  spec.overlap = 0;
  EXPECT_THROW(gen_scene(spec), std::invalid_argument);
  spec.overlap = 0.5;
  spec.point_noise = -1;
  EXPECT_THROW(gen_scene(spec), std::invalid_argument);
}

TEST(SimulateBranches, NoiselessTruePairsAreExact) {
  const BenchConfig cfg = noiseless_config(1);
  const Scene s = gen_scene(cfg.scene);
  const BranchFeatures f = simulate_branches(s, cfg.img, cfg.geo);
  const PosteriorMatrix geo = posterior_softmax(similarity_geo(f.src_geo, f.tgt_geo), 0.1);
  const PosteriorMatrix img = posterior_softmax(similarity_img_maxpool(f.src_img, f.tgt_img), 0.1);
  for (const auto& [i, j] : s.gt_pairs) {
    EXPECT_NEAR(f.src_geo.descriptors.row(i).dot(f.tgt_geo.descriptors.row(j)), 1.0, 1e-6);
    Eigen::Index a, b;
    geo.values.row(i).maxCoeff(&a);
    img.values.row(i).maxCoeff(&b);
    EXPECT_EQ(a, j);
    EXPECT_EQ(b, j);
  }
}

TEST(SimulateBranches, AllOutliersGiveChancePrecision) {
  // Pooled over seeds, the fraction of correct mutual-NN matches agrees with
  // the fraction of correct (i, j) pairs in the scene.
  BenchConfig cfg;
  cfg.geo.outlier_fraction = 1.0;
  std::int64_t matches = 0, correct = 0;
  double chance_sum = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    cfg.scene.seed = cfg.geo.seed = cfg.img.seed = seed;
    const Scene s = gen_scene(cfg.scene);
    const BranchFeatures f = simulate_branches(s, cfg.img, cfg.geo);
    const CorrespondenceSet m = mutual_nn_match(similarity_geo(f.src_geo, f.tgt_geo).values);
    std::int64_t pairs_correct = 0;
    for (std::size_t i = 0; i < s.src.size(); ++i)
      for (std::size_t j = 0; j < s.tgt.size(); ++j)
        pairs_correct += match_is_correct(s.src[i], s.tgt[j], s.gt, cfg.radius);
    const double chance = static_cast<double>(pairs_correct) / static_cast<double>(s.src.size() * s.tgt.size());
    for (const auto& c : m) correct += match_is_correct(s.src[c.src], s.tgt[c.tgt], s.gt, cfg.radius);
    matches += static_cast<std::int64_t>(m.size());
    chance_sum += chance * static_cast<double>(m.size());
  }
  const double p0 = chance_sum / static_cast<double>(matches);
  const double observed = static_cast<double>(correct) / static_cast<double>(matches);
  EXPECT_LE(std::abs(observed - p0), 3 * std::sqrt(p0 * (1 - p0) / static_cast<double>(matches)));
}

TEST(SimulateBranches, MoreNoiseLowersTrueSimilarity) {
  BenchConfig cfg;
  cfg.geo.outlier_fraction = 0;
  const Scene s = gen_scene(cfg.scene);
  double prev = 2.0;
  for (double sigma : {0.0, 0.3, 0.6, 1.0, 2.0}) {
    cfg.geo.noise = sigma;
    const double m = true_pair_mean_similarity(s, simulate_branches(s, cfg.img, cfg.geo));
    EXPECT_LT(m, prev) << sigma;
    prev = m;
  }
}

TEST(SimulateBranches, BranchesUseIndependentStreams) {
  BenchConfig cfg;
  const Scene s = gen_scene(cfg.scene);
  const BranchFeatures a = simulate_branches(s, cfg.img, cfg.geo);
  BranchSimSpec img = cfg.img;
  img.noise *= 2;
  const BranchFeatures b = simulate_branches(s, img, cfg.geo);
  EXPECT_EQ(a.src_geo.descriptors, b.src_geo.descriptors);
  EXPECT_NE(a.src_img.views[0].descriptors, b.src_img.views[0].descriptors);
}

TEST(SimulateBranches, CoverageZeroesDescriptors) {
  BenchConfig cfg;
  cfg.img.coverage = 0.5;
  const Scene s = gen_scene(cfg.scene);
  const BranchFeatures f = simulate_branches(s, cfg.img, cfg.geo);
  std::size_t uncovered = 0;
  for (std::size_t i = 0; i < f.src_img_covered.size(); ++i) {
    if (f.src_img_covered[i]) continue;
    ++uncovered;
    for (const auto& v : f.src_img.views) EXPECT_TRUE(v.descriptors.row(i).isZero());
  }
  EXPECT_GT(uncovered, 150u);
  EXPECT_LT(uncovered, 350u);
  EXPECT_EQ(coverage_from_stack(f.src_img), f.src_img_covered);
}

TEST(PrCurve, PerfectPosteriorHasUnitPrecision) {
  const BenchConfig cfg = noiseless_config(1);
  const Scene s = gen_scene(cfg.scene);
  const BranchFeatures f = simulate_branches(s, cfg.img, cfg.geo);
  const PRCurve c = pr_curve(posterior_softmax(similarity_geo(f.src_geo, f.tgt_geo), 0.1).values,
                             s.gt_pairs.size(), s.src, s.tgt, s.gt, 0.05);
  // True pairs outrank everything else; the unmatched overlap-free points
  // only add low-confidence wrong matches after full recall.
  bool full = false;
  for (const PRPoint& p : c.points) {
    if (full) break;
    EXPECT_EQ(p.raw_precision, 1.0) << p.n_emitted;
    full = p.recall >= 1.0;
  }
  EXPECT_TRUE(full);
}

TEST(PrCurve, SentinelAndMonotonicity) {
  BenchConfig cfg;
  const Scene s = gen_scene(cfg.scene);
  const BranchFeatures f = simulate_branches(s, cfg.img, cfg.geo);
  const PRCurve c = pr_curve(posterior_softmax(similarity_geo(f.src_geo, f.tgt_geo), 0.1).values,
                             s.gt_pairs.size(), s.src, s.tgt, s.gt, 0.05);
  ASSERT_GE(c.points.size(), 2u);
  EXPECT_TRUE(std::isinf(c.points[0].threshold));
  EXPECT_EQ(c.points[0].precision, 1.0);
  EXPECT_EQ(c.points[0].recall, 0.0);
  EXPECT_EQ(c.points[0].n_emitted, 0);
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    EXPECT_LT(c.points[k].threshold, c.points[k - 1].threshold);
    EXPECT_GE(c.points[k].recall, c.points[k - 1].recall);
    if (k > 1) EXPECT_LE(c.points[k].precision, c.points[k - 1].precision);
    EXPECT_GE(c.points[k].precision, c.points[k].raw_precision);
  }
}

TEST(PrCurve, CountsMatchExhaustiveCheck) {
  BenchConfig cfg;
  const Scene s = gen_scene(cfg.scene);
  const BranchFeatures f = simulate_branches(s, cfg.img, cfg.geo);
  const RowMatrixXd scores = posterior_softmax(similarity_geo(f.src_geo, f.tgt_geo), 0.1).values;
  const PRCurve c = pr_curve(scores, s.gt_pairs.size(), s.src, s.tgt, s.gt, 0.05);
  const CorrespondenceSet m = mutual_nn_match(scores);
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    std::int64_t emitted = 0, correct = 0;
    for (const auto& x : m) {
      if (x.confidence < c.points[k].threshold) continue;
      ++emitted;
      correct += (s.gt.apply(s.src[x.src]) - s.tgt[x.tgt]).norm() <= 0.05;
    }
    EXPECT_EQ(c.points[k].n_emitted, emitted);
    EXPECT_EQ(c.points[k].n_correct, correct);
    EXPECT_DOUBLE_EQ(c.points[k].raw_precision, double(correct) / double(emitted));
    EXPECT_DOUBLE_EQ(c.points[k].recall, std::min(1.0, double(correct) / double(s.gt_pairs.size())));
  }
}

TEST(PrCurve, EmptyMatrixGivesOnlySentinel) {
  const PRCurve c = pr_curve(RowMatrixXd(0, 0), 0, PointCloud{}, PointCloud{}, RigidTransform{}, 0.05);
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_EQ(c.points[0].precision, 1.0);
  EXPECT_EQ(c.points[0].recall, 0.0);
  EXPECT_THROW(pr_curve(RowMatrixXd(0, 0), 0, PointCloud{}, PointCloud{}, RigidTransform{}, 0.0),
               std::invalid_argument);
}

TEST(RunBenchmark, NoiselessIsExact) {
  const Report r = run_benchmark(noiseless_config(2));
  ASSERT_EQ(r.trials.size(), 10u);
  for (const TrialRow& t : r.trials) {
    EXPECT_TRUE(t.success) << to_string(t.method);
    EXPECT_LE(t.rre_deg, 1e-6) << to_string(t.method);
    EXPECT_LE(t.rte_m, 1e-8) << to_string(t.method);
  }
}

TEST(RunBenchmark, DeterministicReport) {
  BenchConfig cfg;
  cfg.n_seeds = 3;
  const Report a = run_benchmark(cfg), b = run_benchmark(cfg);
  EXPECT_EQ(trials_csv(a), trials_csv(b));
  EXPECT_EQ(pr_curves_csv(a), pr_curves_csv(b));
  EXPECT_EQ(summary_json(a).dump(), summary_json(b).dump());
}

TEST(RunBenchmark, SummaryMatchesCsvRecomputation) {
  BenchConfig cfg;
  cfg.n_seeds = 4;
  const Report r = run_benchmark(cfg);
  const auto rows = parse_csv(trials_csv(r));
  ASSERT_EQ(rows.size(), 20u);
  for (const MethodSummary& s : r.summaries) {
    std::vector<double> rres, rtes;
    for (const auto& row : rows) {
      if (row.at("method") != to_string(s.method)) continue;
      rres.push_back(std::stod(row.at("rre_deg")));
      rtes.push_back(std::stod(row.at("rte_m")));
    }
    ASSERT_EQ(rres.size(), 4u);
    EXPECT_EQ(mean(rres), s.mean_rre);
    EXPECT_EQ(mean(rtes), s.mean_rte);
    EXPECT_EQ(median(rres), s.median_rre);
  }
}

TEST(RunBenchmark, ReportFiles) {
  BenchConfig cfg;
  cfg.n_seeds = 2;
  cfg.methods = {FusionMode::NoisyAnd, FusionMode::NoisyOr};
  const Report r = run_benchmark(cfg);
  const auto dir = genreg::testing::scratch_dir("bench_report");
  write_report(r, dir);
  for (const char* f : {"trials.csv", "pr_curves.csv", "summary.json"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  const nlohmann::json j = summary_json(r);
  EXPECT_EQ(j["generator"], "splitmix64-ctr");
  EXPECT_EQ(j["seeds"]["count"], 2);
  EXPECT_TRUE(j.contains("and_vs_or"));
  EXPECT_EQ(j["methods"].size(), 2u);
}

TEST(RunBenchmark, RejectsInvalidConfig) {
  BenchConfig cfg;
  cfg.methods.clear();
  EXPECT_THROW(run_benchmark(cfg), std::invalid_argument);
  cfg = BenchConfig{};
  cfg.geo.k = 2;
  EXPECT_THROW(run_benchmark(cfg), std::invalid_argument);
}

TEST(Stats, MeanAndMedian) {
  EXPECT_EQ(mean({}), 0.0);
  EXPECT_EQ(mean({1, 2, 6}), 3.0);
  EXPECT_EQ(median({5, 1, 3}), 3.0);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
}
