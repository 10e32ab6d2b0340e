#include "genreg/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "genreg/rng.hpp"

namespace genreg::bench {

void SceneSpec::validate() const {
  if (n_points < 1) throw std::invalid_argument("n_points must be at least 1");
  if (!(extent > 0)) throw std::invalid_argument("extent must be positive");
  if (!(overlap > 0 && overlap <= 1)) throw std::invalid_argument("overlap must lie in (0, 1]");
  if (!(point_noise >= 0)) throw std::invalid_argument("point_noise must be non-negative");
  if (!std::isfinite(rotation_deg) || !std::isfinite(translation_m))
    throw std::invalid_argument("transform magnitude must be finite");
}

void BranchSimSpec::validate() const {
  if (dim < 1) throw std::invalid_argument("descriptor dim must be at least 1");
  if (!(signal >= 0 && signal <= 1)) throw std::invalid_argument("signal must lie in [0, 1]");
  if (!(noise >= 0)) throw std::invalid_argument("descriptor noise must be non-negative");
  if (!(outlier_fraction >= 0 && outlier_fraction <= 1))
    throw std::invalid_argument("outlier_fraction must lie in [0, 1]");
  if (!(coverage >= 0 && coverage <= 1)) throw std::invalid_argument("coverage must lie in [0, 1]");
  if (k < 1) throw std::invalid_argument("K must be at least 1");
}

namespace {

Vec3 unit3(CounterRng& rng) {
  Vec3 v(rng.normal(), rng.normal(), rng.normal());
  const double n = v.norm();
  return n > 0 ? Vec3(v / n) : Vec3::UnitX();
}

Eigen::VectorXd unit_vector(CounterRng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  const double n = v.norm();
  if (n == 0.0) {
    v.setZero();
    v[0] = 1.0;
    return v;
  }
  return v / n;
}

Vec3 uniform_in_cube(CounterRng& rng, double extent) {
  const double h = extent / 2;
  const double x = rng.uniform(-h, h);
  const double y = rng.uniform(-h, h);
  const double z = rng.uniform(-h, h);
  return {x, y, z};
}

}  // namespace

Scene gen_scene(const SceneSpec& spec) {
  spec.validate();
  CounterRng rng(spec.seed, kSceneStream);
  Scene scene;
  const Vec3 axis = unit3(rng);
  const Vec3 direction = unit3(rng);
  scene.gt = RigidTransform::from_axis_angle(axis, spec.rotation_deg * std::numbers::pi / 180.0,
                                             spec.translation_m * direction);

  const int n = spec.n_points;
  const int n_overlap = std::clamp(static_cast<int>(std::lround(spec.overlap * n)), 0, n);
  scene.src.points.reserve(n);
  for (int i = 0; i < n; ++i) scene.src.points.push_back(uniform_in_cube(rng, spec.extent));

  scene.tgt.points.reserve(n);
  for (int i = 0; i < n_overlap; ++i) {
    Vec3 q = scene.gt.apply(scene.src[i]);
    if (spec.point_noise > 0) {
      const double nx = rng.normal(), ny = rng.normal(), nz = rng.normal();
      q += spec.point_noise * Vec3(nx, ny, nz);
    }
    scene.tgt.points.push_back(q);
    scene.gt_pairs.emplace_back(i, i);
  }
  for (int i = n_overlap; i < n; ++i)
    scene.tgt.points.push_back(scene.gt.apply(uniform_in_cube(rng, spec.extent)));
  return scene;
}

SimulatedBranch simulate_branch(const Scene& scene, const BranchSimSpec& spec, std::uint64_t stream) {
  spec.validate();
  CounterRng rng(spec.seed, stream);
  const int d = spec.dim;
  const std::size_t views = static_cast<std::size_t>(spec.k) * spec.k;
  const std::size_t n_src = scene.src.size();
  const std::size_t n_tgt = scene.tgt.size();

  // Latents: one per source point, then one per target point without a partner.
  std::vector<std::int64_t> partner(n_tgt, -1);
  for (const auto& [s, t] : scene.gt_pairs) partner[t] = s;
  std::vector<Eigen::VectorXd> src_latent(n_src), tgt_latent(n_tgt);
  for (std::size_t i = 0; i < n_src; ++i) src_latent[i] = unit_vector(rng, d);
  for (std::size_t j = 0; j < n_tgt; ++j)
    tgt_latent[j] = partner[j] >= 0 ? src_latent[partner[j]] : unit_vector(rng, d);

  const double nuisance_weight = std::sqrt(std::max(0.0, 1.0 - spec.signal * spec.signal));
  const double view_sigma = spec.noise / std::sqrt(static_cast<double>(d));

  auto side = [&](const std::vector<Eigen::VectorXd>& latent, std::vector<FeatureField>& out,
                  std::vector<std::uint8_t>& covered) {
    const auto n = static_cast<Eigen::Index>(latent.size());
    out.assign(views, FeatureField(n, d));
    covered.assign(latent.size(), 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool outlier = rng.bernoulli(spec.outlier_fraction);
      const bool is_covered = spec.coverage >= 1.0 || rng.bernoulli(spec.coverage);
      const Eigen::VectorXd nuisance = unit_vector(rng, d);
      const Eigen::VectorXd random_dir = unit_vector(rng, d);
      const Eigen::VectorXd clean =
          outlier ? random_dir : Eigen::VectorXd(spec.signal * latent[i] + nuisance_weight * nuisance);
      for (std::size_t v = 0; v < views; ++v) {
        Eigen::VectorXd desc = clean;
        if (view_sigma > 0)
          for (int c = 0; c < d; ++c) desc[c] += view_sigma * rng.normal();
        const double norm = desc.norm();
        if (norm > 0) desc /= norm;
        if (is_covered) out[v].descriptors.row(i) = desc.cast<float>().transpose();
      }
      covered[i] = is_covered ? 1 : 0;
    }
  };

  SimulatedBranch b;
  side(src_latent, b.src_views, b.src_covered);
  side(tgt_latent, b.tgt_views, b.tgt_covered);
  return b;
}

BranchFeatures simulate_branches(const Scene& scene, const BranchSimSpec& img,
                                 const BranchSimSpec& geo) {
  if (geo.k != 1) throw std::invalid_argument("geometric branch must have K = 1");
  SimulatedBranch ib = simulate_branch(scene, img, kImgStream);
  SimulatedBranch gb = simulate_branch(scene, geo, kGeoStream);
  BranchFeatures out;
  out.src_img.k = img.k;
  out.tgt_img.k = img.k;
  out.src_img.views = std::move(ib.src_views);
  out.tgt_img.views = std::move(ib.tgt_views);
  out.src_img_covered = std::move(ib.src_covered);
  out.tgt_img_covered = std::move(ib.tgt_covered);
  out.src_geo = std::move(gb.src_views.front());
  out.tgt_geo = std::move(gb.tgt_views.front());
  return out;
}

bool match_is_correct(const Vec3& p, const Vec3& q, const RigidTransform& gt, double radius) {
  return (gt.apply(p) - q).norm() <= radius;
}

PRCurve pr_curve(const RowMatrixXd& scores, std::size_t n_gt_pairs, const PointCloud& src,
                 const PointCloud& tgt, const RigidTransform& gt, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("radius must be positive");
  CorrespondenceSet matches = mutual_nn_match(scores);
  std::stable_sort(matches.begin(), matches.end(),
                   [](const Correspondence& a, const Correspondence& b) { return a.confidence > b.confidence; });

  PRCurve curve;
  curve.radius = radius;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 1.0, 0.0, 1.0, 0, 0});
  const double denom = static_cast<double>(n_gt_pairs);
  std::int64_t emitted = 0, correct = 0;
  std::size_t k = 0;
  while (k < matches.size()) {
    const double threshold = matches[k].confidence;
    while (k < matches.size() && matches[k].confidence == threshold) {
      ++emitted;
      if (match_is_correct(src[matches[k].src], tgt[matches[k].tgt], gt, radius)) ++correct;
      ++k;
    }
    PRPoint p;
    p.threshold = threshold;
    p.n_emitted = emitted;
    p.n_correct = correct;
    p.raw_precision = static_cast<double>(correct) / static_cast<double>(emitted);
    p.recall = denom > 0 ? std::min(1.0, static_cast<double>(correct) / denom) : 0.0;
    curve.points.push_back(p);
  }
  // Interpolated precision: running max from the high-recall end.
  double best = 0.0;
  for (auto it = curve.points.rbegin(); it != curve.points.rend(); ++it) {
    best = std::max(best, it->raw_precision);
    it->precision = best;
  }
  curve.points.front().precision = 1.0;
  return curve;
}

std::optional<double> precision_at_recall(const PRCurve& curve, double recall) {
  for (const PRPoint& p : curve.points)
    if (p.recall >= recall) return p.precision;
  return std::nullopt;
}

void BenchConfig::validate() const {
  if (methods.empty()) throw std::invalid_argument("methods must not be empty");
  if (n_seeds < 1) throw std::invalid_argument("seeds must be at least 1");
  scene.validate();
  img.validate();
  geo.validate();
  if (geo.k != 1) throw std::invalid_argument("geo_k must be 1");
  pipeline.validate();
  if (!(radius > 0)) throw std::invalid_argument("radius must be positive");
  if (!(recall_step > 0 && recall_step <= 1)) throw std::invalid_argument("recall_step must lie in (0, 1]");
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

namespace {

std::vector<double> recall_grid(double step) {
  std::vector<double> grid;
  const int n = static_cast<int>(std::floor(1.0 / step + 1e-9));
  for (int k = 1; k <= n; ++k) grid.push_back(k * step);
  return grid;
}

}  // namespace

MethodSummary summarize(FusionMode method, const std::vector<TrialRow>& rows,
                        const std::vector<const PRCurve*>& curves, const BenchConfig& config) {
  MethodSummary s;
  s.method = method;
  std::vector<double> rres, rtes, precisions;
  for (const TrialRow& r : rows) {
    if (r.method != method) continue;
    ++s.trials;
    if (!r.success) ++s.failures;
    rres.push_back(r.rre_deg);
    rtes.push_back(r.rte_m);
    precisions.push_back(r.precision);
  }
  s.mean_rre = mean(rres);
  s.median_rre = median(rres);
  s.mean_rte = mean(rtes);
  s.median_rte = median(rtes);
  s.mean_precision = mean(precisions);
  for (double t : config.rre_thresholds) {
    const auto hit = std::count_if(rres.begin(), rres.end(), [&](double x) { return x <= t; });
    s.rre_accuracy.push_back(rres.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(rres.size()));
  }
  for (double t : config.rte_thresholds) {
    const auto hit = std::count_if(rtes.begin(), rtes.end(), [&](double x) { return x <= t; });
    s.rte_accuracy.push_back(rtes.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(rtes.size()));
  }
  s.recall_grid = recall_grid(config.recall_step);
  for (double r : s.recall_grid) {
    std::vector<double> at;
    for (const PRCurve* c : curves)
      if (auto p = precision_at_recall(*c, r)) at.push_back(*p);
    s.mean_precision_at_recall.push_back(at.empty() ? std::nullopt : std::optional<double>(mean(at)));
  }
  return s;
}

Report run_benchmark(const BenchConfig& config) {
  config.validate();
  const auto n_methods = config.methods.size();
  const auto n_seeds = static_cast<std::size_t>(config.n_seeds);

  Report report;
  report.config = config;
  report.trials.resize(n_methods * n_seeds);
  report.curves.resize(n_methods * n_seeds);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t si = 0; si < static_cast<std::int64_t>(n_seeds); ++si) {
    const std::uint64_t seed = config.first_seed + static_cast<std::uint64_t>(si);
    SceneSpec scene_spec = config.scene;
    scene_spec.seed = seed;
    BranchSimSpec img = config.img, geo = config.geo;
    img.seed = seed;
    geo.seed = seed;
    const Scene scene = gen_scene(scene_spec);
    const BranchFeatures feats = simulate_branches(scene, img, geo);

    PipelineConfig pipeline = config.pipeline;
    pipeline.robust.seed = seed;
    BranchInputs in{&feats.src_geo, &feats.tgt_geo, &feats.src_img, &feats.tgt_img,
                    feats.src_img_covered};
    const BranchPosteriors pre = branch_posteriors(in, pipeline);

    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      pipeline.fusion = config.methods[mi];
      const PipelineResult res = register_clouds(scene.src, scene.tgt, in, pipeline, &pre);
      const RigidTransform estimate = res.registration.success ? res.registration.transform
                                                               : RigidTransform::identity();
      TrialRow row;
      row.method = config.methods[mi];
      row.seed = seed;
      row.success = res.registration.success;
      row.rre_deg = rre(estimate.rotation, scene.gt.rotation);
      row.rte_m = rte(estimate.translation, scene.gt.translation);
      row.n_matches = static_cast<std::int64_t>(res.matches.size());
      row.n_inliers = static_cast<std::int64_t>(res.registration.inliers.size());
      for (const auto& m : res.matches)
        if (match_is_correct(scene.src[m.src], scene.tgt[m.tgt], scene.gt, config.radius)) ++row.n_correct;
      row.precision = row.n_matches > 0 ? static_cast<double>(row.n_correct) / static_cast<double>(row.n_matches)
                                        : 1.0;
      const std::size_t slot = mi * n_seeds + static_cast<std::size_t>(si);
      report.trials[slot] = row;
      report.curves[slot] = {row.method, seed,
                             pr_curve(res.fused.values, scene.gt_pairs.size(), scene.src, scene.tgt,
                                      scene.gt, config.radius)};
    }
  }

  for (std::size_t mi = 0; mi < n_methods; ++mi) {
    std::vector<const PRCurve*> curves;
    for (std::size_t si = 0; si < n_seeds; ++si) curves.push_back(&report.curves[mi * n_seeds + si].curve);
    report.summaries.push_back(summarize(config.methods[mi], report.trials, curves, config));
  }

  const auto and_it = std::find(config.methods.begin(), config.methods.end(), FusionMode::NoisyAnd);
  const auto or_it = std::find(config.methods.begin(), config.methods.end(), FusionMode::NoisyOr);
  if (and_it != config.methods.end() && or_it != config.methods.end()) {
    const std::size_t ai = static_cast<std::size_t>(and_it - config.methods.begin());
    const std::size_t oi = static_cast<std::size_t>(or_it - config.methods.begin());
    AndOrComparison cmp;
    for (double r : recall_grid(config.recall_step)) {
      std::vector<double> pa, po;
      for (std::size_t si = 0; si < n_seeds; ++si) {
        const auto a = precision_at_recall(report.curves[ai * n_seeds + si].curve, r);
        const auto o = precision_at_recall(report.curves[oi * n_seeds + si].curve, r);
        if (!a || !o) continue;
        pa.push_back(*a);
        po.push_back(*o);
      }
      // A level counts when both curves reach it in at least half the seeds.
      if (pa.empty() || 2 * pa.size() < n_seeds) continue;
      cmp.recall.push_back(r);
      cmp.seeds_compared.push_back(static_cast<std::int64_t>(pa.size()));
      cmp.and_precision.push_back(mean(pa));
      cmp.or_precision.push_back(mean(po));
      if (cmp.and_precision.back() < cmp.or_precision.back()) cmp.holds_on_mean = false;
    }
    if (cmp.recall.empty()) cmp.holds_on_mean = false;
    for (std::size_t si = 0; si < n_seeds; ++si) {
      const PRCurve& ca = report.curves[ai * n_seeds + si].curve;
      const PRCurve& co = report.curves[oi * n_seeds + si].curve;
      for (double r : recall_grid(config.recall_step)) {
        const auto a = precision_at_recall(ca, r);
        const auto o = precision_at_recall(co, r);
        if (a && o && *a < *o) {
          cmp.violating_seeds.push_back(config.first_seed + si);
          break;
        }
      }
    }
    report.and_vs_or = std::move(cmp);
  }
  return report;
}

}  // namespace genreg::bench
