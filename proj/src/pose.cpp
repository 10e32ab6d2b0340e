#include "genreg/pose.hpp"

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "genreg/rng.hpp"

namespace genreg {

CorrespondenceSet mutual_nn_match(const RowMatrixXd& scores) {
  const Eigen::Index n = scores.rows();
  const Eigen::Index m = scores.cols();
  CorrespondenceSet out;
  if (n == 0 || m == 0) return out;

  std::vector<Eigen::Index> row_best(n), col_best(m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < m; ++j)
      if (scores(i, j) > scores(i, best)) best = j;
    row_best[i] = best;
  }
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < n; ++i)
      if (scores(i, j) > scores(best, j)) best = i;
    col_best[j] = best;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = row_best[i];
    if (col_best[j] == i) out.push_back({i, j, scores(i, j)});
  }
  return out;
}

RigidTransform horn_fit(std::span<const Vec3> src, std::span<const Vec3> tgt) {
  if (src.size() != tgt.size())
    throw PoseError(PoseError::Kind::TooFewPairs, "horn_fit: source and target sizes differ");
  const std::size_t n = src.size();
  if (n < 3)
    throw PoseError(PoseError::Kind::TooFewPairs,
                    "horn_fit: need at least 3 pairs, got " + std::to_string(n));

  Vec3 src_mean = Vec3::Zero(), tgt_mean = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    src_mean += src[i];
    tgt_mean += tgt[i];
  }
  src_mean /= static_cast<double>(n);
  tgt_mean /= static_cast<double>(n);

  Eigen::MatrixX3d centered(static_cast<Eigen::Index>(n), 3);
  Mat3 cross = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p = src[i] - src_mean;
    centered.row(static_cast<Eigen::Index>(i)) = p.transpose();
    cross += p * (tgt[i] - tgt_mean).transpose();
  }

  // Singular values of the centered n×3 source matrix via its R factor.
  const Mat3 r_factor = Eigen::HouseholderQR<Eigen::MatrixX3d>(centered)
                            .matrixQR()
                            .topRows(std::min<Eigen::Index>(3, centered.rows()))
                            .triangularView<Eigen::Upper>();
  const Vec3 sv = Eigen::JacobiSVD<Mat3>(r_factor).singularValues();
  if (!(sv[1] >= kCollinearityRatio * sv[0]) || sv[0] == 0.0)
    throw PoseError(PoseError::Kind::Degenerate, "horn_fit: degenerate (collinear) configuration");

  const Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  d(2, 2) = Mat3(v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;

  RigidTransform out;
  out.rotation = v * d * u.transpose();
  out.translation = tgt_mean - out.rotation * src_mean;
  return out;
}

namespace {

void gather(const CorrespondenceSet& c, const PointCloud& src, const PointCloud& tgt,
            std::vector<Vec3>& ps, std::vector<Vec3>& qs) {
  ps.resize(c.size());
  qs.resize(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k].src < 0 || static_cast<std::size_t>(c[k].src) >= src.size() || c[k].tgt < 0 ||
        static_cast<std::size_t>(c[k].tgt) >= tgt.size())
      throw PoseError(PoseError::Kind::IndexOutOfRange,
                      "correspondence " + std::to_string(k) + " indexes outside the clouds");
    ps[k] = src[c[k].src];
    qs[k] = tgt[c[k].tgt];
  }
}

}  // namespace

RigidTransform horn_fit(const CorrespondenceSet& c, const PointCloud& src, const PointCloud& tgt) {
  std::vector<Vec3> ps, qs;
  gather(c, src, tgt, ps, qs);
  return horn_fit(ps, qs);
}

double sum_squared_residual(const RigidTransform& t, std::span<const Vec3> src,
                            std::span<const Vec3> tgt) {
  double sum = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) sum += (t.apply(src[i]) - tgt[i]).squaredNorm();
  return sum;
}

Eigen::MatrixXf compatibility_matrix(std::span<const Vec3> src, std::span<const Vec3> tgt,
                                     double d_comp) {
  const auto n = static_cast<Eigen::Index>(src.size());
  Eigen::MatrixXf c = Eigen::MatrixXf::Zero(n, n);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index b = 0; b < n; ++b) {
    for (Eigen::Index a = 0; a < n; ++a) {
      if (a == b) continue;
      const double dp = (src[a] - src[b]).norm();
      const double dq = (tgt[a] - tgt[b]).norm();
      if (std::abs(dp - dq) <= d_comp) c(a, b) = 1.0f;
    }
  }
  return c;
}

Eigen::MatrixXf second_order_compatibility(const Eigen::MatrixXf& compat) {
  // Entries are integer counts ≤ n, exact in float for n < 2^24.
  const Eigen::MatrixXf two_hop = compat * compat;
  return compat.cwiseProduct(two_hop);
}

namespace {

std::vector<std::int64_t> inliers_of(const RigidTransform& t, std::span<const Vec3> ps,
                                     std::span<const Vec3> qs, double d_inlier) {
  std::vector<std::int64_t> out;
  const double limit = d_inlier * d_inlier;
  for (std::size_t k = 0; k < ps.size(); ++k)
    if ((t.apply(ps[k]) - qs[k]).squaredNorm() <= limit) out.push_back(static_cast<std::int64_t>(k));
  return out;
}

RegistrationResult failure(std::string why) {
  RegistrationResult r;
  r.success = false;
  r.diagnostic = std::move(why);
  return r;
}

}  // namespace

RegistrationResult robust_register(const CorrespondenceSet& c, const PointCloud& src,
                                   const PointCloud& tgt, const RobustConfig& cfg) {
  if (c.size() < 3)
    return failure("need at least 3 correspondences, got " + std::to_string(c.size()));
  std::vector<Vec3> ps, qs;
  try {
    gather(c, src, tgt, ps, qs);
  } catch (const PoseError& e) {
    return failure(e.what());
  }
  const auto n = static_cast<Eigen::Index>(c.size());

  const Eigen::MatrixXf sc2 = second_order_compatibility(compatibility_matrix(ps, qs, cfg.d_comp));
  const Eigen::VectorXf score = sc2.colwise().sum().transpose();  // symmetric

  std::vector<Eigen::Index> ranked(n);
  std::iota(ranked.begin(), ranked.end(), Eigen::Index{0});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return score[a] > score[b]; });

  // Each seed's partner pool: its most second-order-compatible correspondences.
  struct Seed {
    Eigen::Index index;
    std::vector<Eigen::Index> pool;
  };
  std::vector<Seed> seeds;
  const Eigen::Index n_seeds = std::min<Eigen::Index>(n, std::max(1, cfg.n_seeds));
  for (Eigen::Index r = 0; r < n_seeds; ++r) {
    const Eigen::Index s = ranked[r];
    std::vector<Eigen::Index> pool;
    for (Eigen::Index b = 0; b < n; ++b)
      if (sc2(b, s) > 0.0f) pool.push_back(b);
    std::stable_sort(pool.begin(), pool.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return sc2(a, s) > sc2(b, s); });
    if (pool.size() > static_cast<std::size_t>(std::max(2, cfg.k_neighbors)))
      pool.resize(static_cast<std::size_t>(std::max(2, cfg.k_neighbors)));
    if (pool.size() >= 2) seeds.push_back({s, std::move(pool)});
  }
  if (seeds.empty())
    return failure("no seed has two spatially compatible partners (d_comp=" +
                   std::to_string(cfg.d_comp) + ")");

  // Each hypothesis draws from its own counter stream, so the outcome does not
  // depend on evaluation order.
  const int n_hyp = std::max(1, cfg.n_hypotheses);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_hyp), -1);
  std::vector<RigidTransform> models(static_cast<std::size_t>(n_hyp));
#pragma omp parallel for schedule(dynamic, 8)
  for (int h = 0; h < n_hyp; ++h) {
    const Seed& seed = seeds[static_cast<std::size_t>(h) % seeds.size()];
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(h));
    const auto pool = static_cast<std::uint64_t>(seed.pool.size());
    const auto first = rng.below(pool);
    auto second = rng.below(pool - 1);
    if (second >= first) ++second;
    const std::array<Eigen::Index, 3> idx = {seed.index, seed.pool[first], seed.pool[second]};
    const std::array<Vec3, 3> hp = {ps[idx[0]], ps[idx[1]], ps[idx[2]]};
    const std::array<Vec3, 3> hq = {qs[idx[0]], qs[idx[1]], qs[idx[2]]};
    try {
      models[h] = horn_fit(hp, hq);
    } catch (const PoseError&) {
      continue;
    }
    const double limit = cfg.d_inlier * cfg.d_inlier;
    std::int64_t count = 0;
    for (Eigen::Index k = 0; k < n; ++k)
      if ((models[h].apply(ps[k]) - qs[k]).squaredNorm() <= limit) ++count;
    counts[h] = count;
  }

  int best = -1;
  for (int h = 0; h < n_hyp; ++h)
    if (counts[h] >= 0 && (best < 0 || counts[h] > counts[best])) best = h;
  if (best < 0) return failure("every hypothesis was degenerate");
  if (counts[best] < cfg.min_inliers)
    return failure("best hypothesis has " + std::to_string(counts[best]) + " inliers, below min_inliers=" +
                   std::to_string(cfg.min_inliers));

  RegistrationResult result;
  result.success = true;
  result.transform = models[best];
  result.inliers = inliers_of(result.transform, ps, qs, cfg.d_inlier);

  // Refit on the inlier set; keep refining while the set does not shrink.
  for (int iter = 0; iter < 5; ++iter) {
    std::vector<Vec3> ip, iq;
    for (auto k : result.inliers) {
      ip.push_back(ps[k]);
      iq.push_back(qs[k]);
    }
    RigidTransform refit;
    try {
      refit = horn_fit(ip, iq);
    } catch (const PoseError&) {
      break;
    }
    auto refit_inliers = inliers_of(refit, ps, qs, cfg.d_inlier);
    if (iter > 0 && refit_inliers.size() < result.inliers.size()) break;
    const bool unchanged = refit_inliers == result.inliers;
    result.transform = refit;
    result.inliers = std::move(refit_inliers);
    if (unchanged) break;
  }
  result.diagnostic = std::to_string(result.inliers.size()) + " inliers from hypothesis " +
                      std::to_string(best);
  return result;
}

double rre(const Mat3& r_est, const Mat3& r_gt) {
  // atan2(sin, cos) form of arccos((tr − 1)/2); keeps precision near 0° and 180°.
  const Mat3 rel = r_gt.transpose() * r_est;
  const Vec3 axis(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1));
  const double cos_angle = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double sin_angle = std::min(1.0, 0.5 * axis.norm());
  return std::atan2(sin_angle, cos_angle) * 180.0 / std::numbers::pi;
}

double rte(const Vec3& t_est, const Vec3& t_gt) { return (t_est - t_gt).norm(); }

void attach_ground_truth(RegistrationResult& r, const RigidTransform& gt) {
  r.rre_deg = rre(r.transform.rotation, gt.rotation);
  r.rte_m = rte(r.transform.translation, gt.translation);
}

}  // namespace genreg
