#include "apl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace apl {

namespace {

double mean_distance(const Mat3 &m, const Vec3 &d, const PointSet &cloud) {
  double sum = 0.0;
  for (const Vec3 &p : cloud.points) sum += (m * p + d).norm();
  return sum / static_cast<double>(cloud.size());
}

double centroid_norm(const ObjectModel &model) {
  Vec3 c = Vec3::Zero();
  for (const Vec3 &p : model.cloud.points) c += p;
  return (c / static_cast<double>(model.cloud.size())).norm();
}

}  // namespace

double e_add_plain(const Pose6D &est, const Pose6D &gt,
                   const ObjectModel &model) {
  const Mat3 m =
      est.rotation.toRotationMatrix() - gt.rotation.toRotationMatrix();
  return mean_distance(m, est.translation - gt.translation, model.cloud);
}

double e_add(const Pose6D &est, const Pose6D &gt, const ObjectModel &model) {
  if (!model.symmetry_axis) return e_add_plain(est, gt, model);
  const Mat3 r_est = est.rotation.toRotationMatrix();
  const Mat3 r_gt = gt.rotation.toRotationMatrix();
  const Vec3 d = est.translation - gt.translation;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kSymmetrySteps; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / kSymmetrySteps;
    const Mat3 sym =
        Eigen::AngleAxisd(angle, *model.symmetry_axis).toRotationMatrix();
    best = std::min(best, mean_distance(r_est * sym - r_gt, d, model.cloud));
  }
  return best;
}

MatchResult match_estimate(const SceneEstimate &estimate, const Scene &scene,
                           const std::vector<std::size_t> &detectable,
                           double penalty) {
  // e_ADD >= |t_est - t_gt| - 2 |centroid|; pairs beyond that bound cannot
  // fall under the penalty and are skipped.
  const double slack = 2.0 * centroid_norm(scene.model);
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t g = 0; g < detectable.size(); ++g) {
    const Pose6D &gt = scene.gt_poses[detectable[g]];
    for (std::size_t i = 0; i < estimate.size(); ++i) {
      const Pose6D &est = estimate.selected[i].world_pose;
      if ((est.translation - gt.translation).norm() - slack >= penalty) continue;
      const double e = e_add(est, gt, scene.model);
      if (e < penalty) pairs.emplace_back(e, i, g);
    }
  }
  std::sort(pairs.begin(), pairs.end());

  MatchResult result;
  result.match.assign(detectable.size(), std::nullopt);
  result.error.assign(detectable.size(), penalty);
  std::vector<bool> used(estimate.size(), false);
  for (const auto &[e, i, g] : pairs) {
    if (used[i] || result.match[g]) continue;
    used[i] = true;
    result.match[g] = i;
    result.error[g] = e;
  }
  return result;
}

double detection_rate(const MatchResult &match, const ObjectModel &model,
                      double fraction) {
  if (match.error.empty()) return 0.0;
  const double threshold = fraction * model.diameter;
  std::size_t correct = 0;
  for (std::size_t g = 0; g < match.error.size(); ++g) {
    if (match.match[g] && match.error[g] < threshold) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(match.error.size());
}

double detection_rate(const SceneEstimate &estimate, const Scene &scene,
                      const std::vector<std::size_t> &detectable,
                      double fraction) {
  return detection_rate(match_estimate(estimate, scene, detectable),
                        scene.model, fraction);
}

double object_error(const SceneEstimate &estimate, const Scene &scene,
                    std::size_t object, double penalty) {
  double best = penalty;
  for (const PoolEntry &e : estimate.selected) {
    if (e.hypothesis.object_gt_index != object) continue;
    best = std::min(best, e_add(e.world_pose, scene.gt_poses[object], scene.model));
  }
  return best;
}

}  // namespace apl
