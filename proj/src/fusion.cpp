#include "apl/fusion.hpp"

#include <algorithm>
#include <numeric>

#include "apl/kernels.hpp"

namespace apl {

double delta(const Vec3 &p, const Vec3 &q, const Vec3 &n_p, const Vec3 &n_q,
             double epsilon) {
  if (!(epsilon > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "epsilon must be positive");
  }
  const double dist = (p - q).norm();
  if (!(dist < epsilon)) return 0.0;
  return 0.5 * (1.0 - dist / epsilon) + 0.5 * n_p.dot(n_q);
}

double verification_score(const Hypothesis &h, const Rendering &rendering,
                          const NeighborIndex &model_index, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "epsilon must be positive");
  }
  if (h.mask.empty()) return 0.0;
  // Bring scene points into the hypothesis model frame; delta is invariant
  // under the rigid transform, so the model index can be built once.
  const Pose6D model_from_cam = h.pose.inverse();
  const Mat3 rot = model_from_cam.rotation.toRotationMatrix();
  double sum = 0.0;
  std::size_t counted = 0;
  for (int px : h.mask) {
    const int row = rendering.cloud_index[px];
    if (row < 0) continue;
    ++counted;
    const Vec3 q = rot * rendering.scene_cloud.points[row] +
                   model_from_cam.translation;
    const auto nn = model_index.query(q, epsilon);
    if (!nn) continue;
    const Vec3 n_q = rot * rendering.scene_cloud.normals[row];
    sum += delta(nn->point, q, nn->normal, n_q, epsilon);
  }
  if (counted == 0) return 0.0;
  return std::clamp(sum / static_cast<double>(counted), 0.0, 1.0);
}

double verification_score(const Hypothesis &h, const Rendering &rendering,
                          const ObjectModel &model, double epsilon) {
  return verification_score(h, rendering, NeighborIndex(model.cloud), epsilon);
}

HypothesisPool accumulate(HypothesisPool pool, std::vector<Hypothesis> fresh,
                          const ViewGrid &grid, std::size_t view_index,
                          const Rendering &rendering,
                          const NeighborIndex &model_index, double epsilon) {
  const std::vector<double> scores = kernels::score_hypotheses_parallel(
      fresh, rendering, model_index, epsilon);
  const Pose6D &world_from_cam = grid[view_index].world_from_camera;
  pool.entries.reserve(pool.entries.size() + fresh.size());
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    PoolEntry e;
    e.world_pose = pose_compose(world_from_cam, fresh[i].pose);
    e.view_index = view_index;
    e.score = scores[i];
    e.hypothesis = std::move(fresh[i]);
    e.hypothesis.verification = scores[i];
    pool.entries.push_back(std::move(e));
  }
  return pool;
}

namespace {

std::size_t find_root(std::vector<std::size_t> &parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

std::vector<Cluster> cluster_hypotheses(const HypothesisPool &pool,
                                        double threshold) {
  if (!(threshold > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "cluster threshold must be positive");
  }
  const std::size_t n = pool.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const double thr_sq = threshold * threshold;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 &ti = pool.entries[i].world_pose.translation;
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((pool.entries[j].world_pose.translation - ti).squaredNorm() < thr_sq) {
        const std::size_t a = find_root(parent, i), b = find_root(parent, j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  // Roots are the smallest member of each component, so iterating in index
  // order yields clusters sorted by smallest member.
  std::vector<Cluster> clusters;
  std::vector<long> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find_root(parent, i);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(clusters.size());
      clusters.emplace_back();
    }
    clusters[slot[r]].push_back(i);
  }
  return clusters;
}

SceneEstimate select_best(const HypothesisPool &pool,
                          const std::vector<Cluster> &clusters,
                          double grid_radius) {
  SceneEstimate est;
  for (const Cluster &cluster : clusters) {
    if (cluster.empty()) continue;
    std::size_t best = cluster.front();
    for (std::size_t idx : cluster) {
      if (pool.entries[idx].score > pool.entries[best].score ||
          (pool.entries[idx].score == pool.entries[best].score && idx < best)) {
        best = idx;
      }
    }
    const PoolEntry &e = pool.entries[best];
    ObjectFeature f;
    f.b = e.hypothesis.bbox.as_array();
    f.d = std::clamp(e.hypothesis.mean_mask_depth / (2.0 * grid_radius), 0.0, 1.0);
    f.c = e.score;
    est.selected.push_back(e);
    est.features.push_back(f);
    est.pool_indices.push_back(best);
  }
  return est;
}

nlohmann::json estimate_to_json(const SceneEstimate &estimate) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const PoolEntry &e = estimate.selected[i];
    const Pose6D &p = e.world_pose;
    out.push_back(
        {{"pool_index", estimate.pool_indices[i]},
         {"view", e.view_index},
         {"position", {p.translation.x(), p.translation.y(), p.translation.z()}},
         {"quaternion",
          {p.rotation.w(), p.rotation.x(), p.rotation.y(), p.rotation.z()}},
         {"score", e.score},
         {"feature", estimate.features[i].as_array()}});
  }
  return out;
}

}  // namespace apl
