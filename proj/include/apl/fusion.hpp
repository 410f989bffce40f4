#ifndef APL_FUSION_HPP_
#define APL_FUSION_HPP_

#include <array>
#include <vector>

#include "json.hpp"

#include "apl/estimator.hpp"

namespace apl {

inline constexpr double kDefaultEpsilon = 5.0;        // mm
inline constexpr double kDefaultClusterFactor = 0.2;  // x model diameter

struct PoolEntry {
  Hypothesis hypothesis;
  std::size_t view_index = 0;
  Pose6D world_pose;
  double score = 0.0;
};

// Append-only across an episode.
struct HypothesisPool {
  std::vector<PoolEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

struct ObjectFeature {
  std::array<double, 4> b{};  // normalized bbox
  double d = 0.0;             // mean mask depth / grid diameter
  double c = 0.0;             // verification score

  std::array<double, 6> as_array() const { return {b[0], b[1], b[2], b[3], d, c}; }
};

struct SceneEstimate {
  std::vector<PoolEntry> selected;
  std::vector<ObjectFeature> features;
  std::vector<std::size_t> pool_indices;  // parallel to selected

  std::size_t size() const { return selected.size(); }
  bool empty() const { return selected.empty(); }
};

// Local fit between scene point q and model point p. Throws when epsilon <= 0.
double delta(const Vec3 &p, const Vec3 &q, const Vec3 &n_p, const Vec3 &n_q,
             double epsilon);

// Ground-truth-free hypothesis quality. Every scene point inside the mask is
// an inlier; points whose nearest model point is >= epsilon away contribute 0.
// `model_index` indexes the model cloud in the model frame.
double verification_score(const Hypothesis &h, const Rendering &rendering,
                          const NeighborIndex &model_index, double epsilon);
double verification_score(const Hypothesis &h, const Rendering &rendering,
                          const ObjectModel &model, double epsilon);

HypothesisPool accumulate(HypothesisPool pool, std::vector<Hypothesis> fresh,
                          const ViewGrid &grid, std::size_t view_index,
                          const Rendering &rendering,
                          const NeighborIndex &model_index, double epsilon);

using Cluster = std::vector<std::size_t>;

// Single-linkage agglomerative clustering on world-frame translation, cut at
// `threshold`: two entries share a cluster iff they are connected by a chain
// of pairwise distances < threshold. Members ascending; clusters ordered by
// their smallest member.
std::vector<Cluster> cluster_hypotheses(const HypothesisPool &pool,
                                        double threshold);

SceneEstimate select_best(const HypothesisPool &pool,
                          const std::vector<Cluster> &clusters,
                          double grid_radius);

nlohmann::json estimate_to_json(const SceneEstimate &estimate);

}  // namespace apl

#endif  // APL_FUSION_HPP_
