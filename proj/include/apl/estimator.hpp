#ifndef APL_ESTIMATOR_HPP_
#define APL_ESTIMATOR_HPP_

#include <vector>

#include "apl/scene.hpp"

namespace apl {

// Occlusion-dependent noise model standing in for a learned pose estimator.
struct NoiseModel {
  double sigma_t_base = 2.0;      // mm
  double sigma_r_base = 0.05;     // rad
  double occlusion_gain = 4.0;    // k
  double depth_axis_gain = 3.0;
  double detect_v0 = 0.25;
  double detect_sharpness = 12.0;

  void validate() const;

  // Noise scale at visibility v: 1 + k (1 - v).
  double scale(double visibility) const {
    return 1.0 + occlusion_gain * (1.0 - visibility);
  }
  double detection_probability(double visibility) const;
};

struct Hypothesis {
  Pose6D pose;  // camera frame when emitted
  // Hidden ground-truth object index; for reward and metrics only.
  std::size_t object_gt_index = 0;
  BBox bbox;
  std::vector<int> mask;
  double mean_mask_depth = 0.0;  // mm
  double verification = 0.0;
};

std::vector<Hypothesis> estimate(const Rendering &rendering, const Scene &scene,
                                 const ViewGrid &grid, std::size_t view_index,
                                 const NoiseModel &noise, Rng &rng);

inline std::size_t k_of(const std::vector<Hypothesis> &hyps) {
  return hyps.size();
}

}  // namespace apl

#endif  // APL_ESTIMATOR_HPP_
