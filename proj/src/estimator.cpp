#include "apl/estimator.hpp"

#include <cmath>
#include <numbers>

namespace apl {

void NoiseModel::validate() const {
  const bool ok = sigma_t_base >= 0.0 && sigma_r_base >= 0.0 &&
                  occlusion_gain >= 0.0 && depth_axis_gain >= 1.0 &&
                  detect_v0 >= 0.0 && detect_v0 < 1.0 &&
                  detect_sharpness >= 0.0;
  if (!ok) throw Error(ErrorKind::kInvalidArgument, "invalid noise model");
}

double NoiseModel::detection_probability(double visibility) const {
  return 1.0 / (1.0 + std::exp(-detect_sharpness * (visibility - detect_v0)));
}

std::vector<Hypothesis> estimate(const Rendering &rendering, const Scene &scene,
                                 const ViewGrid &grid, std::size_t view_index,
                                 const NoiseModel &noise, Rng &rng) {
  if (rendering.object_count != scene.size() ||
      rendering.view_index != view_index || view_index >= grid.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "rendering does not match scene and view");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Pose6D &cam_from_world = grid[view_index].camera_from_world;

  std::vector<Hypothesis> out;
  for (std::size_t o = 0; o < scene.size(); ++o) {
    const auto &mask = rendering.masks[o];
    if (mask.empty()) continue;
    const double v = rendering.visibility[o];
    // Draw order is fixed per visible object so streams stay aligned.
    const double u_detect = unit(rng);
    const double scale = noise.scale(v);
    const Vec3 t_noise(gauss(rng), gauss(rng), gauss(rng));
    const Vec3 axis_raw(gauss(rng), gauss(rng), gauss(rng));
    const double angle = std::abs(gauss(rng)) * noise.sigma_r_base * scale;
    if (u_detect >= noise.detection_probability(v)) continue;

    Hypothesis h;
    const Pose6D gt_cam = pose_compose(cam_from_world, scene.gt_poses[o]);
    const double sigma_t = noise.sigma_t_base * scale;
    Vec3 dt = sigma_t * t_noise;
    dt.z() *= noise.depth_axis_gain;
    Quat dq = Quat::Identity();
    if (angle > 0.0 && axis_raw.norm() > 1e-12) {
      dq = Quat(Eigen::AngleAxisd(angle, axis_raw.normalized()));
    }
    h.pose.rotation = (dq * gt_cam.rotation).normalized();
    h.pose.translation = gt_cam.translation + dt;
    h.object_gt_index = o;
    h.bbox = rendering.bboxes[o];
    h.mask = mask;
    double sum = 0.0;
    for (int px : mask) sum += rendering.depth[px];
    h.mean_mask_depth = sum / static_cast<double>(mask.size());
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace apl
