#ifndef APL_SCENE_HPP_
#define APL_SCENE_HPP_

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "apl/geom.hpp"

namespace apl {

enum class ModelKind { kCup, kBunny };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

struct ObjectModel {
  ModelKind kind = ModelKind::kCup;
  int n_points = 0;
  uint64_t seed = 0;
  PointSet cloud;  // model frame; the cup axis is model z through the origin
  double diameter = 0.0;
  std::optional<Vec3> symmetry_axis;
};

// cup: cylindrical shell with a bottom disc and a handle arc, revolution
// symmetric about model z (handle notwithstanding). bunny: asymmetric union of
// three ellipsoid shells. Throws kInvalidArgument when n_points < 50.
ObjectModel make_model(ModelKind kind, int n_points, uint64_t seed);

double brute_force_diameter(const PointSet &cloud);

struct Scene {
  ObjectModel model;
  std::vector<Pose6D> gt_poses;  // world_from_model
  Vec3 bin_extent = Vec3(200.0, 200.0, 120.0);
  uint64_t seed = 0;

  std::size_t size() const { return gt_poses.size(); }
};

// Bin of 200x200x120 mm for a 90 mm object, scaled linearly with diameter.
Vec3 default_bin_extent(const ObjectModel &model);
double min_separation(const ObjectModel &model);

// Object centers are uniform in the axis-aligned bin centered at the origin,
// orientations uniform on SO(3); rejection sampling enforces min_separation.
Scene generate_scene(const ObjectModel &model, int n_objects,
                     const Vec3 &bin_extent, uint64_t seed);

struct Intrinsics {
  int width = 128;
  int height = 128;
  double focal = 140.0;
  double cx = 64.0;
  double cy = 64.0;

  static Intrinsics make(int width, int height, double focal) {
    return {width, height, focal, width / 2.0, height / 2.0};
  }
};

struct BBox {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;  // normalized to [0, 1]

  std::array<double, 4> as_array() const { return {x0, y0, x1, y1}; }
};

struct Rendering {
  int width = 0;
  int height = 0;
  std::size_t view_index = 0;
  std::size_t object_count = 0;

  std::vector<double> depth;       // mm, 0 = empty
  std::vector<int> instance;       // object index or -1
  std::vector<int> cloud_index;    // pixel -> scene_cloud row or -1
  std::vector<std::vector<int>> masks;  // per object, pixel indices ascending
  std::vector<BBox> bboxes;
  std::vector<double> visibility;
  PointSet scene_cloud;  // camera frame, one row per non-empty pixel

  std::size_t pixel(int u, int v) const {
    return static_cast<std::size_t>(v) * width + u;
  }
};

// Point-splat z-buffer: every model point covers a 3x3 pixel block and the
// nearest depth wins. Each non-empty pixel carries the winning model point
// (camera frame) and its normal.
Rendering render(const Scene &scene, const ViewGrid &grid,
                 std::size_t view_index, const Intrinsics &intrinsics);

// Renders using explicit poses; used by render() and by single-object oracles.
Rendering render_poses(const ObjectModel &model,
                       const std::vector<Pose6D> &world_poses,
                       const ViewGrid &grid, std::size_t view_index,
                       const Intrinsics &intrinsics);

inline constexpr double kDetectabilityThreshold = 0.15;

struct VisibilityProfile {
  std::vector<std::vector<double>> table;  // [view][object]
  std::vector<std::size_t> detectable;     // ascending object indices
};

VisibilityProfile visibility_profile(const Scene &scene, const ViewGrid &grid,
                                     const Intrinsics &intrinsics);

nlohmann::json scene_to_json(const Scene &scene);
Scene scene_from_json(const nlohmann::json &j);
void save_scene(const Scene &scene, const std::filesystem::path &path);
Scene load_scene(const std::filesystem::path &path);

// 16-bit binary PGM of the depth map (mm) and a JSON summary of the masks.
void write_depth_pgm(const Rendering &r, const std::filesystem::path &path);
nlohmann::json masks_summary(const Rendering &r);

}  // namespace apl

#endif  // APL_SCENE_HPP_
