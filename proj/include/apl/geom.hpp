#ifndef APL_GEOM_HPP_
#define APL_GEOM_HPP_

#include <Eigen/Geometry>

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "apl/common.hpp"

namespace apl {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

// Rigid transform. Translation in mm. Maps points from the source frame into
// the target frame: p' = R p + t.
struct Pose6D {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose6D identity() { return {}; }
  static Pose6D from_axis_angle(const Vec3 &axis, double angle,
                                const Vec3 &translation = Vec3::Zero());

  Vec3 apply(const Vec3 &p) const { return rotation * p + translation; }
  Vec3 rotate(const Vec3 &n) const { return rotation * n; }
  Pose6D inverse() const;
};

// a ∘ b: applies b first, then a. The result rotation is renormalized.
Pose6D pose_compose(const Pose6D &a, const Pose6D &b);

// Angle of the relative rotation, in radians, ignoring quaternion sign.
double rotation_distance(const Quat &a, const Quat &b);

struct PointSet {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

PointSet transform_points(const Pose6D &pose, const PointSet &ps);

// Plain-text "x y z nx ny nz" rows.
void write_xyzn(std::ostream &os, const PointSet &ps);
PointSet read_xyzn(std::istream &is);

struct Viewpoint {
  double azimuth;    // rad, [0, 2π)
  double elevation;  // rad, above the equator
  Pose6D camera_from_world;
  Pose6D world_from_camera;
  Vec3 position;  // world frame, mm
};

// Cameras on the upper hemisphere looking at `center`. Viewpoints are ordered
// elevation-major: index = el * azimuth_levels + az, lowest elevation first.
class ViewGrid {
 public:
  ViewGrid(double radius, int azimuth_levels, int elevation_levels,
           const Vec3 &center = Vec3::Zero());

  double radius() const { return radius_; }
  int azimuth_levels() const { return azimuth_levels_; }
  int elevation_levels() const { return elevation_levels_; }
  const Vec3 &center() const { return center_; }
  std::size_t size() const { return viewpoints_.size(); }
  const Viewpoint &operator[](std::size_t i) const { return viewpoints_[i]; }
  const std::vector<Viewpoint> &viewpoints() const { return viewpoints_; }

  double min_elevation() const;
  double max_elevation() const;
  double elevation_at(int level) const;
  double azimuth_at(int level) const;

  // Unit direction from center towards camera i.
  Vec3 direction(std::size_t i) const;

 private:
  double radius_;
  int azimuth_levels_;
  int elevation_levels_;
  Vec3 center_;
  std::vector<Viewpoint> viewpoints_;
};

ViewGrid build_grid(double radius, int azimuth_levels, int elevation_levels,
                    const Vec3 &center = Vec3::Zero());

// Camera pose at (azimuth, elevation) on a sphere of `radius` around `center`,
// optical axis through the center, image "up" aligned with world z.
Viewpoint make_viewpoint(double radius, double azimuth, double elevation,
                         const Vec3 &center);

Vec3 direction_from_angles(double azimuth, double elevation);

std::size_t closest_viewpoint(const ViewGrid &grid, double azimuth,
                              double elevation);

double geodesic_distance(const ViewGrid &grid, std::size_t i, std::size_t j);

struct Neighbor {
  Vec3 point;
  Vec3 normal;
  double distance;
  std::size_t index;
};

// Static kd-tree over a PointSet. Ties on distance resolve to the lowest
// stored index, matching a forward linear scan with strict improvement.
class NeighborIndex {
 public:
  NeighborIndex() = default;
  explicit NeighborIndex(PointSet points);

  const PointSet &points() const { return points_; }

  // Nearest stored point iff its distance is strictly below `radius`.
  std::optional<Neighbor> query(const Vec3 &q, double radius) const;

 private:
  struct Node {
    int begin;
    int end;
    int split_dim;  // -1 for leaf
    double split_value;
    int left;
    int right;
  };

  int build(int begin, int end, int depth);
  void search(int node, const Vec3 &q, double &best_sq, int &best_idx) const;

  PointSet points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

std::optional<Neighbor> nn_query(const NeighborIndex &index, const Vec3 &q,
                                 double radius);

}  // namespace apl

#endif  // APL_GEOM_HPP_
