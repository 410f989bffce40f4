#include "apl/geom.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace apl {

Pose6D Pose6D::from_axis_angle(const Vec3 &axis, double angle,
                               const Vec3 &translation) {
  Pose6D p;
  p.rotation = Quat(Eigen::AngleAxisd(angle, axis.normalized()));
  p.translation = translation;
  return p;
}

Pose6D Pose6D::inverse() const {
  Pose6D inv;
  inv.rotation = rotation.conjugate();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

Pose6D pose_compose(const Pose6D &a, const Pose6D &b) {
  Pose6D out;
  out.rotation = (a.rotation * b.rotation).normalized();
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

double rotation_distance(const Quat &a, const Quat &b) {
  double d = std::abs(a.normalized().dot(b.normalized()));
  return 2.0 * std::acos(std::min(1.0, d));
}

PointSet transform_points(const Pose6D &pose, const PointSet &ps) {
  PointSet out;
  out.points.reserve(ps.size());
  out.normals.reserve(ps.size());
  const Mat3 r = pose.rotation.toRotationMatrix();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    out.points.push_back(r * ps.points[i] + pose.translation);
    out.normals.push_back(r * ps.normals[i]);
  }
  return out;
}

void write_xyzn(std::ostream &os, const PointSet &ps) {
  os.precision(17);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Vec3 &p = ps.points[i];
    const Vec3 &n = ps.normals[i];
    os << p.x() << ' ' << p.y() << ' ' << p.z() << ' ' << n.x() << ' '
       << n.y() << ' ' << n.z() << '\n';
  }
}

PointSet read_xyzn(std::istream &is) {
  PointSet ps;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    double v[6];
    for (double &x : v) {
      if (!(row >> x)) {
        throw Error(ErrorKind::kInvalidArgument,
                    "malformed point row at line " + std::to_string(line_no));
      }
    }
    ps.points.emplace_back(v[0], v[1], v[2]);
    ps.normals.emplace_back(v[3], v[4], v[5]);
  }
  return ps;
}

Vec3 direction_from_angles(double azimuth, double elevation) {
  return {std::cos(elevation) * std::cos(azimuth),
          std::cos(elevation) * std::sin(azimuth), std::sin(elevation)};
}

Viewpoint make_viewpoint(double radius, double azimuth, double elevation,
                         const Vec3 &center) {
  Viewpoint vp;
  vp.azimuth = azimuth;
  vp.elevation = elevation;
  vp.position = center + radius * direction_from_angles(azimuth, elevation);

  // Camera frame: x right, y down, z along the optical axis.
  const Vec3 z = (center - vp.position).normalized();
  Vec3 x = z.cross(Vec3::UnitZ());
  if (x.norm() < 1e-6) x = z.cross(Vec3::UnitX());
  x.normalize();
  const Vec3 y = z.cross(x);

  Mat3 world_from_cam;
  world_from_cam.col(0) = x;
  world_from_cam.col(1) = y;
  world_from_cam.col(2) = z;
  vp.world_from_camera.rotation = Quat(world_from_cam).normalized();
  vp.world_from_camera.translation = vp.position;
  vp.camera_from_world = vp.world_from_camera.inverse();
  return vp;
}

ViewGrid::ViewGrid(double radius, int azimuth_levels, int elevation_levels,
                   const Vec3 &center)
    : radius_{radius},
      azimuth_levels_{azimuth_levels},
      elevation_levels_{elevation_levels},
      center_{center} {
  if (azimuth_levels < 1 || elevation_levels < 1) {
    throw Error(ErrorKind::kInvalidArgument, "grid levels must be >= 1");
  }
  if (!(radius > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "grid radius must be positive");
  }
  viewpoints_.reserve(static_cast<std::size_t>(azimuth_levels) *
                      elevation_levels);
  for (int e = 0; e < elevation_levels; ++e) {
    for (int a = 0; a < azimuth_levels; ++a) {
      viewpoints_.push_back(
          make_viewpoint(radius, azimuth_at(a), elevation_at(e), center));
    }
  }
}

double ViewGrid::elevation_at(int level) const {
  return (level + 1) * (std::numbers::pi / 2.0) / (elevation_levels_ + 1);
}

double ViewGrid::azimuth_at(int level) const {
  return level * 2.0 * std::numbers::pi / azimuth_levels_;
}

double ViewGrid::min_elevation() const { return elevation_at(0); }

double ViewGrid::max_elevation() const {
  return elevation_at(elevation_levels_ - 1);
}

Vec3 ViewGrid::direction(std::size_t i) const {
  const Viewpoint &vp = viewpoints_.at(i);
  return direction_from_angles(vp.azimuth, vp.elevation);
}

ViewGrid build_grid(double radius, int azimuth_levels, int elevation_levels,
                    const Vec3 &center) {
  return ViewGrid(radius, azimuth_levels, elevation_levels, center);
}

namespace {

double central_angle(const Vec3 &a, const Vec3 &b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace

std::size_t closest_viewpoint(const ViewGrid &grid, double azimuth,
                              double elevation) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double az = std::fmod(azimuth, kTwoPi);
  if (az < 0.0) az += kTwoPi;
  const double el =
      std::clamp(elevation, grid.min_elevation(), grid.max_elevation());
  const Vec3 query = direction_from_angles(az, el);

  std::size_t best = 0;
  double best_angle = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double angle = central_angle(query, grid.direction(i));
    if (angle < best_angle) {
      best_angle = angle;
      best = i;
    }
  }
  return best;
}

double geodesic_distance(const ViewGrid &grid, std::size_t i, std::size_t j) {
  if (i == j) return 0.0;
  return grid.radius() * central_angle(grid.direction(i), grid.direction(j));
}

NeighborIndex::NeighborIndex(PointSet points) : points_{std::move(points)} {
  order_.resize(points_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
  nodes_.reserve(2 * points_.size() / 8 + 1);
  if (!order_.empty()) build(0, static_cast<int>(order_.size()), 0);
}

int NeighborIndex::build(int begin, int end, int depth) {
  constexpr int kLeafSize = 8;
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end, -1, 0.0, -1, -1});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (int k = begin; k < end; ++k) {
    lo = lo.cwiseMin(points_.points[order_[k]]);
    hi = hi.cwiseMax(points_.points[order_[k]]);
  }
  int dim = 0;
  (hi - lo).maxCoeff(&dim);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](int a, int b) {
                     return points_.points[a][dim] < points_.points[b][dim];
                   });
  const double split = points_.points[order_[mid]][dim];
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  nodes_[id].split_dim = dim;
  nodes_[id].split_value = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void NeighborIndex::search(int node_id, const Vec3 &q, double &best_sq,
                           int &best_idx) const {
  const Node &node = nodes_[node_id];
  if (node.split_dim < 0) {
    for (int k = node.begin; k < node.end; ++k) {
      const int idx = order_[k];
      const double d = (points_.points[idx] - q).squaredNorm();
      if (d < best_sq || (d == best_sq && idx < best_idx)) {
        best_sq = d;
        best_idx = idx;
      }
    }
    return;
  }
  // Left holds values <= split, right holds values >= split.
  const double diff = q[node.split_dim] - node.split_value;
  const int near = diff <= 0.0 ? node.left : node.right;
  const int far = diff <= 0.0 ? node.right : node.left;
  search(near, q, best_sq, best_idx);
  if (diff * diff <= best_sq) search(far, q, best_sq, best_idx);
}

std::optional<Neighbor> NeighborIndex::query(const Vec3 &q,
                                             double radius) const {
  if (nodes_.empty()) return std::nullopt;
  double best_sq = std::numeric_limits<double>::infinity();
  int best_idx = -1;
  search(0, q, best_sq, best_idx);
  const double dist = std::sqrt(best_sq);
  if (best_idx < 0 || !(dist < radius)) return std::nullopt;
  return Neighbor{points_.points[best_idx], points_.normals[best_idx], dist,
                  static_cast<std::size_t>(best_idx)};
}

std::optional<Neighbor> nn_query(const NeighborIndex &index, const Vec3 &q,
                                 double radius) {
  return index.query(q, radius);
}

}  // namespace apl
