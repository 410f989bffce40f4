#include "apl/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "apl/kernels.hpp"

namespace apl {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kCup: return "cup";
    case ModelKind::kBunny: return "bunny";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "cup" || name == "cup-like") return ModelKind::kCup;
  if (name == "bunny" || name == "bunny-like") return ModelKind::kBunny;
  throw Error(ErrorKind::kInvalidArgument,
              "unknown model kind '" + std::string(name) + "'");
}

namespace {

constexpr double kPi = std::numbers::pi;

void make_cup(int n, Rng &rng, PointSet &out) {
  constexpr double kRadius = 30.0;
  constexpr double kHalfHeight = 30.0;
  constexpr double kHandleRadius = 15.0;
  constexpr double kTubeRadius = 4.0;
  const double side_area = 2.0 * kPi * kRadius * 2.0 * kHalfHeight;
  const double bottom_area = kPi * kRadius * kRadius;
  const double handle_area = 2.0 * kPi * kTubeRadius * kPi * kHandleRadius;
  std::discrete_distribution<int> part({side_area, bottom_area, handle_area});
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int i = 0; i < n; ++i) {
    const int which = part(rng);
    if (which == 0) {
      const double theta = 2.0 * kPi * unit(rng);
      const double z = kHalfHeight * (2.0 * unit(rng) - 1.0);
      out.points.emplace_back(kRadius * std::cos(theta),
                              kRadius * std::sin(theta), z);
      out.normals.emplace_back(std::cos(theta), std::sin(theta), 0.0);
    } else if (which == 1) {
      const double r = kRadius * std::sqrt(unit(rng));
      const double theta = 2.0 * kPi * unit(rng);
      out.points.emplace_back(r * std::cos(theta), r * std::sin(theta),
                              -kHalfHeight);
      out.normals.emplace_back(0.0, 0.0, -1.0);
    } else {
      const double phi = kPi * (unit(rng) - 0.5);
      const double psi = 2.0 * kPi * unit(rng);
      const Vec3 center(kRadius + kHandleRadius * std::cos(phi) - 2.0, 0.0,
                        kHandleRadius * std::sin(phi));
      const Vec3 radial(std::cos(phi), 0.0, std::sin(phi));
      const Vec3 n = std::cos(psi) * radial + std::sin(psi) * Vec3::UnitY();
      out.points.push_back(center + kTubeRadius * n);
      out.normals.push_back(n);
    }
  }
}

struct Ellipsoid {
  Vec3 center;
  Vec3 radii;

  double implicit(const Vec3 &p) const {
    return (p - center).cwiseQuotient(radii).squaredNorm();
  }
  double approx_area() const {
    constexpr double kP = 1.6075;
    const double a = std::pow(radii.x(), kP), b = std::pow(radii.y(), kP),
                 c = std::pow(radii.z(), kP);
    return 4.0 * kPi * std::pow((a * b + a * c + b * c) / 3.0, 1.0 / kP);
  }
};

void make_bunny(int n, Rng &rng, PointSet &out) {
  const std::array<Ellipsoid, 3> parts = {{
      {Vec3(0.0, 0.0, 0.0), Vec3(45.0, 32.0, 30.0)},   // body
      {Vec3(38.0, 4.0, 28.0), Vec3(20.0, 17.0, 17.0)},  // head
      {Vec3(42.0, 12.0, 52.0), Vec3(6.0, 5.0, 17.0)},  // ear
  }};
  std::discrete_distribution<int> pick({parts[0].approx_area(),
                                        parts[1].approx_area(),
                                        parts[2].approx_area()});
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (static_cast<int>(out.size()) < n) {
    const int k = pick(rng);
    const Ellipsoid &e = parts[k];
    Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
    if (dir.norm() < 1e-12) continue;
    dir.normalize();
    const Vec3 p = e.center + dir.cwiseProduct(e.radii);
    bool inside_other = false;
    for (int j = 0; j < 3; ++j) {
      if (j != k && parts[j].implicit(p) < 1.0) inside_other = true;
    }
    if (inside_other) continue;
    const Vec3 grad = (p - e.center)
                          .cwiseQuotient(e.radii)
                          .cwiseQuotient(e.radii)
                          .normalized();
    out.points.push_back(p);
    out.normals.push_back(grad);
  }
}

Quat random_rotation(Rng &rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Vector4d v;
  do {
    v = Eigen::Vector4d(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
  } while (v.norm() < 1e-9);
  v.normalize();
  return Quat(v[0], v[1], v[2], v[3]);
}

}  // namespace

double brute_force_diameter(const PointSet &cloud) {
  double best = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t j = i + 1; j < cloud.size(); ++j) {
      best = std::max(best, (cloud.points[i] - cloud.points[j]).squaredNorm());
    }
  }
  return std::sqrt(best);
}

ObjectModel make_model(ModelKind kind, int n_points, uint64_t seed) {
  if (n_points < 50) {
    throw Error(ErrorKind::kInvalidArgument, "model needs at least 50 points");
  }
  ObjectModel model;
  model.kind = kind;
  model.n_points = n_points;
  model.seed = seed;
  Rng rng = make_rng(seed, "model", static_cast<uint64_t>(kind));
  model.cloud.points.reserve(n_points);
  model.cloud.normals.reserve(n_points);
  if (kind == ModelKind::kCup) {
    make_cup(n_points, rng, model.cloud);
    model.symmetry_axis = Vec3::UnitZ();
  } else {
    make_bunny(n_points, rng, model.cloud);
  }
  model.diameter = brute_force_diameter(model.cloud);
  return model;
}

Vec3 default_bin_extent(const ObjectModel &model) {
  return Vec3(200.0, 200.0, 120.0) * (model.diameter / 90.0);
}

double min_separation(const ObjectModel &model) { return 0.6 * model.diameter; }

Scene generate_scene(const ObjectModel &model, int n_objects,
                     const Vec3 &bin_extent, uint64_t seed) {
  if (n_objects < 1) {
    throw Error(ErrorKind::kInvalidArgument, "scene needs at least one object");
  }
  constexpr int kMaxConsecutiveFailures = 10000;
  Scene scene;
  scene.model = model;
  scene.bin_extent = bin_extent;
  scene.seed = seed;
  Rng rng = make_rng(seed, "scene");
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  const double sep = min_separation(model);

  int failures = 0;
  while (static_cast<int>(scene.gt_poses.size()) < n_objects) {
    const Vec3 pos(unit(rng) * bin_extent.x(), unit(rng) * bin_extent.y(),
                   unit(rng) * bin_extent.z());
    const Quat rot = random_rotation(rng);
    const bool clear = std::all_of(
        scene.gt_poses.begin(), scene.gt_poses.end(),
        [&](const Pose6D &p) { return (p.translation - pos).norm() >= sep; });
    if (!clear) {
      if (++failures >= kMaxConsecutiveFailures) {
        throw Error(ErrorKind::kCapacityExceeded,
                    "cannot place " + std::to_string(n_objects) +
                        " objects in the bin");
      }
      continue;
    }
    failures = 0;
    scene.gt_poses.push_back({rot, pos});
  }
  return scene;
}

Rendering render_poses(const ObjectModel &model,
                       const std::vector<Pose6D> &world_poses,
                       const ViewGrid &grid, std::size_t view_index,
                       const Intrinsics &intr) {
  if (view_index >= grid.size()) {
    throw Error(ErrorKind::kInvalidArgument, "view index out of range");
  }
  constexpr double kNear = 1.0;
  constexpr int kSplat = 1;
  const int w = intr.width, h = intr.height;
  const std::size_t n_pix = static_cast<std::size_t>(w) * h;
  const std::size_t n_obj = world_poses.size();

  Rendering r;
  r.width = w;
  r.height = h;
  r.view_index = view_index;
  r.object_count = n_obj;
  r.depth.assign(n_pix, 0.0);
  r.instance.assign(n_pix, -1);
  r.cloud_index.assign(n_pix, -1);
  r.masks.assign(n_obj, {});
  r.bboxes.assign(n_obj, {});
  r.visibility.assign(n_obj, 0.0);

  std::vector<int> winner_point(n_pix, -1);
  std::vector<int> stamp(n_pix, -1);
  std::vector<int> alone(n_obj, 0);
  const Pose6D &cam_from_world = grid[view_index].camera_from_world;

  for (std::size_t o = 0; o < n_obj; ++o) {
    const Pose6D cam_from_obj = pose_compose(cam_from_world, world_poses[o]);
    const Mat3 rot = cam_from_obj.rotation.toRotationMatrix();
    const Vec3 &t = cam_from_obj.translation;
    for (std::size_t k = 0; k < model.cloud.size(); ++k) {
      const Vec3 pc = rot * model.cloud.points[k] + t;
      if (pc.z() <= kNear) continue;
      const int u = static_cast<int>(std::floor(intr.focal * pc.x() / pc.z() + intr.cx));
      const int v = static_cast<int>(std::floor(intr.focal * pc.y() / pc.z() + intr.cy));
      for (int dv = -kSplat; dv <= kSplat; ++dv) {
        const int pv = v + dv;
        if (pv < 0 || pv >= h) continue;
        for (int du = -kSplat; du <= kSplat; ++du) {
          const int pu = u + du;
          if (pu < 0 || pu >= w) continue;
          const std::size_t px = static_cast<std::size_t>(pv) * w + pu;
          if (stamp[px] != static_cast<int>(o)) {
            stamp[px] = static_cast<int>(o);
            ++alone[o];
          }
          if (r.depth[px] == 0.0 || pc.z() < r.depth[px]) {
            r.depth[px] = pc.z();
            r.instance[px] = static_cast<int>(o);
            winner_point[px] = static_cast<int>(k);
          }
        }
      }
    }
  }

  std::vector<Mat3> rotations(n_obj);
  std::vector<Vec3> translations(n_obj);
  for (std::size_t o = 0; o < n_obj; ++o) {
    const Pose6D p = pose_compose(cam_from_world, world_poses[o]);
    rotations[o] = p.rotation.toRotationMatrix();
    translations[o] = p.translation;
  }

  std::vector<std::array<int, 4>> box(n_obj, {w, h, -1, -1});
  for (std::size_t px = 0; px < n_pix; ++px) {
    const int o = r.instance[px];
    if (o < 0) continue;
    const int k = winner_point[px];
    r.cloud_index[px] = static_cast<int>(r.scene_cloud.size());
    r.scene_cloud.points.push_back(rotations[o] * model.cloud.points[k] +
                                   translations[o]);
    r.scene_cloud.normals.push_back(rotations[o] * model.cloud.normals[k]);
    r.masks[o].push_back(static_cast<int>(px));
    const int u = static_cast<int>(px % w), v = static_cast<int>(px / w);
    auto &b = box[o];
    b[0] = std::min(b[0], u);
    b[1] = std::min(b[1], v);
    b[2] = std::max(b[2], u);
    b[3] = std::max(b[3], v);
  }

  for (std::size_t o = 0; o < n_obj; ++o) {
    if (!r.masks[o].empty()) {
      const auto &b = box[o];
      r.bboxes[o] = {static_cast<double>(b[0]) / w, static_cast<double>(b[1]) / h,
                     static_cast<double>(b[2] + 1) / w,
                     static_cast<double>(b[3] + 1) / h};
    }
    r.visibility[o] =
        alone[o] > 0 ? static_cast<double>(r.masks[o].size()) / alone[o] : 0.0;
  }
  return r;
}

Rendering render(const Scene &scene, const ViewGrid &grid,
                 std::size_t view_index, const Intrinsics &intrinsics) {
  return render_poses(scene.model, scene.gt_poses, grid, view_index,
                      intrinsics);
}

VisibilityProfile visibility_profile(const Scene &scene, const ViewGrid &grid,
                                     const Intrinsics &intrinsics) {
  return kernels::visibility_profile_parallel(scene, grid, intrinsics);
}

nlohmann::json scene_to_json(const Scene &scene) {
  nlohmann::json poses = nlohmann::json::array();
  for (const Pose6D &p : scene.gt_poses) {
    poses.push_back({{"position", {p.translation.x(), p.translation.y(),
                                   p.translation.z()}},
                     {"quaternion", {p.rotation.w(), p.rotation.x(),
                                     p.rotation.y(), p.rotation.z()}}});
  }
  return {{"model",
           {{"kind", to_string(scene.model.kind)},
            {"points", scene.model.n_points},
            {"seed", scene.model.seed}}},
          {"seed", scene.seed},
          {"bin_extent",
           {scene.bin_extent.x(), scene.bin_extent.y(), scene.bin_extent.z()}},
          {"poses", poses}};
}

Scene scene_from_json(const nlohmann::json &j) {
  try {
    Scene scene;
    const auto &m = j.at("model");
    scene.model = make_model(model_kind_from_string(m.at("kind").get<std::string>()),
                             m.at("points").get<int>(),
                             m.at("seed").get<uint64_t>());
    scene.seed = j.at("seed").get<uint64_t>();
    const auto &ext = j.at("bin_extent");
    scene.bin_extent = Vec3(ext.at(0).get<double>(), ext.at(1).get<double>(),
                            ext.at(2).get<double>());
    for (const auto &p : j.at("poses")) {
      const auto &pos = p.at("position");
      const auto &q = p.at("quaternion");
      Pose6D pose;
      pose.translation = Vec3(pos.at(0).get<double>(), pos.at(1).get<double>(),
                              pos.at(2).get<double>());
      pose.rotation = Quat(q.at(0).get<double>(), q.at(1).get<double>(),
                           q.at(2).get<double>(), q.at(3).get<double>());
      // Stored quaternions are already unit; renormalizing would perturb the
      // last bit and break exact round trips.
      if (std::abs(pose.rotation.norm() - 1.0) > 1e-12) pose.rotation.normalize();
      scene.gt_poses.push_back(pose);
    }
    return scene;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string("malformed scene json: ") + e.what());
  }
}

void save_scene(const Scene &scene, const std::filesystem::path &path) {
  write_text_atomic(path, scene_to_json(scene).dump(2) + "\n");
}

Scene load_scene(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIoError, "cannot read " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::kInvalidArgument,
                path.string() + ": " + e.what());
  }
  return scene_from_json(j);
}

void write_depth_pgm(const Rendering &r, const std::filesystem::path &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  os << "P5\n" << r.width << ' ' << r.height << "\n65535\n";
  for (double d : r.depth) {
    const auto v = static_cast<uint16_t>(std::clamp(std::lround(d), 0L, 65535L));
    os.put(static_cast<char>(v >> 8));
    os.put(static_cast<char>(v & 0xff));
  }
}

nlohmann::json masks_summary(const Rendering &r) {
  nlohmann::json objects = nlohmann::json::array();
  for (std::size_t o = 0; o < r.object_count; ++o) {
    objects.push_back({{"object", o},
                       {"pixels", r.masks[o].size()},
                       {"visibility", r.visibility[o]},
                       {"bbox", r.bboxes[o].as_array()}});
  }
  return {{"view", r.view_index},
          {"width", r.width},
          {"height", r.height},
          {"objects", objects}};
}

}  // namespace apl
