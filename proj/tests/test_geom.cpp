#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"

#include "apl/geom.hpp"
#include "fixtures.hpp"

using namespace apl;
using apl::test::random_pose;
using apl::test::random_rotation;

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t linear_closest(const ViewGrid &grid, double az, double el) {
  az = std::fmod(az, 2 * kPi);
  if (az < 0) az += 2 * kPi;
  el = std::clamp(el, grid.min_elevation(), grid.max_elevation());
  const Vec3 q = direction_from_angles(az, el);
  std::size_t best = 0;
  double best_dot = -2.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = q.dot((grid[i].position - grid.center()).normalized());
    if (d > best_dot + 1e-15) {
      best_dot = d;
      best = i;
    }
  }
  return best;
}

// Arc length of the great circle between two grid views, integrated as a
// fine polyline of slerped directions.
double polyline_arc(const ViewGrid &grid, std::size_t i, std::size_t j, int segments) {
  const Vec3 a = grid.direction(i), b = grid.direction(j);
  const double omega = std::acos(std::clamp(a.dot(b), -1.0, 1.0));
  if (omega < 1e-15) return 0.0;
  double len = 0.0;
  Vec3 prev = a * grid.radius();
  for (int k = 1; k <= segments; ++k) {
    const double t = static_cast<double>(k) / segments;
    const Vec3 d = (std::sin((1 - t) * omega) * a + std::sin(t * omega) * b) / std::sin(omega);
    const Vec3 p = d * grid.radius();
    len += (p - prev).norm();
    prev = p;
  }
  return len;
}

}  // namespace

TEST_CASE("pose inverse and composition") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const Pose6D a = random_pose(rng), b = random_pose(rng);
    const Vec3 p(1.5, -2.0, 30.0);
    CHECK((pose_compose(a, b).apply(p) - a.apply(b.apply(p))).norm() < 1e-9);
    const Pose6D id = pose_compose(a, a.inverse());
    CHECK(id.translation.norm() < 1e-9);
    CHECK(rotation_distance(id.rotation, Quat::Identity()) < 1e-7);
    CHECK((a.inverse().apply(a.apply(p)) - p).norm() < 1e-9);
  }
}

TEST_CASE("transform_points examples") {
  PointSet ps;
  ps.points = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  ps.normals = {Vec3(0, 0, 1), Vec3(1, 0, 0)};

  const PointSet same = transform_points(Pose6D::identity(), ps);
  CHECK(same.points[1] == ps.points[1]);
  CHECK(same.normals[0] == ps.normals[0]);

  Pose6D shift;
  shift.translation = Vec3(1, 0, 0);
  const PointSet moved = transform_points(shift, ps);
  CHECK((moved.points[0] - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK((moved.normals[0] - Vec3(0, 0, 1)).norm() < 1e-12);

  const PointSet turned = transform_points(Pose6D::from_axis_angle(Vec3::UnitZ(), kPi), ps);
  CHECK((turned.points[1] - Vec3(-1, 0, 0)).norm() < 1e-12);
  CHECK((turned.normals[1] - Vec3(-1, 0, 0)).norm() < 1e-12);
}

TEST_CASE("quaternion stays unit after 1e6 compositions") {
  Rng rng(5);
  Pose6D acc;
  std::vector<Pose6D> steps;
  for (int i = 0; i < 64; ++i) steps.push_back(random_pose(rng, 1.0));
  for (int i = 0; i < 1000000; ++i) acc = pose_compose(acc, steps[i & 63]);
  CHECK(std::abs(acc.rotation.norm() - 1.0) < 1e-6);
}

TEST_CASE("grid shape") {
  const ViewGrid g = build_grid(800.0, 20, 5);
  REQUIRE(g.size() == 100);
  for (const Viewpoint &vp : g.viewpoints()) {
    CHECK(std::abs(vp.position.norm() - 800.0) < 1e-6);
    CHECK(vp.elevation > 0.0);
    CHECK(vp.elevation < kPi / 2);
    CHECK(vp.azimuth >= 0.0);
    CHECK(vp.azimuth < 2 * kPi);
    // Camera looks at the center.
    const Vec3 in_cam = vp.camera_from_world.apply(Vec3::Zero());
    CHECK(std::abs(in_cam.x()) < 1e-9);
    CHECK(std::abs(in_cam.y()) < 1e-9);
    CHECK(std::abs(in_cam.z() - 800.0) < 1e-9);
  }
  CHECK(g[0].azimuth == 0.0);
  CHECK(g[0].elevation == doctest::Approx(kPi / 12));
  CHECK(build_grid(800.0, 1, 1).size() == 1);
  CHECK_THROWS_AS(build_grid(800.0, 0, 5), Error);
  CHECK_THROWS_AS(build_grid(800.0, 20, 0), Error);
  CHECK_THROWS_AS(build_grid(0.0, 20, 5), Error);
}

TEST_CASE("closest_viewpoint matches a linear scan") {
  const ViewGrid g = build_grid(800.0, 20, 5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(closest_viewpoint(g, g[i].azimuth, g[i].elevation) == i);
  }
  Rng rng(3);
  std::uniform_real_distribution<double> az(-10.0, 10.0), el(-0.5, 2.0);
  int mismatches = 0;
  for (int q = 0; q < 1000; ++q) {
    const double a = az(rng), e = el(rng);
    const std::size_t got = closest_viewpoint(g, a, e);
    if (got != linear_closest(g, a, e)) ++mismatches;
    for (int k : {-3, -1, 1, 2}) {
      CHECK(closest_viewpoint(g, a + 2 * kPi * k, e) == got);
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("geodesic distance") {
  const ViewGrid g = build_grid(800.0, 20, 5);
  CHECK(geodesic_distance(g, 7, 7) == 0.0);

  // Opposite azimuths at elevation e: the great circle over the top spans
  // pi - 2e, which is pi R at the equator.
  const ViewGrid ring = build_grid(800.0, 2, 1);
  const double el = ring[0].elevation;
  CHECK(geodesic_distance(ring, 0, 1) == doctest::Approx(800.0 * (kPi - 2 * el)).epsilon(1e-12));

  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); i += 3) {
    for (std::size_t j = 0; j < g.size(); j += 7) {
      const double d = geodesic_distance(g, i, j);
      CHECK(d == geodesic_distance(g, j, i));
      if (i != j) CHECK(d > 0.0);
      worst = std::max(worst, std::abs(d - polyline_arc(g, i, j, 20000)));
    }
  }
  CHECK(worst < 1e-3);

  int violations = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double dij = geodesic_distance(g, i, j);
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (dij > geodesic_distance(g, i, k) + geodesic_distance(g, k, j) + 1e-9) ++violations;
      }
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("nn_query equals an exhaustive scan") {
  Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    PointSet ps;
    const int n = 50 + 400 * trial;
    for (int i = 0; i < n; ++i) {
      // Quantized coordinates create exact ties.
      ps.points.emplace_back(std::round(u(rng)), std::round(u(rng)), std::round(u(rng)) * 0.5);
      ps.normals.push_back(Vec3::UnitZ());
    }
    const NeighborIndex index(ps);
    for (int q = 0; q < 200; ++q) {
      const Vec3 query(u(rng), u(rng), u(rng));
      const double radius = trial == 0 ? 8.0 : 1e9;
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_i = 0;
      for (std::size_t i = 0; i < ps.size(); ++i) {
        const double d = (ps.points[i] - query).norm();
        if (d < best) {
          best = d;
          best_i = i;
        }
      }
      const auto got = nn_query(index, query, radius);
      if (best < radius) {
        REQUIRE(got.has_value());
        CHECK(got->index == best_i);
        CHECK(got->distance == doctest::Approx(best).epsilon(1e-12));
      } else {
        CHECK_FALSE(got.has_value());
      }
    }
  }

  PointSet tiny;
  tiny.points = {Vec3(1, 2, 3)};
  tiny.normals = {Vec3(0, 1, 0)};
  const NeighborIndex one(tiny);
  const auto hit = one.query(Vec3(1, 2, 3), 0.1);
  REQUIRE(hit.has_value());
  CHECK(hit->distance == 0.0);
  CHECK_FALSE(one.query(Vec3(10, 2, 3), 5.0).has_value());
  CHECK_FALSE(NeighborIndex().query(Vec3::Zero(), 1.0).has_value());
}

TEST_CASE("xyzn round trip and malformed rows") {
  Rng rng(1);
  PointSet ps;
  for (int i = 0; i < 20; ++i) {
    ps.points.push_back(random_pose(rng).translation);
    ps.normals.push_back(apl::test::random_unit(rng));
  }
  std::stringstream buf;
  write_xyzn(buf, ps);
  const PointSet back = read_xyzn(buf);
  REQUIRE(back.size() == ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    CHECK(back.points[i] == ps.points[i]);
    CHECK(back.normals[i] == ps.normals[i]);
  }

  std::stringstream bad("1 2 3 0 0 1\n\n4 5 six 0 0 1\n");
  try {
    read_xyzn(bad);
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kInvalidArgument);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("rotation_distance ignores quaternion sign") {
  Rng rng(4);
  const Quat q = random_rotation(rng);
  const Quat neg(-q.w(), -q.x(), -q.y(), -q.z());
  CHECK(rotation_distance(q, neg) < 1e-7);
  const Quat r = q * Quat(Eigen::AngleAxisd(0.3, Vec3::UnitX()));
  CHECK(rotation_distance(q, r) == doctest::Approx(0.3));
}
