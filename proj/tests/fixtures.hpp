#ifndef APL_TESTS_FIXTURES_HPP_
#define APL_TESTS_FIXTURES_HPP_

#include <random>

#include "apl/env.hpp"

namespace apl::test {

inline Vec3 random_unit(Rng &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline Quat random_rotation(Rng &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Quat q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q;
}

inline Pose6D random_pose(Rng &rng, double spread = 100.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  Pose6D p;
  p.rotation = random_rotation(rng);
  p.translation = Vec3(u(rng), u(rng), u(rng));
  return p;
}

// Small cheap world for environment tests.
inline World small_world() {
  World w;
  w.grid = build_grid(800.0, 8, 2);
  w.intrinsics = Intrinsics::make(64, 64, 70.0);
  return w;
}

inline const ObjectModel &cup_model() {
  static const ObjectModel m = make_model(ModelKind::kCup, 300, 7);
  return m;
}

inline const ObjectModel &bunny_model() {
  static const ObjectModel m = make_model(ModelKind::kBunny, 300, 7);
  return m;
}

}  // namespace apl::test

#endif  // APL_TESTS_FIXTURES_HPP_
