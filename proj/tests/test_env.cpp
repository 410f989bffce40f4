#include <cmath>
#include <numbers>

#include "doctest.h"

#include "apl/env.hpp"
#include "fixtures.hpp"

using namespace apl;

namespace {

constexpr double kPi = std::numbers::pi;

const World &world() {
  static const World w = test::small_world();
  return w;
}

const SceneContext &cluttered() {
  static const SceneContext ctx(
      generate_scene(test::cup_model(), 12, default_bin_extent(test::cup_model()), 21), world());
  return ctx;
}

const SceneContext &lone() {
  static const SceneContext ctx = [] {
    Scene s;
    s.model = test::cup_model();
    s.gt_poses = {{Quat::Identity(), Vec3::Zero()}};
    return SceneContext(s, world());
  }();
  return ctx;
}

Action view_action(std::size_t v) { return {world().grid[v].azimuth, world().grid[v].elevation}; }

double combine(const RewardTerms &r, const RewardConfig &c) {
  return (1 - c.alpha) * r.e_add + c.alpha * c.beta * r.dist - (1 - c.alpha) * (1 - c.beta) * r.motion;
}

}  // namespace

TEST_CASE("reward algebra") {
  RewardConfig c;
  const Vec3 v(100, 0, 0), obj(0, 0, 0);
  const RewardTerms still = reward_terms(20.0, 20.0, obj, v, v, c);
  CHECK(still.e_add == 0.0);
  CHECK(still.dist == 0.0);
  CHECK(still.motion == 0.0);
  CHECK(still.total == 0.0);

  // Undetected at t (penalty 50), 10 mm at t+1: 40 mm of improvement.
  const RewardTerms found = reward_terms(kUndetectedPenalty, 10.0, obj, v, v, c);
  CHECK(found.e_add * kMmPerRewardUnit == doctest::Approx(40.0));

  Rng rng(3);
  std::uniform_real_distribution<double> u(-500, 500), e(0, 50), a(0, 1);
  for (int i = 0; i < 200; ++i) {
    const Vec3 p(u(rng), u(rng), u(rng)), q(u(rng), u(rng), u(rng)), o(u(rng), u(rng), u(rng));
    RewardConfig rc;
    rc.alpha = a(rng);
    rc.beta = a(rng);
    const RewardTerms r = reward_terms(e(rng), e(rng), o, p, q, rc);
    CHECK(r.total == doctest::Approx(combine(r, rc)).epsilon(1e-12));
    CHECK(r.dist * kMmPerRewardUnit == doctest::Approx((o - p).norm() - (o - q).norm()));
    CHECK(r.motion * kMmPerRewardUnit == doctest::Approx((q - p).lpNorm<1>()));
    rc.alpha = 1.0;
    const RewardTerms r1 = reward_terms(e(rng), e(rng), o, p, q, rc);
    CHECK(r1.total == rc.beta * r1.dist);
  }
  RewardConfig bad;
  bad.alpha = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("episode lifecycle") {
  EnvConfig cfg;
  cfg.horizon = 5;
  ActiveEnv env(world(), cluttered(), cfg, nullptr, 7);
  CHECK_THROWS_AS(env.step({0.0, 0.5}), Error);
  const EnvState s0 = env.reset(0);
  CHECK(s0.vector.size() == 30);
  CHECK(cfg.state_dim() == 30);
  CHECK_FALSE(env.estimate().empty());
  // Slot 0 holds the start position, the rest are zero.
  const Vec3 p0 = world().grid[0].position / world().grid.radius();
  for (int k = 0; k < 3; ++k) CHECK(s0.vector[15 + k] == doctest::Approx(p0[k]));
  for (int k = 18; k < 30; ++k) CHECK(s0.vector[k] == 0.0);

  int rewards = 0;
  double traveled = 0.0;
  std::size_t prev = 0;
  Rng rng(1);
  std::uniform_real_distribution<double> az(-7, 7), el(0, 1.5);
  while (!env.done()) {
    const StepResult r = env.step({az(rng), el(rng)});
    ++rewards;
    traveled += geodesic_distance(world().grid, prev, r.view);
    prev = r.view;
    CHECK(r.done == (rewards == 5));
    CHECK(r.state.vector.size() == 30);
    for (int k = 15 + 3 * std::min(rewards + 1, 5); k < 30; ++k) CHECK(r.state.vector[k] == 0.0);
    CHECK(r.reward.total == doctest::Approx(combine(r.reward, cfg.reward)).epsilon(1e-12));
  }
  CHECK(rewards == 5);
  CHECK(env.traveled() == doctest::Approx(traveled).epsilon(1e-12));
  CHECK(env.visited().size() == 6);
  try {
    env.step({0.0, 0.5});
    FAIL("expected invalid-state");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kInvalidState);
  }
}

TEST_CASE("staying put costs nothing") {
  EnvConfig cfg;
  cfg.reward.beta = 0.5;
  ActiveEnv env(world(), cluttered(), cfg, nullptr, 3);
  env.reset(5);
  const StepResult r = env.step(view_action(5));
  CHECK(r.view == 5);
  CHECK(r.reward.motion == 0.0);
  CHECK(r.reward.dist == 0.0);
  CHECK(env.traveled() == 0.0);
}

TEST_CASE("determinism") {
  EnvConfig cfg;
  auto run = [&] {
    ActiveEnv env(world(), cluttered(), cfg, nullptr, 99);
    env.reset(2);
    std::vector<double> out;
    for (std::size_t v : {4ul, 9ul, 1ul, 14ul, 6ul}) {
      const StepResult r = env.step(view_action(v));
      out.push_back(r.reward.total);
      for (int i = 0; i < r.state.vector.size(); ++i) out.push_back(r.state.vector[i]);
    }
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("degenerate scenes and bad arguments") {
  Scene empty;
  empty.model = test::cup_model();
  const SceneContext ctx(empty, world());
  ActiveEnv env(world(), ctx, EnvConfig{}, nullptr, 1);
  try {
    env.reset(0);
    FAIL("expected degenerate-scene");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kDegenerateScene);
  }
  ActiveEnv ok(world(), cluttered(), EnvConfig{}, nullptr, 1);
  CHECK_THROWS_AS(ok.reset(world().grid.size()), Error);
  EnvConfig neg;
  neg.horizon = -1;
  CHECK_THROWS_AS(ActiveEnv(world(), cluttered(), neg, nullptr, 1), Error);
}

TEST_CASE("learned attention drives the state") {
  Rng rng(4);
  const AttentionParams params = AttentionParams::make(rng);
  ActiveEnv env(world(), cluttered(), EnvConfig{}, &params, 5);
  const EnvState s = env.reset(0);
  REQUIRE(s.attended.has_value());
  const AttentionOutput out = attend(env.estimate().features, params);
  CHECK(*s.attended == out.m);
  for (int i = 0; i < kAttendedDim; ++i) CHECK(s.vector[i] == out.o[i]);
  CHECK(std::abs(s.attention_weights.sum() - 1.0) < 1e-9);
}

TEST_CASE("alpha = 0 telescopes to final error plus motion cost") {
  // One object, guaranteed detection: the attended object never changes, so
  // the e_ADD rewards telescope and the exhaustive argmax over two-step action
  // sequences must coincide with the argmin of final error plus motion.
  EnvConfig cfg;
  cfg.horizon = 2;
  cfg.reward.alpha = 0.0;
  cfg.reward.beta = 0.7;
  cfg.noise.detect_v0 = 0.0;
  cfg.noise.detect_sharpness = 1e6;
  const std::size_t n = world().grid.size();
  double best_return = -1e300, best_cost = 1e300;
  std::pair<std::size_t, std::size_t> arg_return, arg_cost;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      ActiveEnv env(world(), lone(), cfg, nullptr, 11);
      env.reset(0);
      const double e0 = object_error(env.estimate(), lone().scene, 0);
      double ret = 0.0, motion = 0.0;
      for (std::size_t v : {a, b}) {
        const StepResult r = env.step(view_action(v));
        ret += r.reward.total;
        motion += r.reward.motion;
      }
      const double e_final = object_error(env.estimate(), lone().scene, 0);
      const double cost = e_final / kMmPerRewardUnit + (1 - cfg.reward.beta) * motion;
      CHECK(ret == doctest::Approx(e0 / kMmPerRewardUnit - cost).epsilon(1e-12));
      if (ret > best_return) {
        best_return = ret;
        arg_return = {a, b};
      }
      if (cost < best_cost) {
        best_cost = cost;
        arg_cost = {a, b};
      }
    }
  }
  CHECK(arg_return == arg_cost);
}

TEST_CASE("baselines") {
  const ViewGrid &g = world().grid;
  std::vector<std::size_t> visited{0};
  Rng rng(2);

  SUBCASE("unidirectional advances 2 pi / T at 45 degrees") {
    for (int t = 0; t < 5; ++t) {
      const BaselineContext ctx{g, 0, 0, visited, t, 5};
      const Action a = baseline_action(BaselineKind::kUnidirectional, ctx, rng);
      CHECK(a.azimuth == doctest::Approx((t + 1) * 72.0 * kPi / 180.0));
      CHECK(a.elevation == doctest::Approx(kPi / 4));
    }
  }

  SUBCASE("max-distance matches an exhaustive scan") {
    const ViewGrid big = build_grid(800.0, 20, 5);
    std::vector<std::size_t> seen{big.size() - 1};  // highest ring
    for (int round = 0; round < 6; ++round) {
      const BaselineContext ctx{big, seen.back(), seen.front(), seen, round, 6};
      const Action a = baseline_action(BaselineKind::kMaxDistance, ctx, rng);
      const std::size_t chosen = closest_viewpoint(big, a.azimuth, a.elevation);
      double best = -1.0;
      std::size_t arg = 0;
      for (std::size_t v = 0; v < big.size(); ++v) {
        double nearest = 1e300;
        for (std::size_t u : seen) nearest = std::min(nearest, geodesic_distance(big, u, v));
        if (nearest > best) {
          best = nearest;
          arg = v;
        }
      }
      CHECK(chosen == arg);
      if (round == 0) {
        // From a near-polar view the farthest point is on the lowest ring,
        // opposite in azimuth.
        CHECK(big[chosen].elevation == doctest::Approx(big.min_elevation()));
        const double daz = std::abs(big[chosen].azimuth - big[seen[0]].azimuth);
        CHECK(std::abs(daz - kPi) < 1e-9);
      }
      seen.push_back(chosen);
    }
  }

  SUBCASE("entropy picks the best unvisited view") {
    std::vector<double> table(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) table[v] = std::sin(3.0 * v);
    std::vector<std::size_t> seen{0};
    for (int round = 0; round < 5; ++round) {
      BaselineContext ctx{g, seen.back(), 0, seen, round, 5, &table};
      const Action a = baseline_action(BaselineKind::kEntropy, ctx, rng);
      const std::size_t chosen = closest_viewpoint(g, a.azimuth, a.elevation);
      std::size_t arg = g.size();
      for (std::size_t v = 0; v < g.size(); ++v) {
        if (std::find(seen.begin(), seen.end(), v) != seen.end()) continue;
        if (arg == g.size() || table[v] > table[arg]) arg = v;
      }
      CHECK(chosen == arg);
      seen.push_back(chosen);
    }
    const BaselineContext missing{g, 0, 0, seen, 0, 5};
    CHECK_THROWS_AS(baseline_action(BaselineKind::kEntropy, missing, rng), Error);
  }

  SUBCASE("random is centered on the current view") {
    const BaselineContext ctx{g, 9, 0, visited, 0, 5};
    double sa = 0.0, se = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const Action a = baseline_action(BaselineKind::kRandom, ctx, rng);
      sa += a.azimuth;
      se += a.elevation;
    }
    CHECK(std::abs(sa / n - g[9].azimuth) < 4 * kRandomSigmaAzimuth / std::sqrt(double(n)));
    CHECK(std::abs(se / n - g[9].elevation) < 4 * kRandomSigmaElevation / std::sqrt(double(n)));
  }

  CHECK_THROWS_AS(baseline_kind_from_string("greedy"), Error);
  for (auto k : {BaselineKind::kRandom, BaselineKind::kUnidirectional, BaselineKind::kMaxDistance,
                 BaselineKind::kEntropy, BaselineKind::kSweep}) {
    CHECK(baseline_kind_from_string(to_string(k)) == k);
  }
}

TEST_CASE("view entropy table") {
  const std::vector<double> t = view_entropy_table(lone().scene, world().grid, world().intrinsics);
  for (double h : t) CHECK(h == 0.0);
  const std::vector<double> c = view_entropy_table(cluttered().scene, world().grid, world().intrinsics);
  CHECK(c == cluttered().view_entropy);
  for (double h : c) {
    CHECK(h >= 0.0);
    CHECK(h <= std::log(12.0) + 1e-12);
  }
}
