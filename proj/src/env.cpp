#include "apl/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "apl/kernels.hpp"

namespace apl {

void RewardConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "alpha and beta must lie in [0, 1]");
  }
  if (!(undetected_penalty > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "undetected penalty must be positive");
  }
}

namespace {

double combine(const RewardTerms &r, const RewardConfig &c) {
  return (1.0 - c.alpha) * r.e_add + c.alpha * c.beta * r.dist -
         (1.0 - c.alpha) * (1.0 - c.beta) * r.motion;
}

}  // namespace

RewardTerms reward_terms(double prev_error, double next_error,
                         const Vec3 &object_position, const Vec3 &v_t,
                         const Vec3 &v_next, const RewardConfig &config) {
  RewardTerms r;
  r.e_add = (prev_error - next_error) / kMmPerRewardUnit;
  r.dist = ((object_position - v_t).norm() - (object_position - v_next).norm()) /
           kMmPerRewardUnit;
  r.motion = (v_next - v_t).lpNorm<1>() / kMmPerRewardUnit;
  r.total = combine(r, config);
  return r;
}

RewardTerms motion_only_reward(const Vec3 &v_t, const Vec3 &v_next,
                               const RewardConfig &config) {
  RewardTerms r;
  r.motion = (v_next - v_t).lpNorm<1>() / kMmPerRewardUnit;
  r.total = combine(r, config);
  return r;
}

SceneContext::SceneContext(Scene s, const World &world)
    : scene{std::move(s)},
      profile{visibility_profile(scene, world.grid, world.intrinsics)},
      model_index{scene.model.cloud},
      view_entropy{view_entropy_table(scene, world.grid, world.intrinsics)} {}

nn::Vector assemble_state(const nn::Vector &o, const Observation &obs) {
  nn::Vector s(15 + static_cast<Eigen::Index>(obs.history.size()));
  s.head(kAttendedDim) = o;
  s.segment(kAttendedDim, 3) = obs.position;
  for (std::size_t i = 0; i < obs.history.size(); ++i) {
    s[15 + static_cast<Eigen::Index>(i)] = obs.history[i];
  }
  return s;
}

ActiveEnv::ActiveEnv(const World &world, const SceneContext &context,
                     EnvConfig config, const AttentionParams *attention,
                     uint64_t estimator_seed)
    : world_{world},
      context_{context},
      config_{std::move(config)},
      attention_{attention},
      rng_{estimator_seed} {
  if (config_.horizon < 0) {
    throw Error(ErrorKind::kInvalidArgument, "horizon must be >= 0");
  }
  config_.reward.validate();
  config_.noise.validate();
}

void ActiveEnv::observe(std::size_t view) {
  view_ = view;
  visited_.push_back(view);
  const Rendering rendering =
      render(context_.scene, world_.grid, view, world_.intrinsics);
  std::vector<Hypothesis> hyps = apl::estimate(rendering, context_.scene, world_.grid,
                                          view, config_.noise, rng_);
  pool_ = accumulate(std::move(pool_), std::move(hyps), world_.grid, view,
                     rendering, context_.model_index, config_.epsilon);
  const auto clusters = cluster_hypotheses(
      pool_, config_.cluster_factor * context_.scene.model.diameter);
  estimate_ = select_best(pool_, clusters, world_.grid.radius());
}

void ActiveEnv::refresh_state() {
  EnvState s;
  s.view = view_;
  s.step = t_;
  s.observation.features = estimate_.features;
  s.observation.position =
      (world_.grid[view_].position - world_.grid.center()) / world_.grid.radius();
  s.observation.history = history_;

  nn::Vector o = nn::Vector::Zero(kAttendedDim);
  if (!estimate_.empty()) {
    if (attention_) {
      const AttentionOutput out =
          attend(estimate_.features, *attention_, config_.attention_mode);
      o = out.o;
      s.attended = out.m;
      s.attention_weights = out.weights;
    } else {
      std::size_t m = 0;
      for (std::size_t i = 1; i < estimate_.size(); ++i) {
        if (estimate_.features[i].c < estimate_.features[m].c) m = i;
      }
      s.attended = m;
      o.tail(kFeatureDim) =
          Eigen::Map<const nn::Vector>(estimate_.features[m].as_array().data(), kFeatureDim);
      s.attention_weights = nn::Vector::Zero(static_cast<Eigen::Index>(estimate_.size()));
      s.attention_weights[static_cast<Eigen::Index>(m)] = 1.0;
    }
  }
  s.vector = assemble_state(o, s.observation);
  state_ = std::move(s);
}

EnvState ActiveEnv::reset(std::size_t start_view) {
  if (context_.profile.detectable.empty()) {
    throw Error(ErrorKind::kDegenerateScene, "scene has no detectable object");
  }
  if (start_view >= world_.grid.size()) {
    throw Error(ErrorKind::kInvalidArgument, "start view out of range");
  }
  pool_ = {};
  estimate_ = {};
  visited_.clear();
  history_.assign(3 * static_cast<std::size_t>(config_.horizon), 0.0);
  traveled_ = 0.0;
  t_ = 0;
  started_ = true;
  observe(start_view);
  if (config_.horizon > 0) {
    const Vec3 p = (world_.grid[view_].position - world_.grid.center()) /
                   world_.grid.radius();
    for (int k = 0; k < 3; ++k) history_[k] = p[k];
  }
  refresh_state();
  return state_;
}

StepResult ActiveEnv::step(const Action &action) {
  if (!started_ || done()) {
    throw Error(ErrorKind::kInvalidState, "step() on a finished or unstarted episode");
  }
  const std::size_t prev_view = view_;
  const Vec3 v_t = world_.grid[prev_view].position;
  const std::optional<std::size_t> prev_attended = state_.attended;
  std::size_t gt = 0;
  Vec3 object_position = Vec3::Zero();
  double prev_error = config_.reward.undetected_penalty;
  if (prev_attended) {
    const PoolEntry &e = estimate_.selected[*prev_attended];
    gt = e.hypothesis.object_gt_index;
    object_position = e.world_pose.translation;
    prev_error = object_error(estimate_, context_.scene, gt,
                              config_.reward.undetected_penalty);
  }

  const std::size_t next_view =
      closest_viewpoint(world_.grid, action.azimuth, action.elevation);
  observe(next_view);
  const Vec3 v_next = world_.grid[next_view].position;
  traveled_ += geodesic_distance(world_.grid, prev_view, next_view);
  ++t_;
  if (t_ < config_.horizon) {
    const Vec3 p = (v_next - world_.grid.center()) / world_.grid.radius();
    for (int k = 0; k < 3; ++k) history_[3 * t_ + k] = p[k];
  }

  StepResult result;
  if (prev_attended) {
    const double next_error = object_error(estimate_, context_.scene, gt,
                                           config_.reward.undetected_penalty);
    result.reward = reward_terms(prev_error, next_error, object_position, v_t,
                                 v_next, config_.reward);
  } else {
    result.reward = motion_only_reward(v_t, v_next, config_.reward);
  }
  refresh_state();
  result.state = state_;
  result.done = done();
  result.view = next_view;
  return result;
}

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kRandom: return "random";
    case BaselineKind::kUnidirectional: return "unidirectional";
    case BaselineKind::kMaxDistance: return "max-distance";
    case BaselineKind::kEntropy: return "entropy";
    case BaselineKind::kSweep: return "sweep";
  }
  return "unknown";
}

BaselineKind baseline_kind_from_string(std::string_view name) {
  if (name == "random") return BaselineKind::kRandom;
  if (name == "unidirectional") return BaselineKind::kUnidirectional;
  if (name == "max-distance") return BaselineKind::kMaxDistance;
  if (name == "entropy") return BaselineKind::kEntropy;
  if (name == "sweep") return BaselineKind::kSweep;
  throw Error(ErrorKind::kInvalidArgument,
              "unknown baseline '" + std::string(name) + "'");
}

namespace {

Action action_for_view(const ViewGrid &grid, std::size_t view) {
  return {grid[view].azimuth, grid[view].elevation};
}

bool is_visited(const std::vector<std::size_t> &visited, std::size_t v) {
  return std::find(visited.begin(), visited.end(), v) != visited.end();
}

}  // namespace

Action baseline_action(BaselineKind kind, const BaselineContext &ctx, Rng &rng) {
  const ViewGrid &grid = ctx.grid;
  switch (kind) {
    case BaselineKind::kRandom: {
      const Viewpoint &cur = grid[ctx.current_view];
      std::normal_distribution<double> az(cur.azimuth, kRandomSigmaAzimuth);
      std::normal_distribution<double> el(cur.elevation, kRandomSigmaElevation);
      const double a = az(rng);
      return {a, el(rng)};
    }
    case BaselineKind::kUnidirectional: {
      const double step = 2.0 * std::numbers::pi / std::max(1, ctx.horizon);
      return {grid[ctx.start_view].azimuth + (ctx.step + 1) * step,
              std::numbers::pi / 4.0};
    }
    case BaselineKind::kMaxDistance: {
      std::size_t best = 0;
      double best_d = -1.0;
      for (std::size_t v = 0; v < grid.size(); ++v) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t u : ctx.visited) {
          nearest = std::min(nearest, geodesic_distance(grid, v, u));
        }
        if (nearest > best_d) {
          best_d = nearest;
          best = v;
        }
      }
      return action_for_view(grid, best);
    }
    case BaselineKind::kEntropy: {
      if (!ctx.view_entropy || ctx.view_entropy->size() != grid.size()) {
        throw Error(ErrorKind::kInvalidArgument, "entropy baseline needs a view entropy table");
      }
      std::optional<std::size_t> best;
      for (std::size_t v = 0; v < grid.size(); ++v) {
        if (is_visited(ctx.visited, v)) continue;
        if (!best || (*ctx.view_entropy)[v] > (*ctx.view_entropy)[*best]) best = v;
      }
      return action_for_view(grid, best.value_or(ctx.current_view));
    }
    case BaselineKind::kSweep: {
      for (std::size_t v = 0; v < grid.size(); ++v) {
        if (!is_visited(ctx.visited, v)) return action_for_view(grid, v);
      }
      return action_for_view(grid, ctx.current_view);
    }
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown baseline kind");
}

std::vector<double> view_entropy_table(const Scene &scene, const ViewGrid &grid,
                                       const Intrinsics &intrinsics) {
  return kernels::view_entropy_parallel(scene, grid, intrinsics);
}

}  // namespace apl
