#include "apl/ppo.hpp"

#include <omp.h>

#include <exception>
#include <string>

namespace apl {

void TrainConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "gamma and lambda must lie in [0, 1]");
  }
  if (!(clip > 0.0)) throw Error(ErrorKind::kInvalidArgument, "clip must be positive");
  if (!(learning_rate > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "learning rate must be positive");
  }
  if (minibatch < 1 || epochs < 1 || rollout_steps < 1 || total_steps < 0 ||
      eval_interval < 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "minibatch, epochs and rollout_steps must be >= 1");
  }
}

Advantages gae_advantages(std::span<const double> rewards,
                          std::span<const double> values, double bootstrap,
                          double gamma, double lambda) {
  if (rewards.size() != values.size()) {
    throw Error(ErrorKind::kInvalidArgument, "rewards and values differ in length");
  }
  const std::size_t n = rewards.size();
  Advantages out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_value = bootstrap;
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double delta = rewards[k] + gamma * next_value - values[k];
    running = delta + gamma * lambda * running;
    out.advantages[k] = running;
    out.returns[k] = running + values[k];
    next_value = values[k];
  }
  return out;
}

void normalize_advantages(std::span<double> a) {
  if (a.empty()) return;
  const double n = static_cast<double>(a.size());
  double mean = 0.0;
  for (double x : a) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : a) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / n);
  for (double &x : a) x = sd > 1e-12 ? (x - mean) / sd : 0.0;
}

SurrogateTerm surrogate(double log_prob, double old_log_prob, double advantage,
                        double clip) {
  SurrogateTerm s;
  s.ratio = std::exp(log_prob - old_log_prob);
  s.unclipped = s.ratio * advantage;
  const double clipped_ratio = std::clamp(s.ratio, 1.0 - clip, 1.0 + clip);
  const double other = clipped_ratio * advantage;
  if (s.unclipped <= other) {
    s.clipped = s.unclipped;
    s.dlogp = s.unclipped;  // d(rho A)/d logp = rho A
  } else {
    s.clipped = other;
    s.dlogp = 0.0;
  }
  return s;
}

namespace {

Trajectory<Observation> run_episode(const Agent &agent, const World &world,
                                    const std::vector<SceneContext> &scenes,
                                    const EnvConfig &env_config, Rng &rng) {
  EnvConfig cfg = env_config;
  cfg.attention_mode = agent.attention_mode();
  std::uniform_int_distribution<std::size_t> pick_scene(0, scenes.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_view(0, world.grid.size() - 1);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const SceneContext &ctx = scenes[pick_scene(rng)];
    const std::size_t start = pick_view(rng);
    const uint64_t env_seed = rng();
    if (ctx.profile.detectable.empty()) continue;
    ActiveEnv env(world, ctx, cfg, &agent.attention(), env_seed);
    EnvState state = env.reset(start);
    Trajectory<Observation> traj;
    while (!env.done()) {
      const auto ev = agent.evaluate(state.observation);
      Transition<Observation> tr;
      tr.action = agent.sample(ev, rng);
      tr.log_prob = agent.log_prob(ev, tr.action);
      tr.value = agent.value(ev);
      StepResult r = env.step(to_action(tr.action));
      tr.reward = r.reward.total;
      tr.observation = std::move(state.observation);
      traj.steps.push_back(std::move(tr));
      state = std::move(r.state);
    }
    return traj;
  }
  throw Error(ErrorKind::kDegenerateScene, "no usable training scene");
}

}  // namespace

std::vector<Trajectory<Observation>> collect_rollouts(
    const Agent &agent, const World &world, const std::vector<SceneContext> &scenes,
    const EnvConfig &env_config, int n_steps, uint64_t seed, uint64_t iteration) {
  if (scenes.empty()) throw Error(ErrorKind::kInvalidArgument, "no training scenes");
  if (env_config.horizon < 1) {
    throw Error(ErrorKind::kInvalidArgument, "training needs horizon >= 1");
  }
  const int h = env_config.horizon;
  const int episodes = std::max(1, (n_steps + h - 1) / h);
  std::vector<Trajectory<Observation>> out(static_cast<std::size_t>(episodes));
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (int i = 0; i < episodes; ++i) {
    try {
      Rng rng = make_rng(seed, "rollout", iteration, static_cast<uint64_t>(i));
      out[static_cast<std::size_t>(i)] = run_episode(agent, world, scenes, env_config, rng);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace apl
