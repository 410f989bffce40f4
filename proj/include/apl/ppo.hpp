#ifndef APL_PPO_HPP_
#define APL_PPO_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "apl/agent.hpp"

namespace apl {

struct TrainConfig {
  double gamma = 0.995;
  double lambda = 0.95;
  double clip = 0.2;
  double learning_rate = 1e-4;
  int minibatch = 128;
  int epochs = 4;
  int64_t total_steps = 200000;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  uint64_t seed = 1;
  int rollout_steps = 2048;
  int64_t eval_interval = 20000;  // env steps between curve points; 0 = end only

  void validate() const;
};

template <class Obs>
struct Transition {
  Obs observation;
  nn::Vector action;
  double reward = 0.0;
  double log_prob = 0.0;
  double value = 0.0;
};

template <class Obs>
struct Trajectory {
  std::vector<Transition<Obs>> steps;
  double bootstrap_value = 0.0;  // zero for terminated episodes
};

struct Advantages {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// A_t = sum_l (gamma lambda)^l delta_{t+l}, delta_t = r_t + gamma V_{t+1} - V_t,
// V_T = bootstrap; returns = A + V.
Advantages gae_advantages(std::span<const double> rewards,
                          std::span<const double> values, double bootstrap,
                          double gamma, double lambda);

// In place: zero mean, unit (population) std. A constant batch becomes zero.
void normalize_advantages(std::span<double> advantages);

struct SurrogateTerm {
  double ratio = 1.0;
  double unclipped = 0.0;  // rho * A
  double clipped = 0.0;    // min(rho A, clip(rho) A)
  double dlogp = 0.0;      // d clipped / d log_prob
};

SurrogateTerm surrogate(double log_prob, double old_log_prob, double advantage,
                        double clip);

template <class Obs>
struct Sample {
  const Obs *observation = nullptr;
  const nn::Vector *action = nullptr;
  double old_log_prob = 0.0;
  double advantage = 0.0;
  double ret = 0.0;
};

// Flattens trajectories into samples with per-batch normalized advantages.
// The samples point into `trajectories`, which must outlive them.
template <class Obs>
std::vector<Sample<Obs>> make_batch(const std::vector<Trajectory<Obs>> &trajectories,
                                    double gamma, double lambda) {
  std::vector<Sample<Obs>> batch;
  std::vector<double> adv;
  for (const auto &traj : trajectories) {
    std::vector<double> r, v;
    for (const auto &s : traj.steps) {
      r.push_back(s.reward);
      v.push_back(s.value);
    }
    const Advantages a = gae_advantages(r, v, traj.bootstrap_value, gamma, lambda);
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      const auto &s = traj.steps[t];
      batch.push_back({&s.observation, &s.action, s.log_prob, a.advantages[t],
                       a.returns[t]});
      adv.push_back(a.advantages[t]);
    }
  }
  normalize_advantages(adv);
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i].advantage = adv[i];
  return batch;
}

struct LossStats {
  double policy_objective = 0.0;  // mean clipped surrogate
  double value_loss = 0.0;        // mean squared error
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  int updates = 0;
};

// Loss of one sample, minimized:
//   -clipped + value_coef * (V - R)^2 - entropy_coef * H.
// Accumulates its gradient, scaled by `weight`, into `grad`.
template <class Model>
double ppo_sample_loss(const Model &model, const Sample<typename Model::Observation> &s,
                       const TrainConfig &config, double weight,
                       std::span<double> grad, LossStats *stats = nullptr) {
  const auto ev = model.evaluate(*s.observation);
  const double logp = model.log_prob(ev, *s.action);
  const SurrogateTerm sur = surrogate(logp, s.old_log_prob, s.advantage, config.clip);
  const double v = model.value(ev);
  const double h = model.entropy(ev);
  const double loss = -sur.clipped + config.value_coef * (v - s.ret) * (v - s.ret) -
                      config.entropy_coef * h;
  model.backward(*s.observation, ev, *s.action, -weight * sur.dlogp,
                 -weight * config.entropy_coef,
                 weight * 2.0 * config.value_coef * (v - s.ret), grad);
  if (stats) {
    stats->policy_objective += sur.clipped;
    stats->value_loss += (v - s.ret) * (v - s.ret);
    stats->entropy += h;
    stats->approx_kl += s.old_log_prob - logp;
    if (std::abs(sur.ratio - 1.0) > config.clip) stats->clip_fraction += 1.0;
  }
  return loss;
}

// Epochs x shuffled minibatches of Adam steps on the clipped objective.
// Statistics are averaged over every sample visit.
template <class Model>
LossStats ppo_update(Model &model, std::vector<Sample<typename Model::Observation>> batch,
                     const TrainConfig &config, nn::AdamState &adam, Rng &rng) {
  if (batch.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "ppo_update on an empty batch");
  }
  const std::size_t n_params = model.parameter_count();
  if (adam.m.size() != n_params) adam = nn::AdamState(n_params, config.learning_rate);
  LossStats stats;
  std::size_t visits = 0;
  std::vector<double> grad(n_params);
  std::vector<double> params = model.parameters();
  const std::size_t mb = static_cast<std::size_t>(std::max(1, config.minibatch));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(batch.begin(), batch.end(), rng);
    for (std::size_t start = 0; start < batch.size(); start += mb) {
      const std::size_t end = std::min(batch.size(), start + mb);
      std::fill(grad.begin(), grad.end(), 0.0);
      const double w = 1.0 / static_cast<double>(end - start);
      double loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        loss += ppo_sample_loss(model, batch[i], config, w, grad, &stats) * w;
      }
      if (!std::isfinite(loss)) {
        throw Error(ErrorKind::kTrainingDiverged, "non-finite PPO loss");
      }
      visits += end - start;
      nn::adam_step(adam, params, grad);
      model.set_parameters(params);
      ++stats.updates;
    }
  }
  const double inv = 1.0 / static_cast<double>(std::max<std::size_t>(1, visits));
  stats.policy_objective *= inv;
  stats.value_loss *= inv;
  stats.entropy *= inv;
  stats.approx_kl *= inv;
  stats.clip_fraction *= inv;
  return stats;
}

// Runs ceil(n_steps / horizon) episodes with actions sampled from the policy.
// Scenes and start views are drawn uniformly; episode i uses the substream
// (seed, "rollout", iteration, i), so the result does not depend on the
// thread count.
std::vector<Trajectory<Observation>> collect_rollouts(
    const Agent &agent, const World &world, const std::vector<SceneContext> &scenes,
    const EnvConfig &env_config, int n_steps, uint64_t seed, uint64_t iteration);

}  // namespace apl

#endif  // APL_PPO_HPP_
