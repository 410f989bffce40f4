#include "apl/bandit.hpp"

#include <cmath>

namespace apl {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

BanditModel::Evaluation BanditModel::evaluate(const Observation &) const {
  return {sigmoid(theta_), baseline_};
}

double BanditModel::log_prob(const Evaluation &ev, const nn::Vector &action) const {
  return action[0] > 0.5 ? std::log(ev.p1) : std::log1p(-ev.p1);
}

double BanditModel::entropy(const Evaluation &ev) const {
  const double p = ev.p1;
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1 - p) * std::log1p(-p);
}

nn::Vector BanditModel::sample(const Evaluation &ev, Rng &rng) const {
  nn::Vector a(1);
  a[0] = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < ev.p1 ? 1.0 : 0.0;
  return a;
}

void BanditModel::backward(const Observation &, const Evaluation &ev, const nn::Vector &action,
                           double dlogp, double dentropy, double dvalue,
                           std::span<double> grad) const {
  const double p = ev.p1;
  // d log p(a) / d theta = a - p; dH/dtheta = -p (1 - p) theta.
  const double dlp = (action[0] > 0.5 ? 1.0 : 0.0) - p;
  const double dh = -p * (1 - p) * theta_;
  grad[0] += dlogp * dlp + dentropy * dh;
  grad[1] += dvalue;
}

void BanditModel::set_parameters(std::span<const double> flat) {
  if (flat.size() != 2) throw Error(ErrorKind::kInvalidArgument, "bandit has 2 parameters");
  theta_ = flat[0];
  baseline_ = flat[1];
}

double BanditModel::probability_of_rewarded() const { return sigmoid(theta_); }

TrainConfig bandit_train_config(uint64_t seed) {
  TrainConfig c;
  c.learning_rate = 0.05;
  c.rollout_steps = 64;
  c.minibatch = 16;
  c.epochs = 4;
  c.seed = seed;
  return c;
}

BanditResult train_bandit(uint64_t seed, int64_t max_steps, double threshold) {
  const TrainConfig cfg = bandit_train_config(seed);
  BanditModel model;
  nn::AdamState adam(model.parameter_count(), cfg.learning_rate);
  Rng rng = make_rng(seed, "bandit");
  BanditResult out;
  int64_t steps = 0;
  const BanditModel::Observation obs;
  while (steps < max_steps) {
    std::vector<Trajectory<BanditModel::Observation>> trajs;
    for (int i = 0; i < cfg.rollout_steps && steps < max_steps; ++i, ++steps) {
      const auto ev = model.evaluate(obs);
      Transition<BanditModel::Observation> tr;
      tr.action = model.sample(ev, rng);
      tr.log_prob = model.log_prob(ev, tr.action);
      tr.value = ev.value;
      tr.reward = tr.action[0];
      trajs.push_back({{tr}, 0.0});
    }
    ppo_update(model, make_batch(trajs, cfg.gamma, cfg.lambda), cfg, adam, rng);
    if (model.probability_of_rewarded() >= threshold) {
      out.steps_to_threshold = steps;
      break;
    }
  }
  out.final_probability = model.probability_of_rewarded();
  return out;
}

}  // namespace apl
