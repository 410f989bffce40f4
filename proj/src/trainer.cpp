#include "apl/trainer.hpp"

#include <sstream>

namespace apl {

namespace {

CurvePoint evaluate_point(const TrainSetup &setup, const Agent &agent, int64_t step,
                          double train_return) {
  const LearnedPolicy policy(agent, "learned");
  const MetricsRecord m = episode_eval(policy, setup.world, setup.eval_scenes,
                                       setup.env, setup.eval_seeds);
  CurvePoint p;
  p.step = step;
  p.mean_return = m.mean_return;
  p.mean_e_add = m.mean_e_add;
  p.detection_rate = m.detection_rate;
  p.distance = m.mean_distance;
  p.train_return = train_return;
  return p;
}

}  // namespace

TrainOutcome train(const TrainSetup &setup) {
  setup.train.validate();
  setup.env.reward.validate();
  if (setup.env.horizon < 1) {
    throw Error(ErrorKind::kInvalidArgument, "training needs horizon >= 1");
  }
  Rng init_rng = make_rng(setup.train.seed, "init");
  TrainOutcome out{Agent(setup.env.horizon, setup.attention_mode, init_rng), {}, {}, 0};
  Agent &agent = out.agent;
  EnvConfig env = setup.env;
  env.attention_mode = setup.attention_mode;

  nn::AdamState adam(agent.parameter_count(), setup.train.learning_rate);
  const int64_t interval = setup.train.eval_interval;
  int64_t next_eval = interval > 0 ? interval : setup.train.total_steps;
  double train_return = 0.0;

  auto checkpoint = [&] {
    if (!setup.checkpoint_dir.empty()) {
      agent.save(setup.checkpoint_dir / "agent.ckpt", out.steps);
    }
  };
  auto record = [&] {
    out.curve.push_back(evaluate_point(setup, agent, out.steps, train_return));
    if (setup.on_progress) setup.on_progress(out.curve.back());
    checkpoint();
  };

  for (uint64_t it = 0; out.steps < setup.train.total_steps; ++it) {
    const int remaining = static_cast<int>(
        std::min<int64_t>(setup.train.rollout_steps, setup.train.total_steps - out.steps));
    const auto trajectories = collect_rollouts(agent, setup.world, setup.train_scenes,
                                               env, remaining, setup.train.seed, it);
    double ret = 0.0;
    for (const auto &traj : trajectories) {
      out.steps += static_cast<int64_t>(traj.steps.size());
      for (const auto &s : traj.steps) ret += s.reward;
    }
    train_return = ret / static_cast<double>(trajectories.size());
    auto batch = make_batch(trajectories, setup.train.gamma, setup.train.lambda);
    Rng update_rng = make_rng(setup.train.seed, "update", it);
    out.last_update = ppo_update(agent, std::move(batch), setup.train, adam, update_rng);
    if (out.steps >= next_eval && out.steps < setup.train.total_steps) {
      record();
      while (next_eval <= out.steps) next_eval += interval;
    }
  }
  record();
  return out;
}

std::string curve_csv(const std::vector<CurvePoint> &curve) {
  std::ostringstream out;
  out << "step,mean_return,mean_e_add_mm,detection_rate,distance_mm,train_return\n";
  for (const CurvePoint &p : curve) {
    out << p.step << ',' << format_fixed(p.mean_return) << ','
        << format_fixed(p.mean_e_add) << ',' << format_fixed(p.detection_rate) << ','
        << format_fixed(p.distance) << ',' << format_fixed(p.train_return) << '\n';
  }
  return out.str();
}

}  // namespace apl
