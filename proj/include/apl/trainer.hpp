#ifndef APL_TRAINER_HPP_
#define APL_TRAINER_HPP_

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "apl/eval.hpp"
#include "apl/ppo.hpp"

namespace apl {

struct CurvePoint {
  int64_t step = 0;
  double mean_return = 0.0;  // held-out evaluation episodes
  double mean_e_add = 0.0;
  double detection_rate = 0.0;
  double distance = 0.0;
  double train_return = 0.0;  // mean over the last rollout batch
};

struct TrainSetup {
  const World &world;
  const std::vector<SceneContext> &train_scenes;
  const std::vector<SceneContext> &eval_scenes;
  EnvConfig env;
  TrainConfig train;
  AttentionMode attention_mode = AttentionMode::kLearned;
  std::vector<uint64_t> eval_seeds{1};
  std::filesystem::path checkpoint_dir;  // empty: no checkpoints
  std::function<void(const CurvePoint &)> on_progress;
};

struct TrainOutcome {
  Agent agent;
  std::vector<CurvePoint> curve;
  LossStats last_update;
  int64_t steps = 0;
};

// Alternates collect_rollouts and ppo_update until train.total_steps env
// steps, evaluating on the held-out scenes every eval_interval steps and at
// the end. Writes <checkpoint_dir>/agent.ckpt after every evaluation.
TrainOutcome train(const TrainSetup &setup);

std::string curve_csv(const std::vector<CurvePoint> &curve);

}  // namespace apl

#endif  // APL_TRAINER_HPP_
