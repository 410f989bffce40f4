#ifndef APL_EVAL_HPP_
#define APL_EVAL_HPP_

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "apl/agent.hpp"

namespace apl {

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // Attention the environment runs with; null means lowest-score selection.
  virtual const AttentionParams *attention() const { return nullptr; }
  virtual AttentionMode attention_mode() const { return AttentionMode::kLowestScore; }
  virtual Action act(const ActiveEnv &env, Rng &rng) const = 0;
};

class BaselinePolicy : public Policy {
 public:
  explicit BaselinePolicy(BaselineKind kind) : kind_{kind} {}
  std::string name() const override { return std::string(to_string(kind_)); }
  Action act(const ActiveEnv &env, Rng &rng) const override;

 private:
  BaselineKind kind_;
};

// Deterministic: acts with the Gaussian mean.
class LearnedPolicy : public Policy {
 public:
  LearnedPolicy(Agent agent, std::string name)
      : agent_{std::move(agent)}, name_{std::move(name)} {}
  std::string name() const override { return name_; }
  const AttentionParams *attention() const override { return &agent_.attention(); }
  AttentionMode attention_mode() const override { return agent_.attention_mode(); }
  Action act(const ActiveEnv &env, Rng &rng) const override;
  const Agent &agent() const { return agent_; }

 private:
  Agent agent_;
  std::string name_;
};

struct EpisodeResult {
  std::string policy;
  uint64_t scene_seed = 0;
  uint64_t seed = 0;
  std::vector<double> object_errors;  // per detectable object, mm, penalty if missed
  int correct = 0;
  double distance = 0.0;  // geodesic, mm
  double total_return = 0.0;
  std::vector<std::size_t> views;
  std::vector<nlohmann::json> log;  // one record per step when requested
};

struct SceneBreakdown {
  uint64_t scene_seed = 0;
  uint64_t seed = 0;
  int objects = 0;
  double mean_e_add = 0.0;
  double detection_rate = 0.0;
  double distance = 0.0;
};

struct MetricsRecord {
  std::string policy;
  int horizon = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<uint64_t> seeds;
  int episodes = 0;
  int objects = 0;
  double mean_distance = 0.0;  // mm per episode
  double mean_e_add = 0.0;     // mm, object-weighted
  double detection_rate = 0.0; // object-weighted
  double mean_return = 0.0;
  std::vector<SceneBreakdown> per_scene;
};

// One episode per (seed, scene), starting at view 0. The estimator stream is
// (seed, "estimator", scene seed) and the policy stream (seed, "policy",
// scene seed), so all policies see the same noise draws.
EpisodeResult run_episode(const Policy &policy, const World &world,
                          const SceneContext &scene, const EnvConfig &config,
                          uint64_t seed, bool log_steps);

std::vector<EpisodeResult> run_episodes_serial(const Policy &policy, const World &world,
                                               const std::vector<SceneContext> &scenes,
                                               const EnvConfig &config,
                                               std::span<const uint64_t> seeds,
                                               bool log_steps);
std::vector<EpisodeResult> run_episodes_parallel(const Policy &policy, const World &world,
                                                 const std::vector<SceneContext> &scenes,
                                                 const EnvConfig &config,
                                                 std::span<const uint64_t> seeds,
                                                 bool log_steps);

MetricsRecord aggregate(const std::string &policy, const EnvConfig &config,
                        std::span<const uint64_t> seeds,
                        const std::vector<EpisodeResult> &episodes);

MetricsRecord episode_eval(const Policy &policy, const World &world,
                           const std::vector<SceneContext> &scenes,
                           const EnvConfig &config, std::span<const uint64_t> seeds,
                           std::vector<EpisodeResult> *episodes = nullptr,
                           bool log_steps = false);

std::string metrics_csv(const std::vector<MetricsRecord> &records);
std::string per_scene_csv(const std::vector<MetricsRecord> &records);
std::string episode_log_jsonl(const std::vector<EpisodeResult> &episodes);

struct ScoreSample {
  double score = 0.0;
  double e_add = 0.0;  // mm
  double noise_scale = 1.0;
};

// Hypotheses from random views of random scenes with the noise scale drawn
// log-uniformly in [0.25, 8] around `noise`.
std::vector<ScoreSample> score_error_samples(const World &world, const ObjectModel &model,
                                             const NoiseModel &noise, int min_instances,
                                             int max_instances, std::size_t count,
                                             uint64_t seed, double epsilon = kDefaultEpsilon);
std::string score_dump_csv(const std::vector<ScoreSample> &samples);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace apl

#endif  // APL_EVAL_HPP_
