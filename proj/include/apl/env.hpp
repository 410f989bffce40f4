#ifndef APL_ENV_HPP_
#define APL_ENV_HPP_

#include <optional>
#include <string>
#include <vector>

#include "apl/attention.hpp"
#include "apl/metrics.hpp"

namespace apl {

struct RewardConfig {
  double alpha = 0.1;
  double beta = 0.9;
  double undetected_penalty = kUndetectedPenalty;  // mm

  void validate() const;
};

// All components in decimeters; improvement and approach are positive.
struct RewardTerms {
  double e_add = 0.0;
  double dist = 0.0;
  double motion = 0.0;
  double total = 0.0;
};

inline constexpr double kMmPerRewardUnit = 100.0;

RewardTerms reward_terms(double prev_error, double next_error,
                         const Vec3 &object_position, const Vec3 &v_t,
                         const Vec3 &v_next, const RewardConfig &config);

// Used when nothing was attended at time t.
RewardTerms motion_only_reward(const Vec3 &v_t, const Vec3 &v_next,
                               const RewardConfig &config);

struct Action {
  double azimuth = 0.0;    // rad
  double elevation = 0.0;  // rad
};

struct World {
  ViewGrid grid = build_grid(800.0, 20, 5);
  Intrinsics intrinsics;
};

// Per-scene data shared read-only between environments.
struct SceneContext {
  Scene scene;
  VisibilityProfile profile;
  NeighborIndex model_index;
  std::vector<double> view_entropy;

  SceneContext(Scene scene, const World &world);
};

struct EnvConfig {
  int horizon = 5;
  RewardConfig reward;
  NoiseModel noise;
  double epsilon = kDefaultEpsilon;
  double cluster_factor = kDefaultClusterFactor;
  AttentionMode attention_mode = AttentionMode::kLearned;

  int state_dim() const { return 15 + 3 * horizon; }
};

// What a policy may see; carries no ground truth.
struct Observation {
  std::vector<ObjectFeature> features;
  Vec3 position = Vec3::Zero();  // camera position / radius, relative to center
  std::vector<double> history;   // 3 * horizon
};

struct EnvState {
  Observation observation;
  nn::Vector vector;  // concat(o, position, history)
  std::size_t view = 0;
  int step = 0;
  std::optional<std::size_t> attended;  // index into the current estimate
  nn::Vector attention_weights;
};

struct StepResult {
  EnvState state;
  RewardTerms reward;
  bool done = false;
  std::size_t view = 0;
};

// Builds concat(o, position, history); o is zero when nothing is detected.
nn::Vector assemble_state(const nn::Vector &o, const Observation &obs);

class ActiveEnv {
 public:
  // `attention` may be null, in which case the attended object is the one
  // with the lowest verification score and o carries no embedding.
  ActiveEnv(const World &world, const SceneContext &context, EnvConfig config,
            const AttentionParams *attention, uint64_t estimator_seed);

  // Throws kDegenerateScene when the scene has no detectable object.
  EnvState reset(std::size_t start_view = 0);
  StepResult step(const Action &action);

  const EnvConfig &config() const { return config_; }
  const World &world() const { return world_; }
  const SceneContext &context() const { return context_; }
  const SceneEstimate &estimate() const { return estimate_; }
  const HypothesisPool &pool() const { return pool_; }
  const std::vector<std::size_t> &visited() const { return visited_; }
  std::size_t current_view() const { return view_; }
  int step_index() const { return t_; }
  bool done() const { return t_ >= config_.horizon; }
  double traveled() const { return traveled_; }  // geodesic, mm
  const EnvState &state() const { return state_; }

 private:
  void observe(std::size_t view);
  void refresh_state();

  const World &world_;
  const SceneContext &context_;
  EnvConfig config_;
  const AttentionParams *attention_;
  Rng rng_;

  HypothesisPool pool_;
  SceneEstimate estimate_;
  std::size_t view_ = 0;
  int t_ = 0;
  bool started_ = false;
  std::vector<std::size_t> visited_;
  std::vector<double> history_;
  double traveled_ = 0.0;
  EnvState state_;
};

enum class BaselineKind { kRandom, kUnidirectional, kMaxDistance, kEntropy, kSweep };

std::string_view to_string(BaselineKind kind);
BaselineKind baseline_kind_from_string(std::string_view name);

inline constexpr double kRandomSigmaAzimuth = 0.6;    // rad
inline constexpr double kRandomSigmaElevation = 0.3;  // rad

struct BaselineContext {
  const ViewGrid &grid;
  std::size_t current_view;
  std::size_t start_view;
  const std::vector<std::size_t> &visited;
  int step;  // index of the step about to be taken
  int horizon;
  const std::vector<double> *view_entropy = nullptr;
};

Action baseline_action(BaselineKind kind, const BaselineContext &context,
                       Rng &rng);

// Per-view Shannon entropy of the visible-mask area distribution.
std::vector<double> view_entropy_table(const Scene &scene, const ViewGrid &grid,
                                       const Intrinsics &intrinsics);

}  // namespace apl

#endif  // APL_ENV_HPP_
