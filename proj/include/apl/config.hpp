#ifndef APL_CONFIG_HPP_
#define APL_CONFIG_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "apl/ppo.hpp"

namespace apl {

struct SceneSpec {
  ModelKind model = ModelKind::kCup;
  int points = 1000;
  uint64_t model_seed = 7;
  int min_instances = 15;
  int max_instances = 20;
};

struct GridSpec {
  double radius = 800.0;
  int azimuth_levels = 20;
  int elevation_levels = 5;
};

struct ExperimentConfig {
  uint64_t seed = 1;
  SceneSpec scene;
  GridSpec grid;
  EnvConfig env;
  TrainConfig train;
  AttentionMode train_attention = AttentionMode::kLearned;
  std::vector<uint64_t> train_scene_seeds;
  std::vector<uint64_t> eval_scene_seeds;
  std::vector<uint64_t> eval_seeds{1, 2, 3};
  std::vector<std::string> policies{"random", "unidirectional", "max-distance", "entropy"};
  std::filesystem::path checkpoint;  // used by the "learned" policy
  std::filesystem::path output_dir = "runs/default";
  bool log_episodes = true;
  int score_dump_count = 600;

  // Throws kConfigError.
  void validate() const;
};

// Policy entries other than baseline names and "learned" are checkpoint
// paths; they must contain a '/' or end in ".ckpt".
bool looks_like_checkpoint(std::string_view policy);

// Default cup configuration: 20 train / 10 eval scenes, instance range per
// model kind.
ExperimentConfig default_config(ModelKind model = ModelKind::kCup);

// Malformed input, unknown keys, wrong types and invalid values all raise
// kConfigError naming the source and line.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path &path);

std::string config_to_toml(const ExperimentConfig &config);

}  // namespace apl

#endif  // APL_CONFIG_HPP_
