#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "apl/config.hpp"

using namespace apl;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_config(text, "cfg.toml");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kConfigError);
    return e.what();
  }
  FAIL("expected config-error");
  return {};
}

bool contains(const std::string &s, std::string_view part) {
  return s.find(part) != std::string::npos;
}

}  // namespace

TEST_CASE("empty config equals the defaults") {
  const ExperimentConfig c = parse_config("");
  CHECK(config_to_toml(c) == config_to_toml(default_config()));
  CHECK(c.env.horizon == 5);
  CHECK(c.env.epsilon == 5.0);
  CHECK(c.train.gamma == 0.995);
  CHECK(c.train.learning_rate == 1e-4);
  CHECK(c.train.minibatch == 128);
  CHECK(c.grid.azimuth_levels * c.grid.elevation_levels == 100);
  CHECK(c.train_scene_seeds.size() == 20);
  CHECK(c.eval_scene_seeds.size() == 10);
  for (uint64_t s : c.train_scene_seeds) {
    CHECK(std::find(c.eval_scene_seeds.begin(), c.eval_scene_seeds.end(), s) == c.eval_scene_seeds.end());
  }
  CHECK(c.scene.min_instances == 15);
  CHECK(c.scene.max_instances == 20);
  const ExperimentConfig bunny = parse_config("[scene]\nmodel = \"bunny\"\n");
  CHECK(bunny.scene.min_instances == 7);
  CHECK(bunny.scene.max_instances == 12);
}

TEST_CASE("sections are read") {
  const ExperimentConfig c = parse_config(R"(
seed = 42
output_dir = "runs/x"
[scene]
instances = [3, 4]
train_seeds = [5, 6]
eval_seeds = [7]
[grid]
azimuth_levels = 8
elevation_levels = 2
[estimator]
sigma_t = 3.5
detect_v0 = 0.2
[fusion]
cluster_factor = 0.5
[env]
horizon = 10
alpha = 0.5
beta = 0.8
[train]
steps = 1000
attention = "lowest-score"
[eval]
seeds = [9]
policies = ["random", "runs/a/agent.ckpt"]
)");
  CHECK(c.seed == 42);
  CHECK(c.train.seed == 42);
  CHECK(c.output_dir == "runs/x");
  CHECK(c.scene.min_instances == 3);
  CHECK(c.train_scene_seeds == std::vector<uint64_t>{5, 6});
  CHECK(c.eval_scene_seeds == std::vector<uint64_t>{7});
  CHECK(c.grid.azimuth_levels == 8);
  CHECK(c.env.noise.sigma_t_base == 3.5);
  CHECK(c.env.noise.detect_v0 == 0.2);
  CHECK(c.env.cluster_factor == 0.5);
  CHECK(c.env.horizon == 10);
  CHECK(c.env.reward.alpha == 0.5);
  CHECK(c.env.reward.beta == 0.8);
  CHECK(c.train.total_steps == 1000);
  CHECK(c.train_attention == AttentionMode::kLowestScore);
  CHECK(c.eval_seeds == std::vector<uint64_t>{9});
  CHECK(c.policies.size() == 2);

  // Round trip through the writer.
  const ExperimentConfig again = parse_config(config_to_toml(c));
  CHECK(config_to_toml(again) == config_to_toml(c));
  CHECK(again.env.reward.beta == c.env.reward.beta);
  CHECK(again.env.noise.sigma_t_base == c.env.noise.sigma_t_base);
}

TEST_CASE("errors name the file and line") {
  CHECK(contains(error_of("[env]\nalpha = \"high\"\n"), "cfg.toml:2"));
  CHECK(contains(error_of("[env]\n\nhorizon = 1.5\n"), "cfg.toml:3"));
  CHECK(contains(error_of("seed = 1\n[train]\nsteps = \n"), "cfg.toml:3"));
  const std::string unknown = error_of("[env]\nhorizon = 5\nalhpa = 0.3\n");
  CHECK(contains(unknown, "cfg.toml:3"));
  CHECK(contains(unknown, "env.alhpa"));
  CHECK(contains(error_of("[noise]\nsigma_t = 1.0\n"), "noise"));
  CHECK(contains(error_of("[scene]\ninstances = [3]\n"), "cfg.toml:2"));
}

TEST_CASE("invalid values") {
  CHECK(contains(error_of("[env]\nalpha = 1.5\n"), "alpha"));
  CHECK(contains(error_of("[scene]\ntrain_seeds = [1, 2]\neval_seeds = [2]\n"), "both"));
  CHECK(contains(error_of("[eval]\npolicies = [\"greedy\"]\n"), "greedy"));
  error_of("[train]\ngamma = 1.2\n");
  error_of("[train]\nclip = 0.0\n");
  error_of("[estimator]\ndetect_v0 = 1.0\n");
  error_of("[estimator]\ndepth_axis_gain = 0.5\n");
  error_of("[grid]\nazimuth_levels = 0\n");
  error_of("[env]\nhorizon = -1\n");
  error_of("[scene]\ninstances = [5, 2]\n");
  error_of("[eval]\nseeds = []\n");
}

TEST_CASE("load_config") {
  const auto path = std::filesystem::temp_directory_path() / "apl_test_config.toml";
  {
    std::ofstream out(path);
    out << "seed = 3\n[env]\nhorizon = 7\n";
  }
  const ExperimentConfig c = load_config(path);
  CHECK(c.seed == 3);
  CHECK(c.env.horizon == 7);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(path), Error);
}

TEST_CASE("checkpoint-like policy names") {
  CHECK(looks_like_checkpoint("runs/a/agent.ckpt"));
  CHECK(looks_like_checkpoint("agent.ckpt"));
  CHECK_FALSE(looks_like_checkpoint("random"));
  CHECK_FALSE(looks_like_checkpoint("learned"));
}
