// Command-line entry point: train, eval, sweep, run, score-dump, render-debug.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "apl/experiment.hpp"

namespace {

int exit_code(apl::ErrorKind kind) {
  switch (kind) {
    case apl::ErrorKind::kConfigError: return 2;
    case apl::ErrorKind::kMissingArtifact: return 3;
    case apl::ErrorKind::kInvalidArgument: return 4;
    case apl::ErrorKind::kTrainingDiverged: return 5;
    default: return 1;
  }
}

std::vector<double> parse_values(const std::string &text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != item.size()) {
      throw apl::Error(apl::ErrorKind::kInvalidArgument, "bad value '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw apl::Error(apl::ErrorKind::kInvalidArgument, "no sweep values");
  return out;
}

apl::ExperimentConfig load(const std::string &path) {
  return path.empty() ? apl::default_config() : apl::load_config(path);
}

void print_records(const std::vector<apl::MetricsRecord> &records) {
  for (const auto &r : records) {
    std::cout << r.policy << ": e_add " << apl::format_fixed(r.mean_e_add, 3)
              << " mm, detection " << apl::format_fixed(r.detection_rate, 4)
              << ", distance " << apl::format_fixed(r.mean_distance, 1) << " mm\n";
  }
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Active multi-object pose estimation lab"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  int64_t steps = -1;

  auto *train = app.add_subcommand("train", "Train the attention/policy/value networks");
  train->add_option("--config", config_path, "TOML experiment config")->required();
  CLI::Option *train_seed = train->add_option("--seed", seed, "Root seed (overrides the config)");
  train->add_option("--steps", steps, "Environment steps (overrides the config)");

  std::vector<std::string> policies;
  int episodes = 0;
  auto *eval = app.add_subcommand("eval", "Evaluate policies on the held-out scenes");
  eval->add_option("--config", config_path, "TOML experiment config")->required();
  eval->add_option("--policy", policies, "Baseline name, 'learned' or a checkpoint path")
      ->required();
  eval->add_option("--episodes", episodes, "Episodes per scene (evaluation seeds 1..N)");
  CLI::Option *eval_seed = eval->add_option("--seed", seed, "Root seed (overrides the config)");

  std::string param, values;
  auto *sweep = app.add_subcommand("sweep", "Sweep alpha or T and evaluate each value");
  sweep->add_option("--config", config_path, "TOML experiment config")->required();
  sweep->add_option("--param", param, "alpha or T")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();

  auto *run = app.add_subcommand("run", "Train if needed, then evaluate the policy list");
  run->add_option("--config", config_path, "TOML experiment config")->required();

  std::string out_path;
  int count = 0;
  auto *dump = app.add_subcommand("score-dump", "Dump (verification score, e_ADD) pairs");
  dump->add_option("--config", config_path, "TOML experiment config");
  dump->add_option("--count", count, "Number of hypotheses");
  dump->add_option("--out", out_path, "Output CSV (default <output_dir>/scores.csv)");

  uint64_t scene_seed = 0;
  std::size_t view = 0;
  auto *debug = app.add_subcommand("render-debug", "Render one view of one scene");
  debug->add_option("--config", config_path, "TOML experiment config");
  debug->add_option("--scene-seed", scene_seed, "Scene seed")->required();
  debug->add_option("--view", view, "View index")->required();
  debug->add_option("--out", out_path, "Output directory (default <output_dir>/render-debug)");

  CLI11_PARSE(app, argc, argv);
  seed_set = train_seed->count() > 0 || eval_seed->count() > 0;

  try {
    if (*train) {
      apl::ExperimentConfig c = load(config_path);
      if (seed_set) c.seed = c.train.seed = seed;
      if (steps >= 0) c.train.total_steps = steps;
      const apl::ExperimentData data = apl::prepare_data(c, true);
      const apl::TrainOutcome out = apl::run_train(c, data, &std::cout);
      std::cout << "wrote " << (c.output_dir / "agent.ckpt").string() << " after "
                << out.steps << " steps\n";
    } else if (*eval) {
      apl::ExperimentConfig c = load(config_path);
      if (seed_set) c.seed = seed;
      if (episodes > 0) {
        c.eval_seeds.clear();
        for (int i = 1; i <= episodes; ++i) c.eval_seeds.push_back(static_cast<uint64_t>(i));
      }
      const apl::ExperimentData data = apl::prepare_data(c, false);
      print_records(apl::run_eval(c, data, policies));
    } else if (*sweep) {
      const apl::ExperimentConfig c = load(config_path);
      const auto rows = apl::run_sweep(c, apl::sweep_param_from_string(param),
                                       parse_values(values), &std::cout);
      std::cout << apl::sweep_csv(apl::sweep_param_from_string(param), rows);
    } else if (*run) {
      print_records(apl::run_experiment(load(config_path), &std::cout));
    } else if (*dump) {
      const apl::ExperimentConfig c = load(config_path);
      const apl::World world = apl::make_world(c.grid);
      const apl::ObjectModel model =
          apl::make_model(c.scene.model, c.scene.points, c.scene.model_seed);
      const auto samples = apl::score_error_samples(
          world, model, c.env.noise, c.scene.min_instances, c.scene.max_instances,
          static_cast<std::size_t>(count > 0 ? count : c.score_dump_count), c.seed,
          c.env.epsilon);
      const std::filesystem::path out =
          out_path.empty() ? c.output_dir / "scores.csv" : std::filesystem::path(out_path);
      apl::write_text_atomic(out, apl::score_dump_csv(samples));
      std::vector<double> s, e;
      for (const auto &x : samples) {
        s.push_back(x.score);
        e.push_back(x.e_add);
      }
      std::cout << "wrote " << samples.size() << " samples to " << out.string()
                << ", spearman " << apl::format_fixed(apl::spearman(s, e), 6) << '\n';
    } else if (*debug) {
      const apl::ExperimentConfig c = load(config_path);
      const apl::World world = apl::make_world(c.grid);
      const apl::ObjectModel model =
          apl::make_model(c.scene.model, c.scene.points, c.scene.model_seed);
      const apl::Scene scene = apl::make_scene(model, c.scene, scene_seed);
      const apl::Rendering r = apl::render(scene, world.grid, view, world.intrinsics);
      const std::filesystem::path dir =
          out_path.empty() ? c.output_dir / "render-debug" : std::filesystem::path(out_path);
      std::filesystem::create_directories(dir);
      apl::write_depth_pgm(r, dir / "depth.pgm");
      apl::write_text_atomic(dir / "masks.json", apl::masks_summary(r).dump(2) + "\n");
      apl::save_scene(scene, dir / "scene.json");
      std::cout << "scene " << scene_seed << " (" << scene.size() << " objects), view "
                << view << ": wrote " << dir.string() << '\n';
    }
  } catch (const apl::Error &e) {
    std::cerr << "apl: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception &e) {
    std::cerr << "apl: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
