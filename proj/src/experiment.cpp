#include "apl/experiment.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>
#include <ostream>
#include <sstream>

namespace apl {

World make_world(const GridSpec &grid) {
  World w;
  w.grid = build_grid(grid.radius, grid.azimuth_levels, grid.elevation_levels);
  return w;
}

Scene make_scene(const ObjectModel &model, const SceneSpec &spec, uint64_t scene_seed) {
  Rng rng = make_rng(scene_seed, "instances");
  const int n = std::uniform_int_distribution<int>(spec.min_instances, spec.max_instances)(rng);
  return generate_scene(model, n, default_bin_extent(model), scene_seed);
}

namespace {

std::vector<SceneContext> build_contexts(const ExperimentData &data, const SceneSpec &spec,
                                         const std::vector<uint64_t> &seeds,
                                         std::vector<uint64_t> &skipped) {
  const int n = static_cast<int>(seeds.size());
  std::vector<std::optional<SceneContext>> slots(seeds.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (int i = 0; i < n; ++i) {
    try {
      slots[i].emplace(make_scene(data.model, spec, seeds[i]), data.world);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<SceneContext> out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]->profile.detectable.empty()) {
      skipped.push_back(seeds[i]);
    } else {
      out.push_back(std::move(*slots[i]));
    }
  }
  return out;
}

std::string value_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

ExperimentData prepare_data(const ExperimentConfig &config, bool with_train) {
  config.validate();
  ExperimentData data{make_world(config.grid),
                      make_model(config.scene.model, config.scene.points,
                                 config.scene.model_seed),
                      {},
                      {},
                      {}};
  if (with_train) {
    data.train = build_contexts(data, config.scene, config.train_scene_seeds, data.skipped);
  }
  data.eval = build_contexts(data, config.scene, config.eval_scene_seeds, data.skipped);
  if (data.eval.empty()) {
    throw Error(ErrorKind::kDegenerateScene, "no evaluation scene has a detectable object");
  }
  return data;
}

std::unique_ptr<Policy> make_policy(const std::string &name, const ExperimentConfig &config) {
  std::filesystem::path path;
  if (name == "learned") {
    path = config.checkpoint.empty() ? config.output_dir / "agent.ckpt" : config.checkpoint;
  } else if (looks_like_checkpoint(name)) {
    path = name;
  } else {
    return std::make_unique<BaselinePolicy>(baseline_kind_from_string(name));
  }
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::kMissingArtifact, "checkpoint not found: " + path.string());
  }
  Agent agent = Agent::load(path);
  if (agent.horizon() != config.env.horizon) {
    throw Error(ErrorKind::kInvalidArgument,
                "checkpoint " + path.string() + " was trained for horizon " +
                    std::to_string(agent.horizon()) + ", config has " +
                    std::to_string(config.env.horizon));
  }
  std::string label = "learned";
  if (agent.attention_mode() == AttentionMode::kLowestScore) label += "-lowest-score";
  return std::make_unique<LearnedPolicy>(std::move(agent), label);
}

TrainOutcome run_train(const ExperimentConfig &config, const ExperimentData &data,
                       std::ostream *progress) {
  if (data.train.empty()) throw Error(ErrorKind::kInvalidArgument, "no training scenes");
  TrainSetup setup{data.world, data.train, data.eval, config.env, config.train,
                   config.train_attention, config.eval_seeds, config.output_dir, {}};
  if (progress) {
    setup.on_progress = [progress](const CurvePoint &p) {
      *progress << "step " << p.step << "  return " << format_fixed(p.mean_return, 4)
                << "  e_add " << format_fixed(p.mean_e_add, 3) << " mm  detection "
                << format_fixed(p.detection_rate, 4) << "  distance "
                << format_fixed(p.distance, 1) << " mm" << std::endl;
    };
  }
  TrainOutcome out = train(setup);
  write_text_atomic(config.output_dir / "curve.csv", curve_csv(out.curve));
  write_text_atomic(config.output_dir / "config.toml", config_to_toml(config));
  return out;
}

std::vector<MetricsRecord> run_eval(const ExperimentConfig &config,
                                    const ExperimentData &data,
                                    const std::vector<std::string> &policies) {
  std::vector<MetricsRecord> records;
  std::vector<EpisodeResult> all_episodes;
  for (const std::string &name : policies) {
    const auto policy = make_policy(name, config);
    std::vector<EpisodeResult> eps;
    records.push_back(episode_eval(*policy, data.world, data.eval, config.env,
                                   config.eval_seeds, &eps, config.log_episodes));
    for (auto &e : eps) all_episodes.push_back(std::move(e));
  }
  write_text_atomic(config.output_dir / "metrics.csv", metrics_csv(records));
  write_text_atomic(config.output_dir / "per_scene.csv", per_scene_csv(records));
  if (config.log_episodes) {
    write_text_atomic(config.output_dir / "episodes.jsonl", episode_log_jsonl(all_episodes));
  }
  return records;
}

std::vector<MetricsRecord> run_experiment(const ExperimentConfig &config,
                                          std::ostream *progress) {
  bool need_train = false;
  for (const std::string &p : config.policies) {
    if (p == "learned" && config.checkpoint.empty() &&
        !std::filesystem::exists(config.output_dir / "agent.ckpt")) {
      need_train = true;
    }
  }
  const ExperimentData data = prepare_data(config, need_train);
  if (need_train) run_train(config, data, progress);
  return run_eval(config, data, config.policies);
}

SweepParam sweep_param_from_string(std::string_view name) {
  if (name == "alpha") return SweepParam::kAlpha;
  if (name == "T" || name == "horizon") return SweepParam::kHorizon;
  throw Error(ErrorKind::kInvalidArgument,
              "unknown sweep parameter '" + std::string(name) + "' (alpha or T)");
}

std::vector<SweepRow> run_sweep(const ExperimentConfig &config, SweepParam param,
                                const std::vector<double> &values, std::ostream *progress) {
  const std::string pname = param == SweepParam::kAlpha ? "alpha" : "T";
  std::vector<SweepRow> rows;
  bool learned = false;
  for (const std::string &p : config.policies) learned = learned || p == "learned";
  const ExperimentData data = prepare_data(config, learned);
  for (double v : values) {
    ExperimentConfig c = config;
    if (param == SweepParam::kAlpha) {
      c.env.reward.alpha = v;
    } else {
      if (v < 0 || v != std::floor(v)) {
        throw Error(ErrorKind::kInvalidArgument, "T values must be non-negative integers");
      }
      c.env.horizon = static_cast<int>(v);
    }
    c.output_dir = config.output_dir / (pname + "-" + value_label(v));
    c.checkpoint.clear();
    c.validate();
    std::vector<std::string> policies;
    for (const std::string &p : c.policies) {
      if (p == "learned" && c.env.horizon == 0) continue;  // nothing to learn
      policies.push_back(p);
    }
    if (progress) *progress << pname << " = " << value_label(v) << std::endl;
    if (learned && c.env.horizon > 0 &&
        !std::filesystem::exists(c.output_dir / "agent.ckpt")) {
      run_train(c, data, progress);
    }
    for (MetricsRecord &m : run_eval(c, data, policies)) rows.push_back({v, std::move(m)});
  }
  write_text_atomic(config.output_dir / ("sweep-" + pname + ".csv"), sweep_csv(param, rows));
  return rows;
}

std::string sweep_csv(SweepParam param, const std::vector<SweepRow> &rows) {
  std::vector<MetricsRecord> records;
  for (const SweepRow &r : rows) records.push_back(r.metrics);
  const std::string body = metrics_csv(records);
  std::istringstream in(body);
  std::ostringstream out;
  std::string line;
  std::getline(in, line);
  out << "param,value," << line << '\n';
  const std::string pname = param == SweepParam::kAlpha ? "alpha" : "T";
  for (const SweepRow &r : rows) {
    std::getline(in, line);
    out << pname << ',' << value_label(r.value) << ',' << line << '\n';
  }
  return out.str();
}

}  // namespace apl
