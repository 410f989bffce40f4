#ifndef APL_EXPERIMENT_HPP_
#define APL_EXPERIMENT_HPP_

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "apl/config.hpp"
#include "apl/trainer.hpp"

namespace apl {

World make_world(const GridSpec &grid);

// Instance count drawn from (scene_seed, "instances") within the spec range.
Scene make_scene(const ObjectModel &model, const SceneSpec &spec, uint64_t scene_seed);

struct ExperimentData {
  World world;
  ObjectModel model;
  std::vector<SceneContext> train;
  std::vector<SceneContext> eval;
  std::vector<uint64_t> skipped;  // scene seeds without a detectable object
};

// Builds scene contexts in parallel; degenerate scenes are dropped and listed.
ExperimentData prepare_data(const ExperimentConfig &config, bool with_train = true);

// "learned" resolves to config.checkpoint, then <output_dir>/agent.ckpt.
// Learned policies are named "learned" or "learned-lowest-score" after the
// attention mode stored in the checkpoint. Missing files raise
// kMissingArtifact.
std::unique_ptr<Policy> make_policy(const std::string &name, const ExperimentConfig &config);

// Trains on config.train, writes <output_dir>/agent.ckpt and curve.csv.
TrainOutcome run_train(const ExperimentConfig &config, const ExperimentData &data,
                       std::ostream *progress = nullptr);

// Evaluates the given policies and writes metrics.csv, per_scene.csv and
// (when enabled) episodes.jsonl into the output directory.
std::vector<MetricsRecord> run_eval(const ExperimentConfig &config,
                                    const ExperimentData &data,
                                    const std::vector<std::string> &policies);

// Trains first when "learned" is requested without an existing checkpoint.
std::vector<MetricsRecord> run_experiment(const ExperimentConfig &config,
                                          std::ostream *progress = nullptr);

enum class SweepParam { kAlpha, kHorizon };
SweepParam sweep_param_from_string(std::string_view name);

struct SweepRow {
  double value = 0.0;
  MetricsRecord metrics;
};

// One sub-run per value under <output_dir>/<param>-<value>/; learned
// policies are retrained per value. Writes <output_dir>/sweep-<param>.csv.
std::vector<SweepRow> run_sweep(const ExperimentConfig &config, SweepParam param,
                                const std::vector<double> &values,
                                std::ostream *progress = nullptr);

std::string sweep_csv(SweepParam param, const std::vector<SweepRow> &rows);

}  // namespace apl

#endif  // APL_EXPERIMENT_HPP_
