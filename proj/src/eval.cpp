#include "apl/eval.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>

namespace apl {

Action BaselinePolicy::act(const ActiveEnv &env, Rng &rng) const {
  const BaselineContext ctx{env.world().grid,
                            env.current_view(),
                            env.visited().front(),
                            env.visited(),
                            env.step_index(),
                            env.config().horizon,
                            &env.context().view_entropy};
  return baseline_action(kind_, ctx, rng);
}

Action LearnedPolicy::act(const ActiveEnv &env, Rng & /*rng*/) const {
  return to_action(agent_.evaluate(env.state().observation).mean);
}

namespace {

nlohmann::json vec_json(const Vec3 &v) { return {v.x(), v.y(), v.z()}; }

nlohmann::json step_record(const EpisodeResult &res, const ActiveEnv &env,
                           const EnvState &state, const Action *action,
                           const RewardTerms *reward, const MatchResult &match) {
  const Viewpoint &vp = env.world().grid[state.view];
  nlohmann::json rec = {{"policy", res.policy},
                        {"scene_seed", res.scene_seed},
                        {"seed", res.seed},
                        {"step", state.step},
                        {"view", state.view},
                        {"azimuth", vp.azimuth},
                        {"elevation", vp.elevation},
                        {"position", vec_json(vp.position)},
                        {"distance", env.traveled()},
                        {"final", env.done()}};
  rec["action"] = action ? nlohmann::json{action->azimuth, action->elevation}
                         : nlohmann::json(nullptr);
  if (reward) {
    rec["reward"] = {{"e_add", reward->e_add},
                     {"dist", reward->dist},
                     {"motion", reward->motion},
                     {"total", reward->total}};
  } else {
    rec["reward"] = nullptr;
  }
  rec["attended"] = state.attended ? nlohmann::json(*state.attended)
                                   : nlohmann::json(nullptr);
  rec["attention_weights"] = std::vector<double>(
      state.attention_weights.data(),
      state.attention_weights.data() + state.attention_weights.size());
  rec["estimate"] = estimate_to_json(env.estimate());
  rec["detectable"] = env.context().profile.detectable;
  rec["object_e_add"] = match.error;
  return rec;
}

}  // namespace

EpisodeResult run_episode(const Policy &policy, const World &world,
                          const SceneContext &scene, const EnvConfig &config,
                          uint64_t seed, bool log_steps) {
  EnvConfig cfg = config;
  cfg.attention_mode = policy.attention_mode();
  const uint64_t scene_seed = scene.scene.seed;
  ActiveEnv env(world, scene, cfg, policy.attention(),
                substream(seed, "estimator", scene_seed));
  Rng rng = make_rng(seed, "policy", scene_seed);
  const double penalty = cfg.reward.undetected_penalty;

  EpisodeResult res;
  res.policy = policy.name();
  res.scene_seed = scene_seed;
  res.seed = seed;
  EnvState state = env.reset(0);
  auto match_now = [&] {
    return match_estimate(env.estimate(), scene.scene, scene.profile.detectable, penalty);
  };
  if (log_steps) res.log.push_back(step_record(res, env, state, nullptr, nullptr, match_now()));
  while (!env.done()) {
    const Action a = policy.act(env, rng);
    const StepResult r = env.step(a);
    res.total_return += r.reward.total;
    state = r.state;
    if (log_steps) res.log.push_back(step_record(res, env, state, &a, &r.reward, match_now()));
  }
  const MatchResult m = match_now();
  res.object_errors = m.error;
  const double threshold = kCorrectFraction * scene.scene.model.diameter;
  for (std::size_t g = 0; g < m.error.size(); ++g) {
    if (m.match[g] && m.error[g] < threshold) ++res.correct;
  }
  res.distance = env.traveled();
  res.views = env.visited();
  return res;
}

std::vector<EpisodeResult> run_episodes_serial(const Policy &policy, const World &world,
                                               const std::vector<SceneContext> &scenes,
                                               const EnvConfig &config,
                                               std::span<const uint64_t> seeds,
                                               bool log_steps) {
  std::vector<EpisodeResult> out;
  for (uint64_t seed : seeds) {
    for (const SceneContext &sc : scenes) {
      out.push_back(run_episode(policy, world, sc, config, seed, log_steps));
    }
  }
  return out;
}

std::vector<EpisodeResult> run_episodes_parallel(const Policy &policy, const World &world,
                                                 const std::vector<SceneContext> &scenes,
                                                 const EnvConfig &config,
                                                 std::span<const uint64_t> seeds,
                                                 bool log_steps) {
  const std::size_t n_scenes = scenes.size();
  const int total = static_cast<int>(seeds.size() * n_scenes);
  std::vector<EpisodeResult> out(static_cast<std::size_t>(total));
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
  for (int i = 0; i < total; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    try {
      out[k] = run_episode(policy, world, scenes[k % n_scenes], config,
                           seeds[k / n_scenes], log_steps);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

MetricsRecord aggregate(const std::string &policy, const EnvConfig &config,
                        std::span<const uint64_t> seeds,
                        const std::vector<EpisodeResult> &episodes) {
  MetricsRecord rec;
  rec.policy = policy;
  rec.horizon = config.horizon;
  rec.alpha = config.reward.alpha;
  rec.beta = config.reward.beta;
  rec.seeds.assign(seeds.begin(), seeds.end());
  rec.episodes = static_cast<int>(episodes.size());
  double err_sum = 0.0, dist_sum = 0.0, ret_sum = 0.0;
  int correct = 0;
  for (const EpisodeResult &e : episodes) {
    SceneBreakdown b;
    b.scene_seed = e.scene_seed;
    b.seed = e.seed;
    b.objects = static_cast<int>(e.object_errors.size());
    const double s = std::accumulate(e.object_errors.begin(), e.object_errors.end(), 0.0);
    b.mean_e_add = b.objects > 0 ? s / b.objects : 0.0;
    b.detection_rate = b.objects > 0 ? static_cast<double>(e.correct) / b.objects : 0.0;
    b.distance = e.distance;
    rec.per_scene.push_back(b);
    rec.objects += b.objects;
    err_sum += s;
    correct += e.correct;
    dist_sum += e.distance;
    ret_sum += e.total_return;
  }
  if (rec.objects > 0) {
    rec.mean_e_add = err_sum / rec.objects;
    rec.detection_rate = static_cast<double>(correct) / rec.objects;
  }
  if (rec.episodes > 0) {
    rec.mean_distance = dist_sum / rec.episodes;
    rec.mean_return = ret_sum / rec.episodes;
  }
  return rec;
}

MetricsRecord episode_eval(const Policy &policy, const World &world,
                           const std::vector<SceneContext> &scenes,
                           const EnvConfig &config, std::span<const uint64_t> seeds,
                           std::vector<EpisodeResult> *episodes, bool log_steps) {
  std::vector<EpisodeResult> eps =
      run_episodes_parallel(policy, world, scenes, config, seeds, log_steps);
  MetricsRecord rec = aggregate(policy.name(), config, seeds, eps);
  if (episodes) *episodes = std::move(eps);
  return rec;
}

namespace {

std::string join_seeds(const std::vector<uint64_t> &seeds) {
  std::string s;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(seeds[i]);
  }
  return s;
}

}  // namespace

std::string metrics_csv(const std::vector<MetricsRecord> &records) {
  std::ostringstream out;
  out << "policy,horizon,alpha,beta,seeds,episodes,objects,mean_distance_mm,"
         "mean_e_add_mm,detection_rate,mean_return,averaging\n";
  for (const MetricsRecord &r : records) {
    out << r.policy << ',' << r.horizon << ',' << format_fixed(r.alpha, 4) << ','
        << format_fixed(r.beta, 4) << ',' << join_seeds(r.seeds) << ',' << r.episodes
        << ',' << r.objects << ',' << format_fixed(r.mean_distance) << ','
        << format_fixed(r.mean_e_add) << ',' << format_fixed(r.detection_rate) << ','
        << format_fixed(r.mean_return) << ",object-weighted\n";
  }
  return out.str();
}

std::string per_scene_csv(const std::vector<MetricsRecord> &records) {
  std::ostringstream out;
  out << "policy,horizon,alpha,scene_seed,seed,objects,mean_e_add_mm,"
         "detection_rate,distance_mm\n";
  for (const MetricsRecord &r : records) {
    for (const SceneBreakdown &b : r.per_scene) {
      out << r.policy << ',' << r.horizon << ',' << format_fixed(r.alpha, 4) << ','
          << b.scene_seed << ',' << b.seed << ',' << b.objects << ','
          << format_fixed(b.mean_e_add) << ',' << format_fixed(b.detection_rate) << ','
          << format_fixed(b.distance) << '\n';
    }
  }
  return out.str();
}

std::string episode_log_jsonl(const std::vector<EpisodeResult> &episodes) {
  std::string out;
  for (const EpisodeResult &e : episodes) {
    for (const nlohmann::json &rec : e.log) {
      out += rec.dump();
      out += '\n';
    }
  }
  return out;
}

std::vector<ScoreSample> score_error_samples(const World &world, const ObjectModel &model,
                                             const NoiseModel &noise, int min_instances,
                                             int max_instances, std::size_t count,
                                             uint64_t seed, double epsilon) {
  if (min_instances < 1 || max_instances < min_instances) {
    throw Error(ErrorKind::kInvalidArgument, "bad instance range");
  }
  noise.validate();
  const NeighborIndex index(model.cloud);
  std::vector<ScoreSample> out;
  Rng rng = make_rng(seed, "score-dump");
  std::uniform_int_distribution<int> n_dist(min_instances, max_instances);
  std::uniform_int_distribution<std::size_t> view_dist(0, world.grid.size() - 1);
  std::uniform_real_distribution<double> log_scale(std::log(0.25), std::log(8.0));
  for (uint64_t i = 0; out.size() < count; ++i) {
    if (i > 100000) throw Error(ErrorKind::kCapacityExceeded, "score dump made no progress");
    const Scene scene = generate_scene(model, n_dist(rng), default_bin_extent(model),
                                       substream(seed, "scene", i));
    const std::size_t view = view_dist(rng);
    const double scale = std::exp(log_scale(rng));
    NoiseModel nm = noise;
    nm.sigma_t_base *= scale;
    nm.sigma_r_base *= scale;
    const Rendering rendering = render(scene, world.grid, view, world.intrinsics);
    Rng est_rng = make_rng(seed, "score-estimator", i);
    const std::vector<Hypothesis> hyps =
        estimate(rendering, scene, world.grid, view, nm, est_rng);
    const Pose6D &world_from_cam = world.grid[view].world_from_camera;
    for (const Hypothesis &h : hyps) {
      if (out.size() >= count) break;
      ScoreSample s;
      s.score = verification_score(h, rendering, index, epsilon);
      s.e_add = e_add(pose_compose(world_from_cam, h.pose),
                      scene.gt_poses[h.object_gt_index], model);
      s.noise_scale = scale;
      out.push_back(s);
    }
  }
  return out;
}

std::string score_dump_csv(const std::vector<ScoreSample> &samples) {
  std::ostringstream out;
  out << "score,e_add_mm,noise_scale\n";
  for (const ScoreSample &s : samples) {
    out << format_fixed(s.score, 12) << ',' << format_fixed(s.e_add, 9) << ','
        << format_fixed(s.noise_scale, 6) << '\n';
  }
  return out.str();
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> rank(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "spearman needs two equal series of length >= 2");
  }
  const std::vector<double> rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace apl
