#include "apl/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "tomlplusplus/toml.hpp"

namespace apl {

namespace {

std::vector<uint64_t> seed_range(uint64_t first, int count) {
  std::vector<uint64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(first + static_cast<uint64_t>(i));
  return out;
}

// Reads one TOML table, remembering which keys were consumed so leftovers
// can be reported as unknown.
class TableReader {
 public:
  TableReader(const toml::table *table, std::string source, std::string prefix)
      : table_{table}, source_{std::move(source)}, prefix_{std::move(prefix)} {}

  [[noreturn]] void fail(const toml::node *node, const std::string &msg) const {
    std::ostringstream out;
    out << source_;
    if (node) out << ':' << node->source().begin.line;
    out << ": " << msg;
    throw Error(ErrorKind::kConfigError, out.str());
  }

  std::string key_name(std::string_view key) const {
    return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key);
  }

  const toml::node *find(std::string_view key) {
    used_.insert(std::string(key));
    return table_ ? table_->get(key) : nullptr;
  }

  bool has(std::string_view key) const { return table_ && table_->contains(key); }

  void get(std::string_view key, double &out) {
    if (const toml::node *n = find(key)) {
      if (auto v = n->value<double>()) {
        out = *v;
      } else {
        fail(n, "'" + key_name(key) + "' must be a number");
      }
    }
  }

  void get(std::string_view key, int &out) {
    if (const toml::node *n = find(key)) {
      const auto v = n->as_integer();
      if (!v || v->get() < INT32_MIN || v->get() > INT32_MAX) {
        fail(n, "'" + key_name(key) + "' must be an integer");
      }
      out = static_cast<int>(v->get());
    }
  }

  void get(std::string_view key, int64_t &out) {
    if (const toml::node *n = find(key)) {
      const auto v = n->as_integer();
      if (!v) fail(n, "'" + key_name(key) + "' must be an integer");
      out = v->get();
    }
  }

  void get(std::string_view key, uint64_t &out) {
    if (const toml::node *n = find(key)) {
      const auto v = n->as_integer();
      if (!v || v->get() < 0) fail(n, "'" + key_name(key) + "' must be a non-negative integer");
      out = static_cast<uint64_t>(v->get());
    }
  }

  void get(std::string_view key, bool &out) {
    if (const toml::node *n = find(key)) {
      const auto v = n->as_boolean();
      if (!v) fail(n, "'" + key_name(key) + "' must be true or false");
      out = v->get();
    }
  }

  void get(std::string_view key, std::string &out) {
    if (const toml::node *n = find(key)) {
      const auto v = n->as_string();
      if (!v) fail(n, "'" + key_name(key) + "' must be a string");
      out = v->get();
    }
  }

  void get(std::string_view key, std::vector<uint64_t> &out) {
    if (const toml::node *n = find(key)) {
      const auto arr = n->as_array();
      if (!arr) fail(n, "'" + key_name(key) + "' must be an array of integers");
      out.clear();
      for (const toml::node &el : *arr) {
        const auto v = el.as_integer();
        if (!v || v->get() < 0) {
          fail(&el, "'" + key_name(key) + "' must hold non-negative integers");
        }
        out.push_back(static_cast<uint64_t>(v->get()));
      }
    }
  }

  void get(std::string_view key, std::vector<std::string> &out) {
    if (const toml::node *n = find(key)) {
      const auto arr = n->as_array();
      if (!arr) fail(n, "'" + key_name(key) + "' must be an array of strings");
      out.clear();
      for (const toml::node &el : *arr) {
        const auto v = el.as_string();
        if (!v) fail(&el, "'" + key_name(key) + "' must hold strings");
        out.push_back(v->get());
      }
    }
  }

  // Runs `convert` on a string value, turning its Error into a located one.
  template <class T, class F>
  void get_enum(std::string_view key, T &out, F convert) {
    if (const toml::node *n = find(key)) {
      const auto v = n->as_string();
      if (!v) fail(n, "'" + key_name(key) + "' must be a string");
      try {
        out = convert(v->get());
      } catch (const Error &) {
        fail(n, "'" + key_name(key) + "': unknown value '" + v->get() + "'");
      }
    }
  }

  void finish() const {
    if (!table_) return;
    for (const auto &[k, node] : *table_) {
      if (!used_.count(std::string(k.str()))) {
        fail(&node, "unknown key '" + key_name(k.str()) + "'");
      }
    }
  }

 private:
  const toml::table *table_;
  std::string source_;
  std::string prefix_;
  std::set<std::string> used_;
};

}  // namespace

bool looks_like_checkpoint(std::string_view p) {
  return p.find('/') != std::string_view::npos ||
         (p.size() > 5 && p.substr(p.size() - 5) == ".ckpt");
}

ExperimentConfig default_config(ModelKind model) {
  ExperimentConfig c;
  c.scene.model = model;
  if (model == ModelKind::kBunny) {
    c.scene.min_instances = 7;
    c.scene.max_instances = 12;
  }
  c.train_scene_seeds = seed_range(1000, 20);
  c.eval_scene_seeds = seed_range(2000, 10);
  return c;
}

void ExperimentConfig::validate() const {
  auto bad = [](const std::string &msg) { throw Error(ErrorKind::kConfigError, msg); };
  if (scene.points < 50) bad("scene.points must be >= 50");
  if (scene.min_instances < 1 || scene.max_instances < scene.min_instances) {
    bad("scene.instances must be [min, max] with 1 <= min <= max");
  }
  if (!(grid.radius > 0.0) || grid.azimuth_levels < 1 || grid.elevation_levels < 1) {
    bad("grid needs a positive radius and at least one level per angle");
  }
  if (env.horizon < 0) bad("env.horizon must be >= 0");
  if (!(env.epsilon > 0.0) || !(env.cluster_factor > 0.0)) {
    bad("fusion.epsilon and fusion.cluster_factor must be positive");
  }
  try {
    env.reward.validate();
    env.noise.validate();
    train.validate();
  } catch (const Error &e) {
    bad(e.what());
  }
  if (eval_scene_seeds.empty()) bad("no evaluation scenes");
  if (eval_seeds.empty()) bad("eval.seeds is empty");
  for (uint64_t s : train_scene_seeds) {
    if (std::find(eval_scene_seeds.begin(), eval_scene_seeds.end(), s) !=
        eval_scene_seeds.end()) {
      bad("scene seed " + std::to_string(s) + " is in both the train and eval sets");
    }
  }
  for (const std::string &p : policies) {
    if (p == "learned" || looks_like_checkpoint(p)) continue;
    try {
      baseline_kind_from_string(p);
    } catch (const Error &) {
      bad("unknown policy '" + p + "'");
    }
  }
}

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  const std::string src(source);
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error &e) {
    std::ostringstream out;
    out << src << ':' << e.source().begin.line << ": " << e.description();
    throw Error(ErrorKind::kConfigError, out.str());
  }

  ExperimentConfig c;
  TableReader top(&root, src, "");
  auto section = [&](std::string_view name) -> TableReader {
    const toml::node *n = top.find(name);
    if (n && !n->is_table()) top.fail(n, "'" + std::string(name) + "' must be a table");
    return TableReader(n ? n->as_table() : nullptr, src, std::string(name));
  };

  top.get("seed", c.seed);
  std::string out_dir = c.output_dir.string();
  top.get("output_dir", out_dir);
  c.output_dir = out_dir;

  {
    TableReader t = section("scene");
    t.get_enum("model", c.scene.model, model_kind_from_string);
    if (c.scene.model == ModelKind::kBunny) {
      c.scene.min_instances = 7;
      c.scene.max_instances = 12;
    }
    t.get("points", c.scene.points);
    t.get("model_seed", c.scene.model_seed);
    if (const toml::node *n = t.find("instances")) {
      const auto arr = n->as_array();
      if (!arr || arr->size() != 2 || !(*arr)[0].is_integer() || !(*arr)[1].is_integer()) {
        t.fail(n, "'scene.instances' must be [min, max]");
      }
      c.scene.min_instances = static_cast<int>((*arr)[0].as_integer()->get());
      c.scene.max_instances = static_cast<int>((*arr)[1].as_integer()->get());
    }
    int train_count = 20, eval_count = 10;
    uint64_t train_first = 1000, eval_first = 2000;
    t.get("train_count", train_count);
    t.get("train_first", train_first);
    t.get("eval_count", eval_count);
    t.get("eval_first", eval_first);
    if (train_count < 0 || eval_count < 0) t.fail(nullptr, "scene counts must be >= 0");
    c.train_scene_seeds = seed_range(train_first, train_count);
    c.eval_scene_seeds = seed_range(eval_first, eval_count);
    t.get("train_seeds", c.train_scene_seeds);
    t.get("eval_seeds", c.eval_scene_seeds);
    t.finish();
  }
  {
    TableReader t = section("grid");
    t.get("radius", c.grid.radius);
    t.get("azimuth_levels", c.grid.azimuth_levels);
    t.get("elevation_levels", c.grid.elevation_levels);
    t.finish();
  }
  {
    TableReader t = section("estimator");
    t.get("sigma_t", c.env.noise.sigma_t_base);
    t.get("sigma_r", c.env.noise.sigma_r_base);
    t.get("occlusion_gain", c.env.noise.occlusion_gain);
    t.get("depth_axis_gain", c.env.noise.depth_axis_gain);
    t.get("detect_v0", c.env.noise.detect_v0);
    t.get("detect_sharpness", c.env.noise.detect_sharpness);
    t.finish();
  }
  {
    TableReader t = section("fusion");
    t.get("epsilon", c.env.epsilon);
    t.get("cluster_factor", c.env.cluster_factor);
    t.finish();
  }
  {
    TableReader t = section("env");
    t.get("horizon", c.env.horizon);
    t.get("alpha", c.env.reward.alpha);
    t.get("beta", c.env.reward.beta);
    t.get("undetected_penalty", c.env.reward.undetected_penalty);
    t.finish();
  }
  {
    TableReader t = section("train");
    t.get("gamma", c.train.gamma);
    t.get("lambda", c.train.lambda);
    t.get("clip", c.train.clip);
    t.get("learning_rate", c.train.learning_rate);
    t.get("minibatch", c.train.minibatch);
    t.get("epochs", c.train.epochs);
    t.get("steps", c.train.total_steps);
    t.get("entropy_coef", c.train.entropy_coef);
    t.get("value_coef", c.train.value_coef);
    t.get("rollout_steps", c.train.rollout_steps);
    t.get("eval_interval", c.train.eval_interval);
    t.get_enum("attention", c.train_attention, attention_mode_from_string);
    t.finish();
  }
  {
    TableReader t = section("eval");
    t.get("seeds", c.eval_seeds);
    t.get("policies", c.policies);
    std::string ck;
    t.get("checkpoint", ck);
    if (!ck.empty()) c.checkpoint = ck;
    t.get("log_episodes", c.log_episodes);
    t.get("score_dump", c.score_dump_count);
    t.finish();
  }
  top.finish();
  c.train.seed = c.seed;
  try {
    c.validate();
  } catch (const Error &e) {
    throw Error(ErrorKind::kConfigError, src + ": " + std::string(e.what()).substr(
                                                        std::string("config-error: ").size()));
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kConfigError, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

namespace {

template <class T>
std::string toml_array(const std::vector<T> &v) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out << ", ";
    if constexpr (std::is_same_v<T, std::string>) {
      out << '"' << v[i] << '"';
    } else {
      out << v[i];
    }
  }
  out << ']';
  return out.str();
}

std::string num(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  std::string s = out.str();
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

std::string config_to_toml(const ExperimentConfig &c) {
  std::ostringstream out;
  out << "seed = " << c.seed << '\n'
      << "output_dir = \"" << c.output_dir.generic_string() << "\"\n\n"
      << "[scene]\n"
      << "model = \"" << to_string(c.scene.model) << "\"\n"
      << "points = " << c.scene.points << '\n'
      << "model_seed = " << c.scene.model_seed << '\n'
      << "instances = [" << c.scene.min_instances << ", " << c.scene.max_instances << "]\n"
      << "train_seeds = " << toml_array(c.train_scene_seeds) << '\n'
      << "eval_seeds = " << toml_array(c.eval_scene_seeds) << "\n\n"
      << "[grid]\n"
      << "radius = " << num(c.grid.radius) << '\n'
      << "azimuth_levels = " << c.grid.azimuth_levels << '\n'
      << "elevation_levels = " << c.grid.elevation_levels << "\n\n"
      << "[estimator]\n"
      << "sigma_t = " << num(c.env.noise.sigma_t_base) << '\n'
      << "sigma_r = " << num(c.env.noise.sigma_r_base) << '\n'
      << "occlusion_gain = " << num(c.env.noise.occlusion_gain) << '\n'
      << "depth_axis_gain = " << num(c.env.noise.depth_axis_gain) << '\n'
      << "detect_v0 = " << num(c.env.noise.detect_v0) << '\n'
      << "detect_sharpness = " << num(c.env.noise.detect_sharpness) << "\n\n"
      << "[fusion]\n"
      << "epsilon = " << num(c.env.epsilon) << '\n'
      << "cluster_factor = " << num(c.env.cluster_factor) << "\n\n"
      << "[env]\n"
      << "horizon = " << c.env.horizon << '\n'
      << "alpha = " << num(c.env.reward.alpha) << '\n'
      << "beta = " << num(c.env.reward.beta) << '\n'
      << "undetected_penalty = " << num(c.env.reward.undetected_penalty) << "\n\n"
      << "[train]\n"
      << "gamma = " << num(c.train.gamma) << '\n'
      << "lambda = " << num(c.train.lambda) << '\n'
      << "clip = " << num(c.train.clip) << '\n'
      << "learning_rate = " << num(c.train.learning_rate) << '\n'
      << "minibatch = " << c.train.minibatch << '\n'
      << "epochs = " << c.train.epochs << '\n'
      << "steps = " << c.train.total_steps << '\n'
      << "entropy_coef = " << num(c.train.entropy_coef) << '\n'
      << "value_coef = " << num(c.train.value_coef) << '\n'
      << "rollout_steps = " << c.train.rollout_steps << '\n'
      << "eval_interval = " << c.train.eval_interval << '\n'
      << "attention = \"" << to_string(c.train_attention) << "\"\n\n"
      << "[eval]\n"
      << "seeds = " << toml_array(c.eval_seeds) << '\n'
      << "policies = " << toml_array(c.policies) << '\n';
  if (!c.checkpoint.empty()) out << "checkpoint = \"" << c.checkpoint.generic_string() << "\"\n";
  out << "log_episodes = " << (c.log_episodes ? "true" : "false") << '\n'
      << "score_dump = " << c.score_dump_count << '\n';
  return out.str();
}

}  // namespace apl
