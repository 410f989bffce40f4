#include "apl/agent.hpp"

#include <numbers>

namespace apl {

Action to_action(const nn::Vector &raw) {
  return {std::numbers::pi * raw[0], std::numbers::pi / 4.0 * (1.0 + raw[1])};
}

Agent::Agent(int horizon, AttentionMode mode, Rng &rng)
    : horizon_{horizon},
      mode_{mode},
      attention_{AttentionParams::make(rng)},
      policy_({15 + 3 * horizon, kHiddenUnits, 2},
              {nn::Activation::kRelu, nn::Activation::kNone}),
      value_({15 + 3 * horizon, kHiddenUnits, 1},
             {nn::Activation::kRelu, nn::Activation::kNone}),
      head_(2) {
  if (horizon < 1) {
    throw Error(ErrorKind::kInvalidArgument, "agent horizon must be >= 1");
  }
  policy_.init_glorot(rng);
  value_.init_glorot(rng);
}

AgentEvaluation Agent::evaluate(const Observation &obs) const {
  AgentEvaluation ev;
  nn::Vector o = nn::Vector::Zero(kAttendedDim);
  if (!obs.features.empty()) {
    ev.has_objects = true;
    ev.attention_out = attend(obs.features, attention_, mode_, &ev.attention_cache);
    o = ev.attention_out.o;
  }
  ev.state = assemble_state(o, obs);
  ev.mean = policy_.forward(ev.state, &ev.policy_cache);
  ev.value = value_.forward(ev.state, &ev.value_cache)[0];
  return ev;
}

void Agent::backward(const Observation & /*obs*/, const Evaluation &ev,
                     const nn::Vector &action, double dlogp, double dentropy,
                     double dvalue, std::span<double> grad) const {
  if (grad.size() != parameter_count()) {
    throw Error(ErrorKind::kInvalidArgument, "gradient buffer size mismatch");
  }
  const std::size_t n_fc = attention_.fc.parameter_count();
  const std::size_t n_sel = attention_.selector.parameter_count();
  const std::size_t n_pol = policy_.parameter_count();
  const std::size_t n_val = value_.parameter_count();
  std::span<double> g_fc = grad.subspan(0, n_fc);
  std::span<double> g_sel = grad.subspan(n_fc, n_sel);
  std::span<double> g_pol = grad.subspan(n_fc + n_sel, n_pol);
  std::span<double> g_val = grad.subspan(n_fc + n_sel + n_pol, n_val);
  std::span<double> g_std = grad.subspan(n_fc + n_sel + n_pol + n_val, 2);

  const nn::Vector dmean = dlogp * head_.dlogp_dmean(ev.mean, action);
  const nn::Vector dlogstd = dlogp * head_.dlogp_dlogstd(ev.mean, action);
  for (int i = 0; i < 2; ++i) g_std[i] += dlogstd[i] + dentropy;

  nn::Vector dstate = policy_.backward(ev.policy_cache, dmean, g_pol);
  nn::Vector up(1);
  up[0] = dvalue;
  dstate += value_.backward(ev.value_cache, up, g_val);

  if (ev.has_objects) {
    AttentionGradients ag(attention_);
    attend_backward(attention_, ev.attention_cache, dstate.head(kAttendedDim), ag);
    for (std::size_t i = 0; i < n_fc; ++i) g_fc[i] += ag.fc[i];
    for (std::size_t i = 0; i < n_sel; ++i) g_sel[i] += ag.selector[i];
  }
}

std::size_t Agent::parameter_count() const {
  return attention_.fc.parameter_count() + attention_.selector.parameter_count() +
         policy_.parameter_count() + value_.parameter_count() + 2;
}

std::vector<double> Agent::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const nn::DenseNet *net :
       {&attention_.fc, &attention_.selector, &policy_, &value_}) {
    const auto p = net->parameters();
    flat.insert(flat.end(), p.begin(), p.end());
  }
  flat.push_back(head_.log_std[0]);
  flat.push_back(head_.log_std[1]);
  return flat;
}

void Agent::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw Error(ErrorKind::kInvalidArgument, "agent parameter count mismatch");
  }
  std::size_t off = 0;
  for (nn::DenseNet *net : {&attention_.fc, &attention_.selector, &policy_, &value_}) {
    const std::size_t n = net->parameter_count();
    net->set_parameters(flat.subspan(off, n));
    off += n;
  }
  head_.log_std[0] = flat[off];
  head_.log_std[1] = flat[off + 1];
}

nlohmann::json Agent::architecture() const {
  return {{"horizon", horizon_},
          {"attention_mode", to_string(mode_)},
          {"attention_fc", attention_.fc.architecture()},
          {"attention_selector", attention_.selector.architecture()},
          {"policy", policy_.architecture()},
          {"value", value_.architecture()},
          {"log_std", 2}};
}

void Agent::save(const std::filesystem::path &path, int64_t step) const {
  nlohmann::json header = {{"format", "apl-checkpoint"},
                           {"version", 1},
                           {"step", step},
                           {"architecture", architecture()}};
  const auto flat = parameters();
  nn::write_checkpoint(path, header, flat);
}

Agent Agent::load(const std::filesystem::path &path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::kMissingArtifact, "checkpoint not found: " + path.string());
  }
  const nn::Checkpoint ck = nn::read_checkpoint(path);
  try {
    const auto &arch = ck.header.at("architecture");
    Rng rng(0);
    Agent agent(arch.at("horizon").get<int>(),
                attention_mode_from_string(arch.at("attention_mode").get<std::string>()),
                rng);
    if (agent.architecture() != arch) {
      throw Error(ErrorKind::kInvalidArgument,
                  "checkpoint architecture mismatch in " + path.string());
    }
    agent.set_parameters(ck.params);
    return agent;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::kInvalidArgument,
                "bad checkpoint header in " + path.string() + ": " + e.what());
  }
}

}  // namespace apl
