#ifndef APL_AGENT_HPP_
#define APL_AGENT_HPP_

#include <filesystem>
#include <span>
#include <vector>

#include "apl/env.hpp"

namespace apl {

inline constexpr int kHiddenUnits = 128;

// Maps the raw Gaussian sample to camera angles: azimuth = pi * a0 (wrapped
// by the viewpoint lookup), elevation = pi/4 * (1 + a1) (clamped to the band).
Action to_action(const nn::Vector &raw);

struct AgentEvaluation {
  bool has_objects = false;
  AttentionOutput attention_out;
  AttentionCache attention_cache;
  nn::Vector state;
  nn::DenseNet::Cache policy_cache;
  nn::DenseNet::Cache value_cache;
  nn::Vector mean;
  double value = 0.0;
};

// Attention, Gaussian policy (state -> 128 relu -> 2) and critic
// (state -> 128 relu -> 1), trained jointly.
class Agent {
 public:
  using Observation = apl::Observation;
  using Evaluation = AgentEvaluation;

  Agent(int horizon, AttentionMode mode, Rng &rng);

  int horizon() const { return horizon_; }
  int state_dim() const { return 15 + 3 * horizon_; }
  AttentionMode attention_mode() const { return mode_; }

  AttentionParams &attention() { return attention_; }
  const AttentionParams &attention() const { return attention_; }
  const nn::DenseNet &policy_net() const { return policy_; }
  const nn::DenseNet &value_net() const { return value_; }
  const nn::GaussianHead &head() const { return head_; }

  Evaluation evaluate(const Observation &obs) const;
  double log_prob(const Evaluation &ev, const nn::Vector &action) const {
    return head_.log_prob(ev.mean, action);
  }
  double entropy(const Evaluation & /*ev*/) const { return head_.entropy(); }
  nn::Vector sample(const Evaluation &ev, Rng &rng) const {
    return head_.sample(ev.mean, rng);
  }
  double value(const Evaluation &ev) const { return ev.value; }

  // Accumulates d/dθ of (dlogp * log_prob + dentropy * entropy + dvalue * value).
  void backward(const Observation &obs, const Evaluation &ev,
                const nn::Vector &action, double dlogp, double dentropy,
                double dvalue, std::span<double> grad) const;

  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  nlohmann::json architecture() const;
  void save(const std::filesystem::path &path, int64_t step) const;
  static Agent load(const std::filesystem::path &path);

 private:
  int horizon_;
  AttentionMode mode_;
  AttentionParams attention_;
  nn::DenseNet policy_;
  nn::DenseNet value_;
  nn::GaussianHead head_;
};

}  // namespace apl

#endif  // APL_AGENT_HPP_
