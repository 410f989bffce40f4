#ifndef APL_BANDIT_HPP_
#define APL_BANDIT_HPP_

#include <span>
#include <vector>

#include "apl/ppo.hpp"

namespace apl {

// Two-armed bandit policy with one logit: P(arm 1) = sigmoid(theta). A second
// parameter is the critic's constant baseline. Actions are {0} or {1}.
class BanditModel {
 public:
  struct Observation {};
  struct Evaluation {
    double p1 = 0.5;
    double value = 0.0;
  };

  BanditModel() = default;

  Evaluation evaluate(const Observation &) const;
  double log_prob(const Evaluation &ev, const nn::Vector &action) const;
  double entropy(const Evaluation &ev) const;
  double value(const Evaluation &ev) const { return ev.value; }
  nn::Vector sample(const Evaluation &ev, Rng &rng) const;

  void backward(const Observation &obs, const Evaluation &ev, const nn::Vector &action,
                double dlogp, double dentropy, double dvalue, std::span<double> grad) const;

  std::size_t parameter_count() const { return 2; }
  std::vector<double> parameters() const { return {theta_, baseline_}; }
  void set_parameters(std::span<const double> flat);

  double probability_of_rewarded() const;

 private:
  double theta_ = 0.0;
  double baseline_ = 0.0;
};

struct BanditResult {
  int64_t steps_to_threshold = -1;  // -1: never reached
  double final_probability = 0.0;
};

// Arm 1 pays +1, arm 0 pays nothing. Runs PPO on one-step episodes until
// P(arm 1) >= threshold or max_steps pulls.
BanditResult train_bandit(uint64_t seed, int64_t max_steps = 2000, double threshold = 0.9);

// Hyper-parameters used by train_bandit.
TrainConfig bandit_train_config(uint64_t seed);

}  // namespace apl

#endif  // APL_BANDIT_HPP_
