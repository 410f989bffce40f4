#ifndef APL_NN_HPP_
#define APL_NN_HPP_

#include <Eigen/Core>

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"

#include "apl/common.hpp"

// Small dense networks with hand-written reverse mode, 64-bit throughout.
namespace apl::nn {

using Vector = Eigen::VectorXd;

enum class Activation { kNone, kRelu };

class DenseNet {
 public:
  struct Layer {
    int in;
    int out;
    Activation activation;
    std::size_t offset;  // weights (out x in, column-major) then bias (out)
  };

  // Forward activations retained for backward(). Tied to one parameter
  // version of one network.
  struct Cache {
    std::vector<Vector> inputs;
    std::vector<Vector> preactivations;
    const DenseNet *owner = nullptr;
    uint64_t version = 0;
  };

  DenseNet() = default;
  // dims = {in, hidden..., out}; one activation per layer. Parameters are
  // zero until init_glorot() or set_parameters().
  DenseNet(std::vector<int> dims, std::vector<Activation> activations);

  // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  void init_glorot(Rng &rng);

  int input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  int output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  const std::vector<Layer> &layers() const { return layers_; }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<const double> parameters() const { return params_; }
  void set_parameters(std::span<const double> values);
  // Any write through this span invalidates outstanding caches.
  std::span<double> mutable_parameters();

  Vector forward(const Vector &x, Cache *cache = nullptr) const;

  // Adds parameter gradients into `grad` (size parameter_count()) and returns
  // the gradient with respect to the input.
  Vector backward(const Cache &cache, const Vector &grad_out,
                  std::span<double> grad) const;

  nlohmann::json architecture() const;

 private:
  std::vector<Layer> layers_;
  std::vector<double> params_;
  uint64_t version_ = 1;
};

// Max-subtracted softmax.
Vector softmax(const Vector &logits);

// State-independent diagonal Gaussian: std = exp(log_std).
struct GaussianHead {
  Vector log_std;

  explicit GaussianHead(int dim = 2) : log_std(Vector::Zero(dim)) {}

  Vector std() const { return log_std.array().exp(); }
  Vector sample(const Vector &mean, Rng &rng) const;
  double log_prob(const Vector &mean, const Vector &action) const;
  double entropy() const;

  // d log_prob / d mean and d log_prob / d log_std.
  Vector dlogp_dmean(const Vector &mean, const Vector &action) const;
  Vector dlogp_dlogstd(const Vector &mean, const Vector &action) const;
};

struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  AdamState() = default;
  AdamState(std::size_t n, double learning_rate)
      : lr{learning_rate}, m(n, 0.0), v(n, 0.0) {}
};

// Bias-corrected Adam. Throws kTrainingDiverged on non-finite gradients or
// parameters.
void adam_step(AdamState &state, std::span<double> params,
               std::span<const double> grads);

// Central finite differences of a scalar function with respect to `params`,
// compared against `analytic`. Returns the largest relative error
// |a - n| / max(floor, |a| + |n|) over all coordinates; the floor keeps
// difference-quotient roundoff on exactly-zero gradients from counting.
double gradient_check(const std::function<double()> &loss,
                      std::span<double> params,
                      std::span<const double> analytic, double step = 1e-6,
                      double floor = 1e-5);

// JSON header line, then the flat parameter block as little-endian float64.
void write_checkpoint(const std::filesystem::path &path,
                      const nlohmann::json &header,
                      std::span<const double> params);

struct Checkpoint {
  nlohmann::json header;
  std::vector<double> params;
};

Checkpoint read_checkpoint(const std::filesystem::path &path);

}  // namespace apl::nn

#endif  // APL_NN_HPP_
