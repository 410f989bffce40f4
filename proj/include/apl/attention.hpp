#ifndef APL_ATTENTION_HPP_
#define APL_ATTENTION_HPP_

#include <vector>

#include "apl/fusion.hpp"
#include "apl/nn.hpp"

namespace apl {

inline constexpr int kFeatureDim = 6;     // (b[4], d, c)
inline constexpr int kEmbeddingDim = 6;   // fc output
inline constexpr int kAttendedDim = 12;   // o

enum class AttentionMode {
  kLearned,      // argmax of the selector softmax
  kLowestScore,  // object with the lowest verification score (ablation)
};

std::string_view to_string(AttentionMode mode);
AttentionMode attention_mode_from_string(std::string_view name);

struct AttentionParams {
  nn::DenseNet fc;        // 6 -> 6, relu
  nn::DenseNet selector;  // 12 -> 1, linear

  AttentionParams();
  static AttentionParams make(Rng &rng);
};

struct AttentionOutput {
  nn::Vector o;        // concat(g^m * w^m, b^m, d^m, c^m)
  std::size_t m = 0;   // attended object
  nn::Vector weights;  // softmax over objects
};

struct AttentionCache {
  std::vector<nn::DenseNet::Cache> fc;
  std::vector<nn::DenseNet::Cache> selector;
  std::vector<nn::Vector> g;
  nn::Vector weights;
  std::size_t m = 0;
  bool valid = false;
};

// Throws kNoDetection for an empty feature list.
AttentionOutput attend(const std::vector<ObjectFeature> &features,
                       const AttentionParams &params,
                       AttentionMode mode = AttentionMode::kLearned,
                       AttentionCache *cache = nullptr);

struct AttentionGradients {
  std::vector<double> fc;
  std::vector<double> selector;
  std::vector<nn::Vector> features;  // per object, d/d(b, d, c)

  explicit AttentionGradients(const AttentionParams &params)
      : fc(params.fc.parameter_count(), 0.0),
        selector(params.selector.parameter_count(), 0.0) {}
};

// Backpropagates d loss / d o. The argmax choice itself is not differentiated.
void attend_backward(const AttentionParams &params, const AttentionCache &cache,
                     const nn::Vector &grad_o, AttentionGradients &grads);

}  // namespace apl

#endif  // APL_ATTENTION_HPP_
