#include "apl/attention.hpp"

namespace apl {

std::string_view to_string(AttentionMode mode) {
  return mode == AttentionMode::kLearned ? "learned" : "lowest-score";
}

AttentionMode attention_mode_from_string(std::string_view name) {
  if (name == "learned") return AttentionMode::kLearned;
  if (name == "lowest-score") return AttentionMode::kLowestScore;
  throw Error(ErrorKind::kInvalidArgument,
              "unknown attention mode '" + std::string(name) + "'");
}

AttentionParams::AttentionParams()
    : fc({kFeatureDim, kEmbeddingDim}, {nn::Activation::kRelu}),
      selector({2 * kEmbeddingDim, 1}, {nn::Activation::kNone}) {}

AttentionParams AttentionParams::make(Rng &rng) {
  AttentionParams p;
  p.fc.init_glorot(rng);
  p.selector.init_glorot(rng);
  return p;
}

namespace {

nn::Vector to_vector(const ObjectFeature &f) {
  const auto a = f.as_array();
  return Eigen::Map<const nn::Vector>(a.data(), kFeatureDim);
}

}  // namespace

AttentionOutput attend(const std::vector<ObjectFeature> &features,
                       const AttentionParams &params, AttentionMode mode,
                       AttentionCache *cache) {
  const std::size_t k = features.size();
  if (k == 0) throw Error(ErrorKind::kNoDetection, "no object features");

  AttentionCache local;
  AttentionCache &c = cache ? *cache : local;
  c.fc.assign(k, {});
  c.selector.assign(k, {});
  c.g.assign(k, {});

  nn::Vector global = nn::Vector::Zero(kEmbeddingDim);
  for (std::size_t i = 0; i < k; ++i) {
    c.g[i] = params.fc.forward(to_vector(features[i]), &c.fc[i]);
    global += c.g[i];
  }
  global /= static_cast<double>(k);

  nn::Vector scores(static_cast<Eigen::Index>(k));
  nn::Vector joined(2 * kEmbeddingDim);
  for (std::size_t i = 0; i < k; ++i) {
    joined << c.g[i], global;
    scores[static_cast<Eigen::Index>(i)] =
        params.selector.forward(joined, &c.selector[i])[0];
  }
  c.weights = nn::softmax(scores);

  std::size_t m = 0;
  for (std::size_t i = 1; i < k; ++i) {
    if (mode == AttentionMode::kLearned) {
      if (c.weights[static_cast<Eigen::Index>(i)] > c.weights[static_cast<Eigen::Index>(m)]) m = i;
    } else if (features[i].c < features[m].c) {
      m = i;
    }
  }
  c.m = m;
  c.valid = true;

  AttentionOutput out;
  out.m = m;
  out.weights = c.weights;
  out.o.resize(kAttendedDim);
  out.o.head(kEmbeddingDim) = c.g[m] * c.weights[static_cast<Eigen::Index>(m)];
  out.o.tail(kFeatureDim) = to_vector(features[m]);
  return out;
}

void attend_backward(const AttentionParams &params, const AttentionCache &cache,
                     const nn::Vector &grad_o, AttentionGradients &grads) {
  if (!cache.valid || cache.g.empty()) {
    throw Error(ErrorKind::kInvalidState, "attention cache not populated");
  }
  if (grad_o.size() != kAttendedDim) {
    throw Error(ErrorKind::kInvalidArgument, "grad_o must have 12 entries");
  }
  const std::size_t k = cache.g.size();
  const auto m = static_cast<Eigen::Index>(cache.m);
  const nn::Vector du = grad_o.head(kEmbeddingDim);
  const double wm = cache.weights[m];

  std::vector<nn::Vector> dg(k, nn::Vector::Zero(kEmbeddingDim));
  dg[cache.m] += wm * du;
  const double dwm = cache.g[cache.m].dot(du);

  // softmax Jacobian row for the attended entry.
  nn::Vector dglobal = nn::Vector::Zero(kEmbeddingDim);
  for (std::size_t j = 0; j < k; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double dscore = dwm * wm * ((j == cache.m ? 1.0 : 0.0) - cache.weights[jj]);
    nn::Vector up(1);
    up[0] = dscore;
    const nn::Vector dx = params.selector.backward(cache.selector[j], up, grads.selector);
    dg[j] += dx.head(kEmbeddingDim);
    dglobal += dx.tail(kEmbeddingDim);
  }
  dglobal /= static_cast<double>(k);

  grads.features.assign(k, nn::Vector::Zero(kFeatureDim));
  for (std::size_t i = 0; i < k; ++i) {
    dg[i] += dglobal;
    grads.features[i] = params.fc.backward(cache.fc[i], dg[i], grads.fc);
  }
  grads.features[cache.m] += grad_o.tail(kFeatureDim);
}

}  // namespace apl
