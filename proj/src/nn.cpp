#include "apl/nn.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>

namespace apl::nn {

DenseNet::DenseNet(std::vector<int> dims, std::vector<Activation> activations) {
  if (dims.size() < 2 || activations.size() != dims.size() - 1) {
    throw Error(ErrorKind::kInvalidArgument, "layer dims/activations mismatch");
  }
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    if (dims[l] < 1 || dims[l + 1] < 1) {
      throw Error(ErrorKind::kInvalidArgument, "layer dims must be positive");
    }
    layers_.push_back({dims[l], dims[l + 1], activations[l], offset});
    offset += static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1];
  }
  params_.assign(offset, 0.0);
}

void DenseNet::init_glorot(Rng &rng) {
  for (const Layer &layer : layers_) {
    const double limit = std::sqrt(6.0 / (layer.in + layer.out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    const std::size_t n_w = static_cast<std::size_t>(layer.in) * layer.out;
    for (std::size_t i = 0; i < n_w; ++i) params_[layer.offset + i] = dist(rng);
    for (int i = 0; i < layer.out; ++i) params_[layer.offset + n_w + i] = 0.0;
  }
  ++version_;
}

void DenseNet::set_parameters(std::span<const double> values) {
  if (values.size() != params_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "parameter count mismatch");
  }
  std::copy(values.begin(), values.end(), params_.begin());
  ++version_;
}

std::span<double> DenseNet::mutable_parameters() {
  ++version_;
  return params_;
}

Vector DenseNet::forward(const Vector &x, Cache *cache) const {
  if (x.size() != input_dim()) {
    throw Error(ErrorKind::kInvalidArgument,
                "input dimension " + std::to_string(x.size()) + " != " +
                    std::to_string(input_dim()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->preactivations.clear();
    cache->owner = this;
    cache->version = version_;
  }
  Vector h = x;
  for (const Layer &layer : layers_) {
    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + layer.offset, layer.out,
                                        layer.in);
    Eigen::Map<const Vector> b(
        params_.data() + layer.offset + static_cast<std::size_t>(layer.in) * layer.out,
        layer.out);
    Vector z = w * h + b;
    if (cache) {
      cache->inputs.push_back(h);
      cache->preactivations.push_back(z);
    }
    h = layer.activation == Activation::kRelu ? Vector(z.cwiseMax(0.0)) : z;
  }
  return h;
}

Vector DenseNet::backward(const Cache &cache, const Vector &grad_out,
                          std::span<double> grad) const {
  if (cache.owner != this || cache.version != version_ ||
      cache.inputs.size() != layers_.size()) {
    throw Error(ErrorKind::kInvalidState, "stale forward cache");
  }
  if (grad.size() != params_.size() || grad_out.size() != output_dim()) {
    throw Error(ErrorKind::kInvalidArgument, "gradient shape mismatch");
  }
  Vector g = grad_out;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Layer &layer = layers_[l];
    if (layer.activation == Activation::kRelu) {
      g = (cache.preactivations[l].array() > 0.0).select(g, 0.0);
    }
    const std::size_t n_w = static_cast<std::size_t>(layer.in) * layer.out;
    Eigen::Map<Eigen::MatrixXd> dw(grad.data() + layer.offset, layer.out, layer.in);
    Eigen::Map<Vector> db(grad.data() + layer.offset + n_w, layer.out);
    dw.noalias() += g * cache.inputs[l].transpose();
    db += g;
    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + layer.offset, layer.out,
                                        layer.in);
    g = w.transpose() * g;
  }
  return g;
}

nlohmann::json DenseNet::architecture() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer &l : layers_) {
    layers.push_back({{"in", l.in},
                      {"out", l.out},
                      {"activation", l.activation == Activation::kRelu ? "relu" : "none"}});
  }
  return layers;
}

Vector softmax(const Vector &logits) {
  if (logits.size() == 0) return logits;
  const Vector e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

Vector GaussianHead::sample(const Vector &mean, Rng &rng) const {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector a(mean.size());
  const Vector s = std();
  for (Eigen::Index i = 0; i < mean.size(); ++i) a[i] = mean[i] + s[i] * gauss(rng);
  return a;
}

double GaussianHead::log_prob(const Vector &mean, const Vector &action) const {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double sigma = std::exp(log_std[i]);
    const double z = (action[i] - mean[i]) / sigma;
    lp += -0.5 * z * z - log_std[i] - half_log_2pi;
  }
  return lp;
}

double GaussianHead::entropy() const {
  const double c = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  return (log_std.array() + c).sum();
}

Vector GaussianHead::dlogp_dmean(const Vector &mean, const Vector &action) const {
  const Vector var = (2.0 * log_std).array().exp();
  return (action - mean).cwiseQuotient(var);
}

Vector GaussianHead::dlogp_dlogstd(const Vector &mean,
                                   const Vector &action) const {
  const Vector var = (2.0 * log_std).array().exp();
  return ((action - mean).array().square() / var.array() - 1.0).matrix();
}

void adam_step(AdamState &state, std::span<double> params,
               std::span<const double> grads) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw Error(ErrorKind::kInvalidArgument, "adam shape mismatch");
  }
  for (double g : grads) {
    if (!std::isfinite(g)) {
      throw Error(ErrorKind::kTrainingDiverged, "non-finite gradient");
    }
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    if (!std::isfinite(params[i])) {
      throw Error(ErrorKind::kTrainingDiverged, "non-finite parameter");
    }
  }
}

double gradient_check(const std::function<double()> &loss,
                      std::span<double> params,
                      std::span<const double> analytic, double step,
                      double floor) {
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + step;
    const double up = loss();
    params[i] = saved - step;
    const double down = loss();
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max(floor, std::abs(analytic[i]) + std::abs(numeric));
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

void write_checkpoint(const std::filesystem::path &path,
                      const nlohmann::json &header,
                      std::span<const double> params) {
  nlohmann::json h = header;
  h["param_count"] = params.size();
  h["encoding"] = "float64-le";
  const std::filesystem::path tmp = path.string() + ".tmp";
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error(ErrorKind::kIoError, "cannot write " + tmp.string());
    os << h.dump() << '\n';
    for (double x : params) {
      const auto bits = std::bit_cast<uint64_t>(x);
      for (int b = 0; b < 8; ++b) os.put(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
    if (!os) throw Error(ErrorKind::kIoError, "short write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::kMissingArtifact, "cannot read " + path.string());
  std::string line;
  if (!std::getline(is, line)) {
    throw Error(ErrorKind::kInvalidArgument, "empty checkpoint " + path.string());
  }
  Checkpoint ck;
  try {
    ck.header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::kInvalidArgument,
                "bad checkpoint header in " + path.string() + ": " + e.what());
  }
  const auto n = ck.header.at("param_count").get<std::size_t>();
  ck.params.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char *>(buf), 8)) {
      throw Error(ErrorKind::kInvalidArgument, "truncated checkpoint " + path.string());
    }
    uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<uint64_t>(buf[b]) << (8 * b);
    ck.params[i] = std::bit_cast<double>(bits);
  }
  return ck;
}

}  // namespace apl::nn
