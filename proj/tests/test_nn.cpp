#include <cmath>
#include <cstring>
#include <filesystem>
#include <numbers>

#include "doctest.h"

#include "apl/nn.hpp"

using namespace apl;
using nn::Activation;
using nn::DenseNet;
using nn::Vector;

namespace {

Vector random_vector(int n, Rng &rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

// Finite-difference check of loss = w . net(x) over parameters and input.
void check_network(DenseNet net, Rng &rng, int points) {
  net.init_glorot(rng);
  // Non-zero biases so relu units start on both sides of the kink.
  {
    std::vector<double> p(net.parameters().begin(), net.parameters().end());
    std::normal_distribution<double> g(0.0, 0.1);
    for (double &x : p) x += g(rng);
    net.set_parameters(p);
  }
  for (int k = 0; k < points; ++k) {
    const Vector x = random_vector(net.input_dim(), rng);
    const Vector w = random_vector(net.output_dim(), rng);
    DenseNet::Cache cache;
    net.forward(x, &cache);
    std::vector<double> grad(net.parameter_count(), 0.0);
    const Vector gx = net.backward(cache, w, grad);

    std::vector<double> params(net.parameters().begin(), net.parameters().end());
    auto loss = [&] {
      net.set_parameters(params);
      return w.dot(net.forward(x));
    };
    CHECK(nn::gradient_check(loss, params, grad) < 1e-4);
    net.set_parameters(params);

    Vector xs = x;
    std::vector<double> xv(xs.data(), xs.data() + xs.size());
    auto loss_x = [&] {
      return w.dot(net.forward(Eigen::Map<const Vector>(xv.data(), static_cast<Eigen::Index>(xv.size()))));
    };
    std::vector<double> gxv(gx.data(), gx.data() + gx.size());
    CHECK(nn::gradient_check(loss_x, xv, gxv) < 1e-4);
  }
}

}  // namespace

TEST_CASE("forward examples") {
  DenseNet lin({3, 2}, {Activation::kNone});
  std::vector<double> p(lin.parameter_count(), 0.0);
  p[6] = 1.5;
  p[7] = -2.0;
  lin.set_parameters(p);
  const Vector out = lin.forward(Vector::Constant(3, 4.0));
  CHECK(out[0] == 1.5);
  CHECK(out[1] == -2.0);

  DenseNet relu({2, 2}, {Activation::kRelu});
  relu.set_parameters(std::vector<double>{1, 0, 0, 1, 0, 0});
  const Vector r = relu.forward(Vector{{-1.0, 2.0}});
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 2.0);

  Rng rng(1);
  DenseNet net({5, 8, 3}, {Activation::kRelu, Activation::kNone});
  net.init_glorot(rng);
  const Vector x = random_vector(5, rng);
  CHECK(net.forward(x) == net.forward(x));
  CHECK_THROWS_AS(net.forward(Vector::Zero(4)), Error);
  CHECK_THROWS_AS(DenseNet({3, 2}, {}), Error);
}

TEST_CASE("single linear layer gradients by hand") {
  DenseNet lin({3, 2}, {Activation::kNone});
  Rng rng(2);
  lin.init_glorot(rng);
  const Vector x{{0.5, -1.0, 2.0}};
  DenseNet::Cache cache;
  lin.forward(x, &cache);
  std::vector<double> grad(lin.parameter_count(), 0.0);
  lin.backward(cache, Vector::Ones(2), grad);
  // Column-major 2x3 weights: dW(r, c) = x[c].
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < 2; ++r) CHECK(grad[c * 2 + r] == x[c]);
  }
  CHECK(grad[6] == 1.0);
  CHECK(grad[7] == 1.0);
}

TEST_CASE("relu blocks gradient at negative preactivation") {
  DenseNet relu({2, 2}, {Activation::kRelu});
  relu.set_parameters(std::vector<double>{1, 0, 0, 1, 0, 0});
  DenseNet::Cache cache;
  relu.forward(Vector{{-1.0, 2.0}}, &cache);
  std::vector<double> grad(6, 0.0);
  const Vector gx = relu.backward(cache, Vector::Ones(2), grad);
  CHECK(gx[0] == 0.0);
  CHECK(gx[1] == 1.0);
  CHECK(grad[4] == 0.0);
  CHECK(grad[5] == 1.0);
}

TEST_CASE("backward matches finite differences on every architecture") {
  Rng rng(3);
  // attention fc, selector, policy and value nets at T = 5.
  check_network(DenseNet({6, 6}, {Activation::kRelu}), rng, 10);
  check_network(DenseNet({12, 1}, {Activation::kNone}), rng, 10);
  check_network(DenseNet({30, 128, 2}, {Activation::kRelu, Activation::kNone}), rng, 10);
  check_network(DenseNet({30, 128, 1}, {Activation::kRelu, Activation::kNone}), rng, 10);
}

TEST_CASE("stale cache is rejected") {
  Rng rng(4);
  DenseNet net({3, 4, 1}, {Activation::kRelu, Activation::kNone});
  net.init_glorot(rng);
  DenseNet::Cache cache;
  net.forward(Vector::Ones(3), &cache);
  std::vector<double> p(net.parameters().begin(), net.parameters().end());
  net.set_parameters(p);
  std::vector<double> grad(net.parameter_count(), 0.0);
  try {
    net.backward(cache, Vector::Ones(1), grad);
    FAIL("expected invalid-state");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kInvalidState);
  }
  net.forward(Vector::Ones(3), &cache);
  net.mutable_parameters()[0] += 1.0;
  CHECK_THROWS_AS(net.backward(cache, Vector::Ones(1), grad), Error);

  DenseNet other({3, 4, 1}, {Activation::kRelu, Activation::kNone});
  other.forward(Vector::Ones(3), &cache);
  CHECK_THROWS_AS(net.backward(cache, Vector::Ones(1), grad), Error);
}

TEST_CASE("softmax") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Vector l = random_vector(1 + i % 9, rng, 20.0);
    const Vector s = nn::softmax(l);
    CHECK(std::abs(s.sum() - 1.0) < 1e-9);
    const Vector shifted = nn::softmax((l.array() + 123.0).matrix());
    CHECK((s - shifted).cwiseAbs().maxCoeff() < 1e-12);
  }
  const Vector big = nn::softmax(Vector{{1000.0, 1000.0}});
  CHECK(big[0] == doctest::Approx(0.5));
}

TEST_CASE("gaussian head closed forms") {
  nn::GaussianHead head(2);
  const Vector mu{{0.3, -0.2}};
  CHECK(head.log_prob(mu, mu) == doctest::Approx(-std::log(2 * std::numbers::pi)));
  CHECK(head.entropy() == doctest::Approx(std::log(2 * std::numbers::pi * std::numbers::e)));

  head.log_std = Vector{{-0.7, 0.4}};
  const Vector a{{1.0, 0.5}};
  double expect = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double s = std::exp(head.log_std[i]);
    expect += -(a[i] - mu[i]) * (a[i] - mu[i]) / (2 * s * s) - std::log(s) -
              0.5 * std::log(2 * std::numbers::pi);
  }
  CHECK(head.log_prob(mu, a) == doctest::Approx(expect).epsilon(1e-12));

  // Derivatives against finite differences.
  const double h = 1e-6;
  const Vector dm = head.dlogp_dmean(mu, a), ds = head.dlogp_dlogstd(mu, a);
  for (int i = 0; i < 2; ++i) {
    Vector up = mu, dn = mu;
    up[i] += h;
    dn[i] -= h;
    CHECK(dm[i] == doctest::Approx((head.log_prob(up, a) - head.log_prob(dn, a)) / (2 * h)).epsilon(1e-6));
    nn::GaussianHead hu = head, hd = head;
    hu.log_std[i] += h;
    hd.log_std[i] -= h;
    CHECK(ds[i] == doctest::Approx((hu.log_prob(mu, a) - hd.log_prob(mu, a)) / (2 * h)).epsilon(1e-6));
  }

  Rng rng(6);
  const int n = 100000;
  Vector sum = Vector::Zero(2);
  for (int i = 0; i < n; ++i) sum += head.sample(mu, rng);
  const Vector mean = sum / n;
  const Vector sd = head.std();
  for (int i = 0; i < 2; ++i) CHECK(std::abs(mean[i] - mu[i]) < 3 * sd[i] / std::sqrt(double(n)));
}

TEST_CASE("adam matches a reference trace") {
  // f(x, y) = 3 (x - 1)^2 + 0.5 (y + 2)^2 + x y
  auto grad_of = [](const std::vector<double> &p) {
    return std::vector<double>{6 * (p[0] - 1) + p[1], (p[1] + 2) + p[0]};
  };
  std::vector<double> params{0.5, 0.5};
  nn::AdamState state(2, 0.05);

  std::vector<double> ref{0.5, 0.5}, m(2, 0.0), v(2, 0.0);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.05;
  for (int t = 1; t <= 100; ++t) {
    nn::adam_step(state, params, grad_of(params));
    const auto g = grad_of(ref);
    for (int i = 0; i < 2; ++i) {
      m[i] = b1 * m[i] + (1 - b1) * g[i];
      v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(b1, t));
      const double vh = v[i] / (1 - std::pow(b2, t));
      ref[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
    CHECK(std::abs(params[0] - ref[0]) < 1e-10);
    CHECK(std::abs(params[1] - ref[1]) < 1e-10);
  }
}

TEST_CASE("adam step properties") {
  std::vector<double> p{1.0, -2.0, 3.0};
  nn::AdamState st(3, 1e-3);
  for (int i = 0; i < 10; ++i) nn::adam_step(st, p, std::vector<double>(3, 0.0));
  CHECK(std::abs(p[0] - 1.0) < 1e-12);
  CHECK(std::abs(p[1] + 2.0) < 1e-12);

  std::vector<double> q{0.0, 0.0};
  nn::AdamState first(2, 1e-3);
  nn::adam_step(first, q, std::vector<double>{4.0, -0.02});
  CHECK(q[0] == doctest::Approx(-1e-3).epsilon(1e-4));
  CHECK(q[1] == doctest::Approx(1e-3).epsilon(1e-4));

  std::vector<double> r{0.0};
  nn::AdamState bad(1, 1e-3);
  try {
    nn::adam_step(bad, r, std::vector<double>{std::nan("")});
    FAIL("expected training-diverged");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kTrainingDiverged);
  }
  CHECK_THROWS_AS(nn::adam_step(bad, r, std::vector<double>{1.0, 2.0}), Error);
}

TEST_CASE("checkpoint round trip is bit exact") {
  Rng rng(8);
  DenseNet net({7, 16, 3}, {Activation::kRelu, Activation::kNone});
  net.init_glorot(rng);
  const auto dir = std::filesystem::temp_directory_path() / "apl_test_nn";
  std::filesystem::remove_all(dir);
  const auto path = dir / "net.ckpt";
  nn::write_checkpoint(path, {{"architecture", net.architecture()}, {"note", "x"}}, net.parameters());
  const nn::Checkpoint ck = nn::read_checkpoint(path);
  CHECK(ck.header.at("architecture") == net.architecture());
  REQUIRE(ck.params.size() == net.parameter_count());
  for (std::size_t i = 0; i < ck.params.size(); ++i) {
    CHECK(std::memcmp(&ck.params[i], &net.parameters()[i], sizeof(double)) == 0);
  }
  try {
    nn::read_checkpoint(dir / "missing.ckpt");
    FAIL("expected missing-artifact");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kMissingArtifact);
  }
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 5);
  CHECK_THROWS_AS(nn::read_checkpoint(path), Error);
  std::filesystem::remove_all(dir);
}
