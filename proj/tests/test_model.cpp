#include <sstream>

#include "doctest.h"
#include "gsevo/model.hpp"
#include "gsevo/model_io.hpp"
#include "support.hpp"

using namespace gsevo;
using gsevo::testing::random_model;
using gsevo::testing::uniform_labels;
using gsevo::testing::uniform_matrix;

namespace {

/// Central-difference gradient of the mean cross-entropy, h = 1e-6.
Vector<double> numeric_gradient(const DnnModel<double>& m, const Matrix<double>& X,
                                const Eigen::VectorXi& y, double h = 1e-6) {
  const Vector<double> theta = flatten(m);
  Vector<double> g(theta.size());
  DnnModel<double> probe = m;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Vector<double> t = theta;
    t(i) = theta(i) + h;
    assign_parameters(probe, t);
    const double up = loss(probe, X, y);
    t(i) = theta(i) - h;
    assign_parameters(probe, t);
    const double down = loss(probe, X, y);
    g(i) = (up - down) / (2 * h);
  }
  return g;
}

double relative_error(const Vector<double>& a, const Vector<double>& b) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-300});
}

DnnModel<double> zero_model(std::vector<int> widths) {
  Rng rng{0};
  auto m = random_init<double>(Chromosome({widths.begin() + 1, widths.end() - 1}), widths.front(),
                               widths.back(), 1.0, rng);
  for (auto& W : m.weights) W.setZero();
  return m;
}

}  // namespace

TEST_SUITE("neural_model") {

TEST_CASE("backpropagation matches central differences") {
  const std::vector<std::vector<int>> shapes{{8, 5, 4, 3}, {8, 5, 3}, {4, 2}, {3, 6, 2}};
  for (auto act : {Activation::rectifier, Activation::sigmoid}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      for (const auto& w : shapes) {
        Rng rng{seed * 31 + 7};
        const auto m = random_model({w.begin() + 1, w.end() - 1}, w.front(), w.back(), rng, act);
        const Matrix<double> X = uniform_matrix(12, w.front(), rng, -1.0, 1.0);
        const Eigen::VectorXi y = uniform_labels(12, w.back(), rng);
        const auto [value, grad] = loss_and_grad(m, X, y);
        CHECK(value == doctest::Approx(loss(m, X, y)).epsilon(1e-13));
        const double err = relative_error(grad, numeric_gradient(m, X, y));
        INFO("seed " << seed << " activation " << to_string(act));
        CHECK(err <= 1e-5);
      }
    }
  }
}

TEST_CASE("random init shapes and determinism") {
  Rng a{3}, b{3};
  const auto m1 = random_init<double>(Chromosome({3}), 4, 2, 1.0, a);
  const auto m2 = random_init<double>(Chromosome({3}), 4, 2, 1.0, b);
  CHECK(m1.parameter_count() == 23);
  CHECK(flatten(m1) == flatten(m2));
  CHECK_NOTHROW(m1.validate());
  for (const auto& bias : m1.biases) CHECK(bias.isZero());
  const double limit = std::sqrt(6.0 / 7.0);
  CHECK(m1.weights[0].cwiseAbs().maxCoeff() <= limit);

  Rng c{3};
  const auto tiny = random_init<double>(Chromosome({3}), 4, 2, 1e-12, c);
  const Matrix<double> p = forward(tiny, Matrix<double>::Ones(5, 4));
  CHECK((p.array() - 0.5).abs().maxCoeff() < 1e-9);
  CHECK_THROWS_AS(random_init<double>(Chromosome({3}), 4, 2, 0.0, c), ConfigError);
}

TEST_CASE("forward produces row-stochastic probabilities") {
  const auto zero = zero_model({5, 4, 3});
  Rng rng{1};
  const Matrix<double> X = uniform_matrix(7, 5, rng);
  const Matrix<double> p = forward(zero, X);
  CHECK((p.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng r{seed};
    const auto m = random_model({6, 6}, 4, 5, r);
    const Matrix<double> q = forward(m, uniform_matrix(5, 4, r, -3, 3));
    CHECK(q.rows() == 5);
    CHECK((q.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(q.minCoeff() > 0.0);
    CHECK(q.maxCoeff() < 1.0);
  }
  CHECK_THROWS_AS(forward(zero, Matrix<double>::Zero(2, 4)), DataError);
}

TEST_CASE("softmax is stable for large logits") {
  Matrix<double> z(2, 2);
  z << 1000.0, 1000.0, -1000.0, 0.0;
  const Matrix<double> p = softmax_rows(z);
  CHECK(p(0, 0) == 0.5);
  CHECK(p(0, 1) == 0.5);
  CHECK(p(1, 1) == doctest::Approx(1.0));
  CHECK(p.allFinite());
}

TEST_CASE("cross-entropy special cases") {
  auto m = zero_model({1, 2});
  Matrix<double> x(1, 1);
  x << 0.3;
  Eigen::VectorXi y(1);
  y << 2;
  CHECK(loss(m, x, y) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  // A confident correct model drives the loss towards zero.
  m.weights[0](0, 0) = -200.0;
  m.weights[0](0, 1) = 200.0;
  x(0, 0) = 1.0;
  const double l = loss(m, x, y);
  CHECK(l >= 0.0);
  CHECK(l < 1e-100);

  Eigen::VectorXi bad(1);
  bad << 3;
  CHECK_THROWS_AS(loss(m, x, bad), DataError);
}

TEST_CASE("accuracy and its tie-break") {
  auto zero = zero_model({2, 2});
  Dataset d;
  d.num_classes = 2;
  d.X = Matrix<double>::Random(10, 2);
  d.y.resize(10);
  d.y << 1, 2, 1, 2, 1, 2, 1, 2, 1, 2;
  CHECK(accuracy(zero, d) == 0.5);
  d.y << 1, 1, 1, 2, 1, 2, 1, 2, 1, 2;
  CHECK(accuracy(zero, d) == 0.6);
  d.y.setOnes();
  CHECK(accuracy(zero, d) == 1.0);

  Dataset empty;
  empty.num_classes = 2;
  empty.X.resize(0, 2);
  CHECK_THROWS_WITH(accuracy(zero, empty), "empty evaluation set");

  const Eigen::MatrixXi cm = confusion_matrix(zero, d);
  CHECK(cm(0, 0) == 10);
  CHECK(cm.sum() == 10);
}

TEST_CASE("flattening is a bijection in canonical order") {
  Rng rng{12};
  const auto m = random_model({3, 4}, 2, 2, rng);
  const Vector<double> theta = flatten(m);
  CHECK(theta(0) == m.weights[0](0, 0));
  CHECK(theta(1) == m.weights[0](0, 1));
  CHECK(theta(3) == m.weights[0](1, 0));
  CHECK(theta(6) == m.biases[0](0));
  CHECK(theta(9) == m.weights[1](0, 0));
  CHECK(unflatten(m, theta) == m);

  Vector<double> other = Vector<double>::LinSpaced(theta.size(), -1, 1);
  CHECK(flatten(unflatten(m, other)) == other);
  CHECK_THROWS(assign_parameters(const_cast<DnnModel<double>&>(m), Vector<double>(3)));
}

TEST_CASE("training reduces the loss monotonically") {
  Rng rng{4};
  auto m = random_init<double>(Chromosome({6}), 3, 3, 1.0, rng);
  const Matrix<double> X = uniform_matrix(60, 3, rng);
  const Eigen::VectorXi y = uniform_labels(60, 3, rng);
  LbfgsConfig cfg;
  cfg.max_iters = 40;
  const auto result = train_model(m, X, y, cfg);
  for (std::size_t i = 1; i < result.trace.size(); ++i) CHECK(result.trace[i] <= result.trace[i - 1]);
  CHECK(loss(m, X, y) == doctest::Approx(result.value).epsilon(1e-12));
}

TEST_CASE("autoencoder gradient matches central differences") {
  Rng rng{5};
  const Matrix<double> A = uniform_matrix(9, 4, rng);
  for (auto act : {Activation::rectifier, Activation::sigmoid}) {
    const int hidden = 3;
    Vector<double> p = uniform_matrix(2 * 4 * hidden + hidden + 4, 1, rng, -1, 1);
    Vector<double> g, scratch;
    autoencoder_loss_and_grad(A, hidden, act, p, g);
    Vector<double> fd(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      Vector<double> t = p;
      t(i) += 1e-6;
      const double up = autoencoder_loss_and_grad(A, hidden, act, t, scratch);
      t(i) -= 2e-6;
      const double down = autoencoder_loss_and_grad(A, hidden, act, t, scratch);
      fd(i) = (up - down) / 2e-6;
    }
    CHECK(relative_error(g, fd) <= 1e-5);
  }
}

TEST_CASE("pretraining") {
  Rng rng{6};
  const auto m = random_init<double>(Chromosome({5}), 8, 2, 1.0, rng);
  const Matrix<double> X = uniform_matrix(50, 8, rng);

  Rng r0{1};
  CHECK(pretrain_sae(m, X, 0, r0) == m);

  Rng r1{1};
  std::vector<std::vector<double>> traces;
  const auto pre = pretrain_sae(m, X, 5, r1, &traces);
  REQUIRE(traces.size() == 1);
  REQUIRE(traces[0].size() >= 2);
  for (std::size_t i = 1; i < traces[0].size(); ++i) CHECK(traces[0][i] < traces[0][i - 1]);
  CHECK(pre.weights[1] == m.weights[1]);  // the output layer is left alone
  CHECK_FALSE(pre.weights[0] == m.weights[0]);
}

TEST_CASE("pretrained models fine-tune as well as random ones") {
  Rng data_rng{31};
  Dataset d = synth_blobs(3, 10, 80, 4.0, data_rng);
  d.X = minmax_normalize(d.X);
  LbfgsConfig cfg;
  cfg.max_iters = 60;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng a{seed}, b{seed};
    auto plain = random_init<double>(Chromosome({12, 8}), 10, 3, 1.0, a);
    auto pre = pretrain_sae(random_init<double>(Chromosome({12, 8}), 10, 3, 1.0, b), d.X, 20, b);
    train_model(plain, d.X, d.y, cfg);
    train_model(pre, d.X, d.y, cfg);
    CHECK(accuracy(pre, d) >= accuracy(plain, d) - 0.02);
  }
}

TEST_CASE("model files round-trip exactly") {
  Rng rng{8};
  ModelBundle bundle{random_model({7, 3}, 4, 3, rng, Activation::sigmoid), {}};
  bundle.input = fit_minmax(uniform_matrix(10, 4, rng, -5, 5));
  std::stringstream buffer;
  write_model(buffer, bundle);
  const auto back = read_model(buffer);
  CHECK(back.model == bundle.model);
  CHECK(back.input.kind == Normalization::minmax);
  CHECK(back.input.offset == bundle.input.offset);
  CHECK(back.input.scale == bundle.input.scale);

  const auto path = gsevo::testing::scratch_dir("model") / "m.txt";
  save_model(path, {random_model({2}, 3, 2, rng), {}});
  CHECK(load_model(path).input.kind == Normalization::none);
}

TEST_CASE("malformed model files are rejected") {
  auto read = [](const std::string& text) {
    std::istringstream in(text);
    return read_model(in, "bad");
  };
  CHECK_THROWS_AS(read("not-a-model 1\n"), DataError);
  CHECK_THROWS_AS(read("gsevo-model 9\n"), DataError);
  CHECK_THROWS_AS(read("gsevo-model 1\nactivation rectifier\nwidths 2 2\ninput_transform none\n"
                       "parameters 6\n1\n2\n"),
                  DataError);
  CHECK_THROWS_AS(load_model("/nonexistent/model.txt"), IoError);
}

}  // TEST_SUITE
