#include <cmath>

#include "doctest.h"
#include "gsevo/lbfgs.hpp"
#include "gsevo/model.hpp"
#include "support.hpp"

using namespace gsevo;
using Vec = Vector<double>;

namespace {

double rosenbrock(const Vec& x, Vec& g) {
  const double a = 1.0 - x(0);
  const double b = x(1) - x(0) * x(0);
  g.resize(2);
  g(0) = -2.0 * a - 400.0 * x(0) * b;
  g(1) = 200.0 * b;
  return a * a + 100.0 * b * b;
}

template <typename Result>
void check_wolfe(const Result& r, const LbfgsConfig& cfg) {
  for (const auto& s : r.steps) {
    CHECK(s.slope0 < 0.0);
    CHECK(s.step > 0.0);
    CHECK(s.value <= s.value0 + cfg.wolfe_c1 * s.step * s.slope0);
    CHECK(std::abs(s.slope) <= cfg.wolfe_c2 * std::abs(s.slope0));
  }
}

Matrix<double> random_spd(int n, Rng& rng) {
  const Matrix<double> B = gsevo::testing::uniform_matrix(n, n, rng, -1, 1);
  return B * B.transpose() + Matrix<double>::Identity(n, n);
}

}  // namespace

TEST_SUITE("lbfgs_optimizer") {

TEST_CASE("sphere converges in a few iterations") {
  auto f = [](const Vec& x, Vec& g) {
    g = 2.0 * x;
    return x.squaredNorm();
  };
  LbfgsConfig cfg;
  cfg.grad_tol = 1e-9;
  const auto r = minimize<double>(f, Vec::Ones(2), cfg);
  CHECK(r.value < 1e-16);
  CHECK(r.iterations <= 3);
  CHECK(r.status == LbfgsStatus::converged);
  CHECK(r.x.norm() < 1e-8);
}

TEST_CASE("Rosenbrock from the classic start") {
  LbfgsConfig cfg;
  cfg.max_iters = 100;
  cfg.grad_tol = 1e-10;
  Vec x0(2);
  x0 << -1.2, 1.0;
  const auto r = minimize<double>(rosenbrock, x0, cfg);
  CHECK(r.value < 1e-8);
  CHECK(r.iterations <= 100);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.steps.size() == static_cast<std::size_t>(r.iterations));
  check_wolfe(r, cfg);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
}

TEST_CASE("strong Wolfe holds on network losses") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng{seed};
    auto m = random_init<double>(Chromosome({10, 6}), 5, 3, 1.0, rng);
    const Matrix<double> X = gsevo::testing::uniform_matrix(40, 5, rng);
    const Eigen::VectorXi y = gsevo::testing::uniform_labels(40, 3, rng);
    LbfgsConfig cfg;
    cfg.max_iters = 50;
    const auto r = train_model(m, X, y, cfg);
    CHECK(r.iterations > 0);
    check_wolfe(r, cfg);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
  }
}

TEST_CASE("two-loop recursion reproduces dense BFGS on a quadratic") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng{seed};
    const int n = 6;
    const Matrix<double> A = random_spd(n, rng);
    CurvatureHistory<double> history(1000);
    std::vector<std::pair<Vec, Vec>> pairs;
    for (int k = 0; k < 5; ++k) {
      const Vec s = gsevo::testing::uniform_matrix(n, 1, rng, -1, 1);
      const Vec y = A * s;
      REQUIRE(history.push(s, y));
      pairs.emplace_back(s, y);
    }
    // Dense recursion H <- (I - rho s y') H (I - rho y s') + rho s s' from H0 = gamma I.
    const auto& last = pairs.back();
    const double gamma = last.first.dot(last.second) / last.second.squaredNorm();
    Matrix<double> H = gamma * Matrix<double>::Identity(n, n);
    const Matrix<double> I = Matrix<double>::Identity(n, n);
    for (const auto& [s, y] : pairs) {
      const double rho = 1.0 / s.dot(y);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    const Vec g = gsevo::testing::uniform_matrix(n, 1, rng, -1, 1);
    const Vec expected = H * g;
    CHECK((history.apply_inverse_hessian(g) - expected).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("curvature pairs without positive curvature are skipped") {
  CurvatureHistory<double> h(3);
  Vec s(2), y(2);
  s << 1, 0;
  y << -1, 0;
  CHECK_FALSE(h.push(s, y));
  y << 1e-11, 0;
  CHECK_FALSE(h.push(s, y));
  y << 2, 0;
  CHECK(h.push(s, y));
  CHECK(h.size() == 1);
  CHECK(h.initial_scaling() == 0.5);
  for (int i = 0; i < 5; ++i) h.push(s, y);
  CHECK(h.size() == 3);
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(h.curvature(i) > 1e-10);
}

TEST_CASE("non-finite start is an error") {
  auto f = [](const Vec& x, Vec& g) {
    g = x;
    return std::log(x(0));
  };
  Vec x0(1);
  x0 << -1.0;
  CHECK_THROWS_AS(minimize<double>(f, x0, LbfgsConfig{}), Error);
}

TEST_CASE("a hopeless line search stops cleanly") {
  // The reported gradient points the wrong way, so no step can decrease the value.
  auto f = [](const Vec& x, Vec& g) {
    g = -2.0 * x;
    return x.squaredNorm();
  };
  const auto r = minimize<double>(f, Vec::Ones(3), LbfgsConfig{});
  CHECK(r.status == LbfgsStatus::line_search_failed);
  CHECK(r.x == Vec::Ones(3));
  CHECK(r.value == 3.0);
}

TEST_CASE("iteration cap and configuration checks") {
  LbfgsConfig cfg;
  cfg.max_iters = 3;
  Vec x0(2);
  x0 << -1.2, 1.0;
  const auto r = minimize<double>(rosenbrock, x0, cfg);
  CHECK(r.status == LbfgsStatus::max_iterations);
  CHECK(r.iterations == 3);
  CHECK(r.trace.size() == 4);

  cfg.max_iters = 0;
  CHECK(minimize<double>(rosenbrock, x0, cfg).x == x0);

  LbfgsConfig bad;
  bad.wolfe_c1 = 0.95;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.memory = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("single precision instantiation") {
  auto f = [](const Vector<float>& x, Vector<float>& g) {
    g = 2.0f * x;
    return x.squaredNorm();
  };
  LbfgsConfig cfg;
  cfg.grad_tol = 1e-4;
  const auto r = minimize<float>(f, Vector<float>::Constant(4, 3.0f), cfg);
  CHECK(r.value < 1e-6f);
}

}  // TEST_SUITE
