#include "doctest.h"
#include "gsevo/net2net.hpp"
#include "support.hpp"

using namespace gsevo;
using gsevo::testing::max_abs_diff;
using gsevo::testing::random_model;
using gsevo::testing::uniform_matrix;

namespace {

DnnModel<double> toy() {
  DnnModel<double> m;
  m.widths = {2, 1, 1};
  m.weights.resize(2);
  m.biases.resize(2);
  m.weights[0].resize(2, 1);
  m.weights[0] << 1, 2;
  m.weights[1].resize(1, 1);
  m.weights[1] << 3;
  m.biases[0] = Vector<double>::Zero(1);
  m.biases[1] = Vector<double>::Zero(1);
  return m;
}

/// A target reachable by widening and deepening only: every existing gene grows, and each
/// appended layer is at least as wide as the identity layer it starts from.
Chromosome grown(const Chromosome& base, Rng& rng) {
  std::uniform_int_distribution<int> extra_depth(0, 2), extra_width(0, 6);
  Chromosome t = base;
  for (int& g : t.genes) g += extra_width(rng);
  const int more = extra_depth(rng);
  for (int k = 0; k < more; ++k) t.genes.push_back(t.genes.back() + extra_width(rng));
  return t;
}

}  // namespace

TEST_SUITE("net2net_transfer") {

TEST_CASE("widening the linear toy halves the outgoing weight") {
  Rng rng{1};
  const auto m = toy();
  const auto w = widen(m, 0, 2, 0.0, rng);
  CHECK(w.widths == std::vector<int>{2, 2, 1});
  CHECK(w.weights[1](0, 0) == 1.5);
  CHECK(w.weights[1](1, 0) == 1.5);
  CHECK(w.weights[0].col(1) == m.weights[0].col(0));
  const Matrix<double> x = Matrix<double>::Ones(1, 2);
  CHECK(logits(m, x)(0, 0) == 9.0);
  CHECK(logits(w, x)(0, 0) == 9.0);
}

TEST_CASE("widening preserves the function without noise") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng{seed};
    const auto m = random_model({5, 4}, 6, 3, rng);
    const Matrix<double> X = uniform_matrix(100, 6, rng);
    const auto w = widen(widen(m, 0, 11, 0.0, rng), 1, 9, 0.0, rng);
    CHECK(w.architecture().genes == std::vector<int>{11, 9});
    CHECK(max_abs_diff(logits(m, X), logits(w, X)) <= 1e-9);
    CHECK(max_abs_diff(forward(m, X), forward(w, X)) <= 1e-9);
  }
}

TEST_CASE("replication groups keep their outgoing sums") {
  Rng rng{2};
  const auto m = random_model({3}, 4, 2, rng);
  const auto w = widen(m, 0, 10, 0.0, rng);
  // Sum the outgoing rows of each new unit back onto the unit it copies.
  Matrix<double> folded = Matrix<double>::Zero(3, 2);
  for (int j = 0; j < 10; ++j) {
    int source = -1;
    for (int s = 0; s < 3; ++s)
      if (w.weights[0].col(j) == m.weights[0].col(s)) source = s;
    REQUIRE(source >= 0);
    folded.row(source) += w.weights[1].row(j);
  }
  CHECK(max_abs_diff(folded, m.weights[1]) <= 1e-12);
}

TEST_CASE("widen edge cases") {
  Rng rng{3};
  const auto m = random_model({4}, 3, 2, rng);
  CHECK(widen(m, 0, 4, 0.1, rng) == m);
  CHECK_THROWS_AS(widen(m, 0, 3, 0.0, rng), Error);
  CHECK_THROWS_AS(widen(m, 1, 8, 0.0, rng), Error);

  // Noise touches only the incoming weights of the new units.
  const auto noisy = widen(m, 0, 6, 0.01, rng);
  CHECK(noisy.weights[0].leftCols(4) == m.weights[0]);
  CHECK(noisy.biases[0].head(4) == m.biases[0]);
}

TEST_CASE("deepening with identity layers") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng{seed};
    const auto m = random_model({5, 3}, 4, 3, rng);
    const Matrix<double> X = uniform_matrix(50, 4, rng);
    for (int position = 0; position <= 2; ++position) {
      const auto d = deepen(m, position);
      CHECK(d.hidden_layers() == 3);
      CHECK(d.widths[position + 1] == d.widths[position]);
      CHECK(max_abs_diff(logits(m, X), logits(d, X)) == 0.0);
    }
    const auto twice = deepen(deepen(m, 1), 1);
    CHECK(twice.hidden_layers() == 4);
    CHECK(max_abs_diff(logits(m, X), logits(twice, X)) == 0.0);
  }
  Rng rng{4};
  const auto m = random_model({5}, 4, 3, rng);
  CHECK_THROWS_AS(deepen(m, 2), Error);
  CHECK_THROWS_AS(deepen(m, -1), Error);
}

TEST_CASE("sigmoid deepening needs the approximation flag") {
  Rng rng{5};
  const auto m = random_model({5}, 4, 3, rng, Activation::sigmoid);
  CHECK_THROWS_AS(deepen(m, 1), Error);
  const auto d = deepen(m, 1, true);
  const Matrix<double> X = uniform_matrix(20, 4, rng);
  CHECK(max_abs_diff(logits(m, X), logits(d, X)) > 1e-6);
}

TEST_CASE("shrinking keeps the strongest outgoing units") {
  DnnModel<double> m = toy();
  Rng rng{6};
  m = widen(m, 0, 2, 0.0, rng);
  m.weights[0] << 1, 10, 2, 20;
  m.weights[1] << 0.1, 5;
  const auto s = shrink(m, 0, 1);
  CHECK(s.widths == std::vector<int>{2, 1, 1});
  CHECK(s.weights[1](0, 0) == 5.0);
  CHECK(s.weights[0](0, 0) == 10.0);

  Rng r{7};
  const auto big = random_model({6}, 3, 2, r);
  CHECK(shrink(big, 0, 6) == big);
  const auto back = widen(shrink(big, 0, 1), 0, 6, 0.0, r);
  CHECK(back.parameter_count() == big.parameter_count());
  CHECK_THROWS_AS(shrink(big, 0, 0), Error);
  CHECK_THROWS_AS(shrink(big, 0, 7), Error);
}

TEST_CASE("transform to the same architecture is a no-op") {
  Rng rng{8};
  const auto m = random_model({7, 5}, 4, 3, rng);
  const auto t = transform_to(m, m.architecture(), 0.0, rng);
  CHECK(t == m);
}

TEST_CASE("growing transforms preserve the function") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng{seed + 100};
    const auto m = random_model({4, 3}, 5, 3, rng);
    const Chromosome target = grown(m.architecture(), rng);
    const auto t = transform_to(m, target, 0.0, rng);
    const Matrix<double> X = uniform_matrix(100, 5, rng);
    CHECK(t.architecture() == target);
    CHECK(max_abs_diff(forward(m, X), forward(t, X)) <= 1e-9);
  }
}

TEST_CASE("any target yields a valid model of the target shape") {
  Rng rng{9};
  const SearchSpace space{1, 5, 1, 12};
  const auto m = random_model({6, 2, 9}, 4, 3, rng);
  for (const auto& target : sample_population(init_sampler_params(space), space, 200, rng)) {
    const auto t = transform_to(m, target, 4, 3, 1e-4, rng);
    CHECK_NOTHROW(t.validate());
    CHECK(t.architecture() == target);
    CHECK(t.parameter_count() == param_count(target, 4, 3));
  }
  CHECK_THROWS_AS(transform_to(m, Chromosome({3}), 5, 3, 0.0, rng), DataError);
  CHECK_THROWS_AS(transform_to(m, Chromosome({3}), 4, 2, 0.0, rng), DataError);
}

}  // TEST_SUITE
