#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "gsevo/model.hpp"

namespace gsevo::testing {

/// Fresh empty directory under the system temp dir, unique per name.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gsevo_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Matrix<double> uniform_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo = 0.0,
                                     double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix<double> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

inline Eigen::VectorXi uniform_labels(Eigen::Index rows, int classes, Rng& rng) {
  std::uniform_int_distribution<int> u(1, classes);
  Eigen::VectorXi y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) y(i) = u(rng);
  return y;
}

/// Model with random weights and (unlike random_init) random biases too.
inline DnnModel<double> random_model(const std::vector<int>& genes, int n_f, int c, Rng& rng,
                                     Activation act = Activation::rectifier) {
  auto m = random_init<double>(Chromosome(genes), n_f, c, 1.0, rng, act);
  std::normal_distribution<double> n(0.0, 0.5);
  for (auto& b : m.biases)
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = n(rng);
  return m;
}

inline double max_abs_diff(const Matrix<double>& a, const Matrix<double>& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace gsevo::testing
