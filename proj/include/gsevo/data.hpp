#pragma once

#include <array>
#include <cmath>
#include <iosfwd>
#include <filesystem>
#include <string>
#include <vector>

#include "gsevo/common.hpp"

namespace gsevo {

/// Feature matrix (one sample per row) with class labels in {1..num_classes}.
struct Dataset {
  Matrix<double> X;
  Eigen::VectorXi y;
  int num_classes = 0;

  Eigen::Index rows() const noexcept { return X.rows(); }
  Eigen::Index features() const noexcept { return X.cols(); }
  bool empty() const noexcept { return X.rows() == 0; }

  /// Checks row/label agreement and label range; throws DataError.
  void validate() const;
  Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

struct DataSplit {
  Dataset train;
  Dataset validation;
  Dataset test;
};

struct RawSignal {
  std::vector<double> samples;
  int label = 0;
};

/// Non-overlapping windows of length `window`; a trailing remainder is dropped.
Dataset segment(const RawSignal& signal, int window, int num_classes);
Dataset segment(const std::vector<RawSignal>& signals, int window);

enum class Normalization { none, minmax, zscore };

Normalization parse_normalization(const std::string& name);
std::string to_string(Normalization n);

/// Affine per-column transform x' = (x - offset) * scale. Degenerate columns carry scale 0.
struct ColumnScaler {
  Normalization kind = Normalization::none;
  Eigen::RowVectorXd offset;
  Eigen::RowVectorXd scale;

  template <typename Derived>
  Matrix<double> apply(const Eigen::MatrixBase<Derived>& X) const {
    if (kind == Normalization::none) return X;
    return ((X.rowwise() - offset).array().rowwise() * scale.array()).matrix();
  }
};

template <typename Derived>
ColumnScaler fit_minmax(const Eigen::MatrixBase<Derived>& X) {
  ColumnScaler s{Normalization::minmax, Eigen::RowVectorXd::Zero(X.cols()),
                 Eigen::RowVectorXd::Zero(X.cols())};
  if (X.rows() == 0) return s;
  s.offset = X.colwise().minCoeff();
  const Eigen::RowVectorXd span = X.colwise().maxCoeff() - s.offset;
  for (Eigen::Index j = 0; j < X.cols(); ++j) s.scale(j) = span(j) > 0.0 ? 1.0 / span(j) : 0.0;
  return s;
}

/// Population standard deviation; zero-variance columns map to 0.
template <typename Derived>
ColumnScaler fit_zscore(const Eigen::MatrixBase<Derived>& X) {
  ColumnScaler s{Normalization::zscore, Eigen::RowVectorXd::Zero(X.cols()),
                 Eigen::RowVectorXd::Zero(X.cols())};
  if (X.rows() == 0) return s;
  s.offset = X.colwise().mean();
  const Eigen::RowVectorXd var =
      (X.rowwise() - s.offset).array().square().colwise().sum() / static_cast<double>(X.rows());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    s.scale(j) = var(j) > 0.0 ? 1.0 / std::sqrt(var(j)) : 0.0;
  }
  return s;
}

template <typename Derived>
Matrix<double> minmax_normalize(const Eigen::MatrixBase<Derived>& X) {
  return fit_minmax(X).apply(X);
}

template <typename Derived>
Matrix<double> zscore_normalize(const Eigen::MatrixBase<Derived>& X) {
  return fit_zscore(X).apply(X);
}

ColumnScaler fit_scaler(const Matrix<double>& X, Normalization kind);

/// Fits the scaler on the training part and applies it to all three parts.
ColumnScaler normalize_split(DataSplit& split, Normalization kind);

struct SplitFractions {
  double train = 0.64;
  double validation = 0.16;
  double test = 0.20;
};

/// Per-class shuffled partition with largest-remainder rounding.
/// Throws DataError("insufficient class support") when a class has fewer than 3 rows.
DataSplit stratified_split(const Dataset& d, const SplitFractions& fractions, Rng& rng);

/// Largest-remainder apportionment of `n` items over `fractions`.
std::array<Eigen::Index, 3> apportion(Eigen::Index n, const SplitFractions& fractions);

struct CsvOptions {
  bool skip_header = false;
};

/// Numeric CSV, last column = integer label. Labels are taken as 1-based unless a 0 label
/// appears, in which case the whole file is shifted by +1.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset parse_csv(std::istream& in, const std::string& source_name, const CsvOptions& options = {});
void write_csv(const std::filesystem::path& path, const Dataset& d);

/// One real per line; blank lines are ignored.
RawSignal load_signal(const std::filesystem::path& path, int label);

/// Manifest lines "path,label"; relative paths resolve against the manifest directory.
std::vector<RawSignal> load_signal_manifest(const std::filesystem::path& manifest);

/// Each subdirectory is one class (sorted by name, labels 1..C); every regular file inside is a
/// signal.
std::vector<RawSignal> load_signal_directory(const std::filesystem::path& root);

/// Isotropic unit-variance Gaussian clusters. Class k's mean sits on axis (k mod n_f) at
/// separation/sqrt(2) * (1 + k / n_f), so any two class means are `separation` apart when
/// C <= n_f.
Dataset synth_blobs(int num_classes, int num_features, int per_class, double separation, Rng& rng);

}  // namespace gsevo
